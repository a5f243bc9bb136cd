#pragma once

// Result-table CSV, atomic file output and log-log SVG rendering.
// Numbers go through to_chars/from_chars, so nothing depends on the locale.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "got/errors.hpp"
#include "got/experiments.hpp"
#include "got/measures.hpp"

namespace got {

inline constexpr std::string_view kCsvHeader = "d,sigma,n,m,trial,estimate,elapsed_ms";

/// Shortest round-trip decimal form; "nan" for NaN.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}

inline double parse_double(std::string_view s, const std::string& what) {
    if (s == "nan") return std::nan("");
    double v = 0.0;
    const char* first = s.data();
    if (!s.empty() && s.front() == '+') ++first;
    const auto res = std::from_chars(first, s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty())
        throw SchemaError(what + ": '" + std::string(s) + "' is not a number");
    return v;
}

inline std::size_t parse_count(std::string_view s, const std::string& what) {
    std::size_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty())
        throw SchemaError(what + ": '" + std::string(s) + "' is not a non-negative integer");
    return v;
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

/// Writes via a sibling temp file and renames over the target.
inline void atomic_write(const std::filesystem::path& path, std::string_view content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open '" + tmp.string() + "' for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw Error("write to '" + tmp.string() + "' failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error("cannot move output into place at '" + path.string() + "'");
    }
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------------------
// CSV

inline std::string to_csv(const ResultTable& table) {
    std::string out(kCsvHeader);
    out += '\n';
    for (const auto& r : table.rows) {
        out += std::to_string(r.d) + ',' + format_double(r.sigma) + ',' + std::to_string(r.n) + ',' +
               std::to_string(r.m) + ',' + std::to_string(r.trial) + ',' + format_double(r.estimate) + ',' +
               format_double(r.elapsed_ms) + '\n';
    }
    return out;
}

/// Parses a result CSV; schema errors name the row (1-based, header = 1)
/// and column.
inline ResultTable parse_csv(std::string_view text) {
    ResultTable table;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool header_seen = false;
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!header_seen) {
            if (line != kCsvHeader)
                throw SchemaError("row 1: header must be '" + std::string(kCsvHeader) + "'");
            header_seen = true;
            continue;
        }
        if (line.empty()) continue;
        const auto f = split(line, ',');
        const std::string where = "row " + std::to_string(line_no);
        if (f.size() != 7) throw SchemaError(where + ": expected 7 columns, found " + std::to_string(f.size()));
        ResultRow r;
        r.d = parse_count(f[0], where + " column d");
        r.sigma = parse_double(f[1], where + " column sigma");
        r.n = parse_count(f[2], where + " column n");
        r.m = parse_count(f[3], where + " column m");
        r.trial = parse_count(f[4], where + " column trial");
        r.estimate = parse_double(f[5], where + " column estimate");
        r.elapsed_ms = parse_double(f[6], where + " column elapsed_ms");
        if (r.d == 0) throw SchemaError(where + " column d: must be >= 1");
        if (!(r.sigma >= 0.0)) throw SchemaError(where + " column sigma: must be >= 0");
        if (!r.failed() && !(r.estimate >= 0.0)) throw SchemaError(where + " column estimate: must be >= 0");
        table.rows.push_back(r);
    }
    if (!header_seen) throw SchemaError("row 1: missing header");
    return table;
}

/// Reads a point cloud: one point per line, comma-separated coordinates,
/// optional trailing weight column when `weighted`.
inline DiscreteMeasure read_measure_csv(std::string_view text, bool weighted, const std::string& name) {
    PointCloud pts;
    std::vector<double> w;
    std::size_t line_no = 0, pos = 0;
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty() || line.front() == '#') continue;
        const auto f = split(line, ',');
        const std::string where = name + " row " + std::to_string(line_no);
        std::vector<double> p;
        for (std::size_t k = 0; k + (weighted ? 1 : 0) < f.size(); ++k) p.push_back(parse_double(f[k], where));
        if (p.empty()) throw SchemaError(where + ": no coordinates");
        if (!pts.empty() && p.size() != pts.dim()) throw SchemaError(where + ": inconsistent dimension");
        pts.push_back(p);
        if (weighted) w.push_back(parse_double(f.back(), where + " weight"));
    }
    if (pts.empty()) throw SchemaError(name + ": no points");
    if (!weighted) return make_empirical(std::move(pts));
    double total = 0.0;
    for (double v : w) total += v;
    if (!(total > 0.0)) throw SchemaError(name + ": weights must sum to a positive value");
    for (double& v : w) v /= total;
    try {
        return {std::move(pts), std::move(w)};
    } catch (const ArgumentError& e) {
        throw SchemaError(name + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// SVG

/// Log-log plot of mean estimate against n, one polyline per sigma. The
/// plotted (sigma, n, mean, std_err) tuples are embedded as comments.
inline std::string render_svg(const ResultTable& table, const std::string& title = "smoothed W1 convergence") {
    const auto cells = summarize(table);
    std::map<double, std::vector<CellSummary>> curves;
    double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
    for (const auto& c : cells) {
        if (!(c.mean > 0.0)) continue;
        curves[c.sigma].push_back(c);
        xmin = std::min(xmin, std::log10(static_cast<double>(c.n)));
        xmax = std::max(xmax, std::log10(static_cast<double>(c.n)));
        ymin = std::min(ymin, std::log10(c.mean));
        ymax = std::max(ymax, std::log10(c.mean));
    }
    if (curves.empty()) throw SchemaError("plot: no positive mean estimates to draw");
    xmin = std::floor(xmin);
    xmax = std::max(std::ceil(xmax), xmin + 1.0);
    ymin = std::floor(ymin);
    ymax = std::max(std::ceil(ymax), ymin + 1.0);

    const double W = 640, H = 480, L = 70, R = 130, T = 40, B = 60;
    auto px = [&](double lx) { return L + (lx - xmin) / (xmax - xmin) * (W - L - R); };
    auto py = [&](double ly) { return H - B - (ly - ymin) / (ymax - ymin) * (H - T - B); };
    auto f = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", v);
        return std::string(buf);
    };
    static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

    std::string s;
    s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" viewBox=\"0 0 640 480\">\n";
    s += "<!-- data: sigma,n,mean,std_err -->\n";
    for (const auto& [sigma, pts] : curves)
        for (const auto& c : pts)
            s += "<!-- " + format_double(sigma) + "," + std::to_string(c.n) + "," + format_double(c.mean) + "," +
                 format_double(c.std_err) + " -->\n";
    s += "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
    s += "<text x=\"" + f(W / 2) + "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">" +
         title + "</text>\n";
    s += "<g stroke=\"#ccc\" stroke-width=\"1\">\n";
    for (double e = xmin; e <= xmax; e += 1.0)
        s += "<line x1=\"" + f(px(e)) + "\" y1=\"" + f(py(ymin)) + "\" x2=\"" + f(px(e)) + "\" y2=\"" + f(py(ymax)) + "\"/>\n";
    for (double e = ymin; e <= ymax; e += 1.0)
        s += "<line x1=\"" + f(px(xmin)) + "\" y1=\"" + f(py(e)) + "\" x2=\"" + f(px(xmax)) + "\" y2=\"" + f(py(e)) + "\"/>\n";
    s += "</g>\n<g font-family=\"sans-serif\" font-size=\"12\">\n";
    for (double e = xmin; e <= xmax; e += 1.0)
        s += "<text x=\"" + f(px(e)) + "\" y=\"" + f(H - B + 18) + "\" text-anchor=\"middle\">1e" +
             std::to_string(static_cast<int>(e)) + "</text>\n";
    for (double e = ymin; e <= ymax; e += 1.0)
        s += "<text x=\"" + f(L - 8) + "\" y=\"" + f(py(e) + 4) + "\" text-anchor=\"end\">1e" +
             std::to_string(static_cast<int>(e)) + "</text>\n";
    s += "<text x=\"" + f((L + W - R) / 2) + "\" y=\"" + f(H - 15) + "\" text-anchor=\"middle\">n</text>\n";
    s += "<text x=\"18\" y=\"" + f((T + H - B) / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
         f((T + H - B) / 2) + ")\">mean estimate</text>\n</g>\n";
    std::size_t k = 0;
    for (const auto& [sigma, pts] : curves) {
        const char* col = colors[k % 8];
        std::string poly;
        for (const auto& c : pts) poly += f(px(std::log10(static_cast<double>(c.n)))) + "," + f(py(std::log10(c.mean))) + " ";
        s += "<polyline fill=\"none\" stroke=\"" + std::string(col) + "\" stroke-width=\"2\" points=\"" + poly + "\"/>\n";
        for (const auto& c : pts)
            s += "<circle cx=\"" + f(px(std::log10(static_cast<double>(c.n)))) + "\" cy=\"" + f(py(std::log10(c.mean))) +
                 "\" r=\"3\" fill=\"" + col + "\"/>\n";
        const double ly = T + 20 + 20 * static_cast<double>(k);
        s += "<line x1=\"" + f(W - R + 15) + "\" y1=\"" + f(ly) + "\" x2=\"" + f(W - R + 40) + "\" y2=\"" + f(ly) +
             "\" stroke=\"" + col + "\" stroke-width=\"2\"/>\n";
        s += "<text x=\"" + f(W - R + 46) + "\" y=\"" + f(ly + 4) + "\" font-family=\"sans-serif\" font-size=\"12\">sigma=" +
             format_double(sigma) + "</text>\n";
        ++k;
    }
    s += "</svg>\n";
    return s;
}

}  // namespace got
