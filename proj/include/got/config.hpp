#pragma once

// Flat key/value config files with TOML-style sections:
//
//   seed = 7                 # top level: applies to every command
//   [convergence]
//   sigma = [0, 1, 2, 4]
//   source = "uniform-cube"
//
// Values are kept as canonical strings (arrays become "a,b,c") so config
// files, command-line flags and manifests all share one representation.

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "got/errors.hpp"
#include "got/io.hpp"

namespace got {

using KeyValues = std::map<std::string, std::string>;

struct ConfigFile {
    std::map<std::string, KeyValues> sections;  // "" is the top level

    /// Top-level keys overlaid by the section named after the command.
    KeyValues for_command(const std::string& command) const {
        KeyValues out;
        if (auto it = sections.find(""); it != sections.end()) out = it->second;
        if (auto it = sections.find(command); it != sections.end())
            for (const auto& [k, v] : it->second) out[k] = v;
        return out;
    }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::string unquote(std::string_view v, const std::string& where) {
    v = trim(v);
    if (v.size() >= 2 && v.front() == '"') {
        if (v.back() != '"') throw ConfigError(where + ": unterminated string");
        return std::string(v.substr(1, v.size() - 2));
    }
    if (!v.empty() && v.front() == '"') throw ConfigError(where + ": unterminated string");
    return std::string(v);
}

/// Strips a trailing comment that is not inside quotes.
inline std::string_view strip_comment(std::string_view line) {
    bool quoted = false;
    for (std::size_t k = 0; k < line.size(); ++k) {
        if (line[k] == '"') quoted = !quoted;
        if (line[k] == '#' && !quoted) return line.substr(0, k);
    }
    return line;
}

}  // namespace detail

inline ConfigFile parse_config(std::string_view text) {
    ConfigFile cfg;
    std::string section;
    cfg.sections[section];
    std::size_t line_no = 0, pos = 0;
    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = detail::trim(detail::strip_comment(text.substr(pos, end - pos)));
        pos = end + 1;
        ++line_no;
        const std::string where = "config line " + std::to_string(line_no);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where + ": malformed section header");
            section = std::string(detail::trim(line.substr(1, line.size() - 2)));
            if (section.empty()) throw ConfigError(where + ": empty section name");
            cfg.sections[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError(where + ": expected key = value");
        const std::string key(detail::trim(line.substr(0, eq)));
        std::string_view raw = detail::trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(where + ": empty key");
        if (raw.empty()) throw ConfigError(where + ": missing value for '" + key + "'");
        std::string value;
        if (raw.front() == '[') {
            if (raw.back() != ']') throw ConfigError(where + ": unterminated array");
            const auto inner = detail::trim(raw.substr(1, raw.size() - 2));
            if (!inner.empty()) {
                for (auto item : split(inner, ',')) {
                    if (!value.empty()) value += ',';
                    const auto v = detail::unquote(item, where);
                    if (v.empty()) throw ConfigError(where + ": empty array element");
                    value += v;
                }
            }
        } else {
            value = detail::unquote(raw, where);
        }
        auto& sec = cfg.sections[section];
        if (sec.count(key)) throw ConfigError(where + ": duplicate key '" + key + "'");
        sec[key] = value;
    }
    return cfg;
}

/// Typed access to resolved parameters. Every lookup records the value it
/// resolved to (including defaults), so `resolved()` is a complete
/// description of the run.
class Params {
public:
    Params() = default;
    explicit Params(KeyValues kv) : kv_(std::move(kv)) {}

    bool has(const std::string& key) const { return kv_.count(key) != 0; }

    std::string text(const std::string& key, const std::string& fallback) { return record(key, get_or(key, fallback)); }
    std::string text(const std::string& key) { return record(key, require(key)); }

    double real(const std::string& key, double fallback) {
        return has(key) ? real(key) : (record(key, format_double(fallback)), fallback);
    }
    double real(const std::string& key) {
        const auto v = require(key);
        const double x = to_real(key, v);
        record(key, format_double(x));
        return x;
    }

    std::size_t count(const std::string& key, std::size_t fallback) {
        return has(key) ? count(key) : (record(key, std::to_string(fallback)), fallback);
    }
    std::size_t count(const std::string& key) {
        const auto x = to_count(key, require(key));
        record(key, std::to_string(x));
        return x;
    }

    std::uint64_t seed(const std::string& key, std::uint64_t fallback) { return count(key, fallback); }

    bool flag(const std::string& key, bool fallback) {
        if (!has(key)) {
            record(key, fallback ? "true" : "false");
            return fallback;
        }
        const auto v = require(key);
        bool b;
        if (v == "true" || v == "1" || v == "yes") b = true;
        else if (v == "false" || v == "0" || v == "no") b = false;
        else throw ConfigError("'" + key + "': expected true or false, got '" + v + "'");
        record(key, b ? "true" : "false");
        return b;
    }

    std::vector<double> reals(const std::string& key, const std::vector<double>& fallback) {
        if (!has(key)) {
            record(key, join(fallback));
            return fallback;
        }
        return reals(key);
    }
    std::vector<double> reals(const std::string& key) {
        std::vector<double> out;
        const std::string raw = require(key);  // split returns views into it
        for (auto item : split(raw, ',')) out.push_back(to_real(key, std::string(detail::trim(item))));
        record(key, join(out));
        return out;
    }

    std::vector<std::size_t> counts(const std::string& key) {
        std::vector<std::size_t> out;
        std::string canon;
        const std::string raw = require(key);
        for (auto item : split(raw, ',')) {
            out.push_back(to_count(key, std::string(detail::trim(item))));
            canon += (canon.empty() ? "" : ",") + std::to_string(out.back());
        }
        record(key, canon);
        return out;
    }

    /// Keys supplied but never read: almost always a typo.
    void reject_unused() const {
        for (const auto& [k, v] : kv_)
            if (!resolved_.count(k)) throw ConfigError("unknown parameter '" + k + "'");
    }

    const KeyValues& resolved() const { return resolved_; }

private:
    KeyValues kv_;
    KeyValues resolved_;

    std::string get_or(const std::string& key, const std::string& fallback) const {
        auto it = kv_.find(key);
        return it == kv_.end() ? fallback : it->second;
    }
    std::string require(const std::string& key) const {
        auto it = kv_.find(key);
        if (it == kv_.end()) throw ArgumentError("missing required parameter '" + key + "'");
        return it->second;
    }
    std::string record(const std::string& key, std::string v) {
        resolved_[key] = v;
        return v;
    }
    static double to_real(const std::string& key, const std::string& v) {
        try {
            return parse_double(v, "'" + key + "'");
        } catch (const SchemaError& e) {
            throw ConfigError(e.what());
        }
    }
    static std::size_t to_count(const std::string& key, const std::string& v) {
        try {
            return parse_count(v, "'" + key + "'");
        } catch (const SchemaError& e) {
            throw ConfigError(e.what());
        }
    }
    static std::string join(const std::vector<double>& xs) {
        std::string s;
        for (double x : xs) s += (s.empty() ? "" : ",") + format_double(x);
        return s;
    }
};

}  // namespace got
