// got: command-line driver for smoothed-W1 estimation and experiments.
//
// Every option takes a value; list values are comma separated. A --config
// file supplies defaults (top level plus a [command] section), flags
// override it, and the fully resolved parameter set is written to a JSON
// manifest that `got replay` reruns.

#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "got/got.hpp"

namespace {

using namespace got;

struct Context {
    std::string command;
    Params params;
    std::optional<std::string> out;
    std::size_t jobs = 1;
    std::map<std::string, std::string> outputs;  // filled by the command
};

std::uint64_t default_seed() {
    const char* env = std::getenv("GOT_SEED");
    if (!env || !*env) return 0;
    try {
        return parse_count(env, "GOT_SEED");
    } catch (const SchemaError& e) {
        throw ConfigError(e.what());
    }
}

NoiseFamily read_noise(Params& p) { return parse_noise_family(p.text("noise", "gaussian")); }

std::vector<double> parse_vector(std::string_view s, const std::string& what) {
    std::vector<double> out;
    std::string buf(s);
    for (char& c : buf)
        if (c == ',') c = ' ';
    std::istringstream is(buf);
    is.imbue(std::locale::classic());
    std::string tok;
    while (is >> tok) {
        try {
            out.push_back(parse_double(tok, what));
        } catch (const SchemaError& e) {
            throw ConfigError(e.what());
        }
    }
    if (out.empty()) throw ConfigError(what + ": empty vector");
    return out;
}

SourceSpec read_source(Params& p) {
    const SourceFamily family = parse_source_family(p.text("source"));
    switch (family) {
        case SourceFamily::uniform_cube:
            return SourceSpec::uniform_cube(p.count("d"), p.real("side", 1.0));
        case SourceFamily::isotropic_gaussian:
            return SourceSpec::isotropic_gaussian(p.count("d"), p.real("stddev", 1.0));
        case SourceFamily::gaussian_mixture: {
            const std::size_t d = p.count("d");
            const auto weights = p.reals("weights");
            const auto stddevs = p.reals("stddevs");
            const std::string means = p.text("means");
            std::vector<MixtureComponent> comps;
            std::size_t k = 0;
            for (auto part : split(means, ';')) {
                if (k >= weights.size() || k >= stddevs.size())
                    throw ConfigError("mixture: more means than weights/stddevs");
                auto mean = parse_vector(part, "means");
                if (mean.size() != d) throw ConfigError("mixture: component mean must have d coordinates");
                comps.push_back({weights[k], std::move(mean), stddevs[k]});
                ++k;
            }
            if (k != weights.size() || k != stddevs.size()) throw ConfigError("mixture: weights, stddevs, means differ in length");
            return SourceSpec::gaussian_mixture(std::move(comps));
        }
        case SourceFamily::dirac_pair: {
            const std::size_t d = p.count("d");
            auto x = parse_vector(p.text("x"), "x");
            auto y = parse_vector(p.text("y"), "y");
            if (x.size() != d || y.size() != d) throw ConfigError("dirac-pair: x and y need d coordinates");
            return SourceSpec::dirac_pair(std::move(x), std::move(y));
        }
    }
    throw ConfigError("unknown source");
}

DiscreteMeasure read_measure_file(Params& p, const std::string& key) {
    const std::string path = p.text(key);
    const bool weighted = p.flag("weighted", false);
    return read_measure_csv(read_file(path), weighted, path);
}

/// The pair compared by sigma-sweep and sinkhorn-compare: measure files,
/// or a random pair on [0,1]^d.
std::pair<DiscreteMeasure, DiscreteMeasure> read_pair(Params& p, std::uint64_t seed, std::size_t default_atoms) {
    if (p.has("mu") || p.has("nu")) {
        auto mu = read_measure_file(p, "mu");
        auto nu = read_measure_file(p, "nu");
        if (mu.dim() != nu.dim()) throw ConfigError("mu and nu differ in dimension");
        return {std::move(mu), std::move(nu)};
    }
    const std::size_t d = p.count("d", 2);
    const std::size_t atoms = p.count("atoms", default_atoms);
    const bool mixed = p.flag("mixed-weights", false);
    if (d == 0 || atoms == 0) throw ConfigError("d and atoms must be >= 1");
    return {random_measure(atoms, d, SeedTuple(seed, 0, "pair-mu"), mixed),
            random_measure(atoms, d, SeedTuple(seed, 0, "pair-nu"), mixed)};
}

void write_out(Context& c, const std::string& content) {
    if (!c.out) return;
    atomic_write(*c.out, content);
    c.outputs["out"] = *c.out;
}

std::string rows_csv(const std::vector<ResultRow>& rows) {
    ResultTable t;
    t.rows = rows;
    return to_csv(t);
}

// ---------------------------------------------------------------------------

int cmd_estimate(Context& c) {
    Params& p = c.params;
    const std::uint64_t seed = p.seed("seed", default_seed());
    const std::size_t trials = p.count("trials", 10);
    const double sigma = p.real("sigma");
    const NoiseFamily family = read_noise(p);
    const bool crn = p.flag("crn", true);
    const bool timings = p.flag("timings", false);
    if (!(sigma >= 0.0)) throw ArgumentError("--sigma must be >= 0");

    Estimate est;
    std::size_t d = 0, n = 0;
    std::vector<double> ms;
    auto timed = [&](auto&& fn) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const double ms_total = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        return timings ? ms_total / static_cast<double>(trials) : 0.0;
    };
    double per_trial_ms = 0.0;

    if (p.has("mu") || p.has("nu")) {
        const auto mu = read_measure_file(p, "mu");
        const auto nu = read_measure_file(p, "nu");
        d = mu.dim();
        n = mu.size();
        const std::size_t m = p.count("m", 1000);
        EstimatorOptions opts;
        opts.crn = crn;
        opts.jobs = c.jobs;
        opts.coupling = parse_coupling_mode(p.text("coupling", "plug-in"));
        p.reject_unused();
        const NoiseModel noise(family, sigma, d);
        per_trial_ms = timed([&] { est = estimate_got(mu, nu, noise, m, trials, seed, opts); });
    } else {
        const SourceSpec src = read_source(p);
        d = src.d;
        n = p.count("n");
        const std::size_t m = p.count("m", std::max<std::size_t>(n, 1000));
        const NoiseModel noise(family, sigma, d);
        if (src.family == SourceFamily::dirac_pair) {
            // Distance between the two smoothed Diracs.
            EstimatorOptions opts;
            opts.crn = crn;
            opts.jobs = c.jobs;
            opts.coupling = parse_coupling_mode(p.text("coupling", "plug-in"));
            p.reject_unused();
            per_trial_ms = timed([&] { est = estimate_got(src, src.other_component(), noise, m, trials, seed, opts); });
        } else {
            OneSampleOptions opts;
            opts.crn = crn;
            opts.jobs = c.jobs;
            opts.coupling = parse_coupling_mode(p.text("coupling", "pooled"));
            p.reject_unused();
            per_trial_ms = timed([&] { est = estimate_one_sample(src, noise, n, m, trials, seed, opts); });
        }
    }

    std::cout << std::setprecision(6) << "mean = " << est.mean << " +/- " << est.std_err << "  (trials=" << est.trials
              << ", m=" << est.m << ", sigma=" << est.sigma << ", " << est.bias_note << ")\n";
    std::vector<ResultRow> rows;
    for (std::size_t t = 0; t < est.values.size(); ++t) rows.push_back({d, sigma, n, est.m, t, est.values[t], per_trial_ms});
    write_out(c, rows_csv(rows));
    return 0;
}

int cmd_convergence(Context& c) {
    Params& p = c.params;
    SweepConfig cfg;
    cfg.source = read_source(p);
    cfg.noise = read_noise(p);
    cfg.sigma_grid = p.reals("sigma", {0.0, 1.0, 2.0, 4.0});
    if (p.has("n")) {
        cfg.n_grid = p.counts("n");
    } else {
        cfg.n_grid = geometric_grid(p.count("n-min", 10), p.count("n-max", 3000), p.count("n-points", 8));
    }
    const std::string m_rule = p.text("m", "n");
    if (m_rule != "n") cfg.fixed_m = parse_count(m_rule, "m");
    cfg.trials = p.count("trials", 10);
    cfg.seed = p.seed("seed", default_seed());
    cfg.crn = p.flag("crn", true);
    cfg.coupling = parse_coupling_mode(p.text("coupling", "pooled"));
    RunOptions run;
    run.jobs = c.jobs;
    run.timings = p.flag("timings", false);
    p.reject_unused();
    if (!c.out) throw ArgumentError("convergence needs --out");

    const ResultTable table = run_convergence_sweep(cfg, run);
    write_out(c, to_csv(table));

    std::cout << "rows: " << table.rows.size() << "  config hash: " << std::hex << table.config_hash << std::dec << "\n";
    for (double s : cfg.sigma_grid) {
        try {
            const SlopeFit f = fit_loglog_slope(table, s);
            std::cout << "sigma=" << s << "  slope=" << f.slope << "  r2=" << f.r2
                      << (f.dropped_smallest ? "  (smallest n dropped)" : "") << "\n";
            for (auto n : f.excluded_n) std::cout << "  excluded n=" << n << " (non-positive mean)\n";
        } catch (const ArgumentError& e) {
            std::cout << "sigma=" << s << "  slope unavailable: " << e.what() << "\n";
        }
    }
    for (const auto& v : sigma_monotonicity_violations(table))
        std::cout << "monotonicity: n=" << v.n << " mean(sigma=" << v.sigma_hi << ")=" << v.mean_hi << " > mean(sigma="
                  << v.sigma_lo << ")=" << v.mean_lo << " + " << v.tolerance << "\n";
    for (const auto& f : table.failures) std::cerr << "failed cell: " << f << "\n";
    return table.has_failures() ? 1 : 0;
}

int cmd_sigma_sweep(Context& c) {
    Params& p = c.params;
    const std::uint64_t seed = p.seed("seed", default_seed());
    SigmaSweepConfig cfg;
    cfg.seed = seed;
    cfg.noise = read_noise(p);
    cfg.sigma_grid = p.reals("sigma", {0.0, 0.5, 1.0, 2.0});
    cfg.m = p.count("m", 500);
    cfg.trials = p.count("trials", 10);
    cfg.crn = p.flag("crn", true);
    MeasureInput mu, nu;
    if (p.has("source")) {
        const SourceSpec src = read_source(p);
        if (src.family != SourceFamily::dirac_pair) throw ConfigError("sigma-sweep --source supports dirac-pair only");
        mu = src;
        nu = src.other_component();
    } else {
        auto pair = read_pair(p, seed, 10);
        mu = std::move(pair.first);
        nu = std::move(pair.second);
    }
    p.reject_unused();
    if (cfg.m == 0 || cfg.trials < 2) throw ConfigError("m must be >= 1 and trials >= 2");

    BiasCalibrator calibrator;
    const auto rep = run_sigma_sweep(mu, nu, cfg, calibrator, c.jobs);
    const std::size_t d = detail::input_dim(mu);
    std::vector<ResultRow> rows;
    for (const auto& e : rep.estimates) {
        std::cout << "sigma=" << e.sigma << "  mean=" << e.mean << " +/- " << e.std_err << "\n";
        for (std::size_t t = 0; t < e.values.size(); ++t) rows.push_back({d, e.sigma, cfg.m, cfg.m, t, e.values[t], 0.0});
    }
    for (const auto& ch : rep.checks)
        std::cout << "pair (" << ch.sigma1 << ", " << ch.sigma2 << "): monotone " << (ch.monotone_ok ? "ok" : "VIOLATED")
                  << ", stability " << (ch.stability_ok ? "ok" : "VIOLATED") << "  (tol " << ch.tolerance << ")\n";
    std::cout << "violations: " << rep.violations() << "\n";
    write_out(c, rows_csv(rows));
    return 0;
}

int cmd_axioms(Context& c) {
    Params& p = c.params;
    AxiomConfig cfg;
    cfg.seed = p.seed("seed", default_seed());
    cfg.d = p.count("d", 3);
    cfg.sigma = p.real("sigma", 1.0);
    cfg.noise = read_noise(p);
    cfg.triples = p.count("triples", 20);
    cfg.atoms = p.count("atoms", 10);
    cfg.m = p.count("m", 300);
    cfg.m_small = p.count("m-small", 50);
    cfg.trials = p.count("trials", 10);
    p.reject_unused();

    BiasCalibrator calibrator;
    const auto rep = run_metric_axioms(cfg, calibrator, c.jobs);
    std::string csv = "triple,check,ok,lhs,rhs\n";
    for (const auto& e : rep.entries) {
        csv += std::to_string(e.triple) + ',' + e.check + ',' + (e.ok ? "1" : "0") + ',' + format_double(e.lhs) + ',' +
               format_double(e.rhs) + '\n';
        if (!e.ok) std::cout << "violation: triple " << e.triple << " " << e.check << " (" << e.lhs << " vs " << e.rhs << ")\n";
    }
    std::cout << "checks: " << rep.entries.size() << "  violations: " << rep.violations() << "\n";
    write_out(c, csv);
    return 0;
}

int cmd_bounds(Context& c) {
    Params& p = c.params;
    const double sigma = p.real("sigma");
    const std::size_t d = p.count("d");
    const double K = p.real("k", 0.0);
    const std::size_t n = p.count("n", 1000);
    const NoiseFamily family = read_noise(p);
    const double c1 = p.real("c1", default_c1(NoiseModel(family, sigma > 0 ? sigma : 1.0, d)));
    const double sigma1 = p.real("sigma1", 0.0);
    const double diam = p.real("diam", 0.0);  // 0: skip the concentration bound
    const double level = p.real("level", 0.1);
    p.reject_unused();

    std::vector<BoundReport> reports;
    if (sigma > 0.0) {
        reports.push_back(report_rate(sigma, d, K, c1, n));
        reports.push_back(report_delta(sigma));
        reports.push_back(report_stability(sigma1, sigma, d));
    }
    if (diam > 0.0) reports.push_back(report_concentration(diam, n, concentration_deviation(diam, n, level)));
    if (reports.empty()) throw ArgumentError("nothing to report: need --sigma > 0 or --diam > 0");

    std::string csv = "name,inputs,value\n";
    for (const auto& r : reports) {
        std::string inputs;
        for (const auto& [k, v] : r.inputs) inputs += (inputs.empty() ? "" : ";") + k + "=" + format_double(v);
        std::cout << std::left << std::setw(22) << r.name << std::setw(48) << inputs << std::setprecision(10) << r.value
                  << "\n";
        csv += r.name + ',' + inputs + ',' + format_double(r.value) + '\n';
    }
    write_out(c, csv);
    return 0;
}

int cmd_sinkhorn_compare(Context& c) {
    Params& p = c.params;
    const std::uint64_t seed = p.seed("seed", default_seed());
    auto [mu, nu] = read_pair(p, seed, 20);
    // absolute --epsilon values take precedence over fractions of the median cost
    const bool absolute = p.has("epsilon");
    const std::vector<double> eps_list =
        absolute ? p.reals("epsilon") : p.reals("epsilon-relative", {1.0, 0.1, 0.01, 0.001});
    const long long max_iter = static_cast<long long>(p.count("max-iter", 100000));
    const double tol = p.real("tol", 1e-9);
    p.reject_unused();

    const double exact = solve_transport(mu, nu).cost;
    const double med = median_pairwise_cost(mu, nu);
    std::cout << std::setprecision(10) << "exact W1 = " << exact << "  median cost = " << med << "\n";
    std::string csv = "epsilon,value,transport_cost,kl,iterations,exact_w1\n";
    SinkhornOptions opts;
    opts.max_iter = max_iter;
    opts.tol = tol;
    for (double e : eps_list) {
        const double eps = absolute ? e : e * med;
        const auto s = sinkhorn_solve(mu, nu, eps, opts);
        std::cout << "eps=" << eps << "  S=" << s.value << "  <c,pi>=" << s.transport_cost << "  KL=" << s.kl
                  << "  iters=" << s.iterations << "\n";
        csv += format_double(eps) + ',' + format_double(s.value) + ',' + format_double(s.transport_cost) + ',' +
               format_double(s.kl) + ',' + std::to_string(s.iterations) + ',' + format_double(exact) + '\n';
    }
    write_out(c, csv);
    return 0;
}

int cmd_plot(Context& c) {
    Params& p = c.params;
    const std::string in = p.text("in");
    const std::string title = p.text("title", "smoothed W1 convergence");
    p.reject_unused();
    if (!c.out) throw ArgumentError("plot needs --out");
    const ResultTable table = parse_csv(read_file(in));
    write_out(c, render_svg(table, title));
    return 0;
}

using Runner = int (*)(Context&);

struct CommandSpec {
    const char* name;
    const char* help;
    std::vector<const char*> options;
    Runner run;
};

const std::vector<CommandSpec>& commands() {
    static const std::vector<CommandSpec> specs = {
        {"estimate", "estimate a smoothed W1 quantity",
         {"source", "d", "sigma", "n", "m", "noise", "trials", "seed", "side", "stddev", "x", "y", "weights", "stddevs",
          "means", "mu", "nu", "weighted", "coupling", "crn", "timings"},
         cmd_estimate},
        {"convergence", "one-sample convergence sweep over (sigma, n)",
         {"source", "d", "side", "stddev", "x", "y", "weights", "stddevs", "means", "noise", "sigma", "n", "n-min",
          "n-max", "n-points", "m", "trials", "seed", "crn", "coupling", "timings"},
         cmd_convergence},
        {"sigma-sweep", "estimates across sigma for a fixed pair, with stability checks",
         {"source", "d", "x", "y", "mu", "nu", "weighted", "atoms", "mixed-weights", "noise", "sigma", "m", "trials",
          "seed", "crn"},
         cmd_sigma_sweep},
        {"axioms", "statistical metric-axiom checks on random triples",
         {"d", "sigma", "noise", "triples", "atoms", "m", "m-small", "trials", "seed"},
         cmd_axioms},
        {"bounds", "evaluate the closed-form bounds",
         {"sigma", "d", "k", "n", "noise", "c1", "sigma1", "diam", "level"},
         cmd_bounds},
        {"sinkhorn-compare", "entropic values against exact W1",
         {"mu", "nu", "weighted", "d", "atoms", "mixed-weights", "epsilon", "epsilon-relative", "max-iter", "tol", "seed"},
         cmd_sinkhorn_compare},
        {"plot", "render a result CSV as a log-log SVG", {"in", "title"}, cmd_plot},
    };
    return specs;
}

const CommandSpec& find_command(const std::string& name) {
    for (const auto& s : commands())
        if (name == s.name) return s;
    throw SchemaError("unknown command '" + name + "'");
}

/// Runs a command and writes its manifest next to the output (or to an
/// explicit manifest path).
int execute(const CommandSpec& spec, Context& c, const std::optional<std::string>& manifest_path) {
    RunManifest m;
    m.command = spec.name;
    m.started = utc_timestamp();
    const int rc = spec.run(c);
    m.finished = utc_timestamp();
    m.config = c.params.resolved();
    if (auto it = m.config.find("seed"); it != m.config.end()) m.seed = std::stoull(it->second);
    m.outputs = c.outputs;
    std::optional<std::string> path = manifest_path;
    if (!path && c.out) path = *c.out + ".manifest.json";
    if (path) write_manifest(*path, m);
    return rc;
}

int report_error(const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (const auto* ge = dynamic_cast<const Error*>(&e)) return is_usage_error(*ge) ? 2 : 1;
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"smoothed 1-Wasserstein estimation and experiments"};
    app.require_subcommand(1);

    struct Bound {
        const CommandSpec* spec;
        CLI::App* sub;
        std::map<std::string, std::string> values;
        std::string config, out, manifest;
        std::size_t jobs = 1;
    };
    std::vector<std::unique_ptr<Bound>> bound;
    for (const auto& spec : commands()) {
        auto b = std::make_unique<Bound>();
        b->spec = &spec;
        b->sub = app.add_subcommand(spec.name, spec.help);
        for (const char* opt : spec.options) b->sub->add_option(std::string("--") + opt, b->values[opt]);
        b->sub->add_option("--config", b->config, "config file (flags override it)");
        b->sub->add_option("--out", b->out, "output file");
        b->sub->add_option("--manifest", b->manifest, "manifest path (default <out>.manifest.json)");
        b->sub->add_option("--jobs", b->jobs, "concurrent trials")->check(CLI::PositiveNumber);
        bound.push_back(std::move(b));
    }
    std::string replay_manifest, replay_out;
    std::size_t replay_jobs = 1;
    auto* replay = app.add_subcommand("replay", "rerun a command from its manifest");
    replay->add_option("--manifest", replay_manifest, "manifest to replay")->required();
    replay->add_option("--out", replay_out, "write the output here instead of the recorded path");
    replay->add_option("--jobs", replay_jobs, "concurrent trials")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (replay->parsed()) {
            const RunManifest m = parse_manifest(read_file(replay_manifest));
            const CommandSpec& spec = find_command(m.command);
            Context c;
            c.command = m.command;
            c.params = Params(m.config);
            c.jobs = replay_jobs;
            if (!replay_out.empty()) {
                c.out = replay_out;
            } else if (auto it = m.outputs.find("out"); it != m.outputs.end()) {
                c.out = it->second;
            }
            return execute(spec, c, std::nullopt);
        }
        for (auto& b : bound) {
            if (!b->sub->parsed()) continue;
            KeyValues kv;
            if (!b->config.empty()) kv = parse_config(read_file(b->config)).for_command(b->spec->name);
            for (const char* opt : b->spec->options)
                if (b->sub->count(std::string("--") + opt) > 0) kv[opt] = b->values[opt];
            Context c;
            c.command = b->spec->name;
            c.params = Params(std::move(kv));
            c.jobs = b->jobs;
            if (!b->out.empty()) c.out = b->out;
            return execute(*b->spec, c, b->manifest.empty() ? std::nullopt : std::optional<std::string>(b->manifest));
        }
    } catch (const std::exception& e) {
        return report_error(e);
    }
    return 2;
}
