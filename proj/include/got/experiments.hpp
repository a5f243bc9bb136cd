#pragma once

// Batch drivers: one-sample convergence sweeps, sigma sweeps with the
// monotonicity / stability checks, the metric-axiom harness, plan
// convergence, and log-log slope fitting.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "got/errors.hpp"
#include "got/got_estimator.hpp"
#include "got/measures.hpp"
#include "got/noise.hpp"
#include "got/ot_exact.hpp"
#include "got/parallel.hpp"
#include "got/rng.hpp"
#include "got/theory_bounds.hpp"

namespace got {

inline constexpr const char* kArtifactVersion = "0.3.0";

/// count points from lo to hi (inclusive), geometric, rounded to integers
/// and deduplicated.
inline std::vector<std::size_t> geometric_grid(std::size_t lo, std::size_t hi, std::size_t count) {
    if (lo == 0 || hi < lo || count == 0) throw ArgumentError("geometric_grid: need 1 <= lo <= hi and count >= 1");
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < count; ++k) {
        const double f = count == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(count - 1);
        const double v = std::exp(std::log(static_cast<double>(lo)) * (1.0 - f) + std::log(static_cast<double>(hi)) * f);
        const auto n = static_cast<std::size_t>(std::llround(v));
        if (out.empty() || n > out.back()) out.push_back(n);
    }
    return out;
}

struct SweepConfig {
    SourceSpec source = SourceSpec::uniform_cube(5);
    NoiseFamily noise = NoiseFamily::gaussian;
    std::vector<double> sigma_grid{0.0, 1.0, 2.0, 4.0};
    std::vector<std::size_t> n_grid = geometric_grid(10, 3000, 8);
    std::optional<std::size_t> fixed_m;  // empty: m = n
    std::size_t trials = 10;
    std::uint64_t seed = 0;
    bool crn = true;
    CouplingMode coupling = CouplingMode::pooled;

    std::size_t m_for(std::size_t n) const { return fixed_m ? *fixed_m : n; }

    void validate() const {
        source.validate();
        if (sigma_grid.empty()) throw ConfigError("sigma grid must not be empty");
        if (n_grid.empty()) throw ConfigError("n grid must not be empty");
        for (std::size_t k = 0; k < sigma_grid.size(); ++k) {
            if (!(sigma_grid[k] >= 0.0) || !std::isfinite(sigma_grid[k])) throw ConfigError("sigma values must be finite and >= 0");
            if (k > 0 && !(sigma_grid[k] > sigma_grid[k - 1])) throw ConfigError("sigma grid must be strictly increasing");
        }
        for (std::size_t k = 0; k < n_grid.size(); ++k) {
            if (n_grid[k] == 0) throw ConfigError("n values must be >= 1");
            if (k > 0 && !(n_grid[k] > n_grid[k - 1])) throw ConfigError("n grid must be strictly increasing");
        }
        if (trials < 2) throw ConfigError("trials must be >= 2");
        if (fixed_m && *fixed_m < n_grid.back()) throw ConfigError("fixed m must be >= every n");
    }

    /// Canonical text form; hashed into the result table.
    std::string canonical() const {
        std::ostringstream os;
        os.imbue(std::locale::classic());
        os.precision(17);
        os << "source=" << to_string(source.family) << ";d=" << source.d << ";side=" << source.side
           << ";stddev=" << source.stddev << ";noise=" << to_string(noise) << ";sigma=";
        for (double s : sigma_grid) os << s << ',';
        os << ";n=";
        for (auto n : n_grid) os << n << ',';
        os << ";m=" << (fixed_m ? std::to_string(*fixed_m) : "n") << ";trials=" << trials << ";seed=" << seed
           << ";crn=" << crn << ";coupling=" << to_string(coupling);
        for (const auto& c : source.components) {
            os << ";comp=" << c.weight << ':' << c.stddev;
            for (double v : c.mean) os << ':' << v;
        }
        for (double v : source.x) os << ";x=" << v;
        for (double v : source.y) os << ";y=" << v;
        return os.str();
    }
};

struct ResultRow {
    std::size_t d = 0;
    double sigma = 0.0;
    std::size_t n = 0;
    std::size_t m = 0;
    std::size_t trial = 0;
    double estimate = 0.0;  // NaN marks a failed cell
    double elapsed_ms = 0.0;

    bool failed() const { return std::isnan(estimate); }
    bool operator==(const ResultRow& o) const {
        return d == o.d && sigma == o.sigma && n == o.n && m == o.m && trial == o.trial &&
               (estimate == o.estimate || (failed() && o.failed())) && elapsed_ms == o.elapsed_ms;
    }
};

struct ResultTable {
    std::vector<ResultRow> rows;
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;
    std::string version = kArtifactVersion;
    std::vector<std::string> failures;  // one diagnostic per failed cell

    bool has_failures() const {
        return std::any_of(rows.begin(), rows.end(), [](const ResultRow& r) { return r.failed(); });
    }
};

struct RunOptions {
    std::size_t jobs = 1;
    bool timings = false;  // real elapsed_ms; off keeps tables bitwise reproducible
};

/// Seed of one n column. Shared across sigma so crn couples the curves.
inline std::uint64_t cell_seed(std::uint64_t seed, std::size_t n) { return splitmix64(seed ^ splitmix64(n)); }

/// One row per (sigma, n, trial), ordered by that key. A trial that throws
/// fails its whole cell.
inline ResultTable run_convergence_sweep(const SweepConfig& cfg, const RunOptions& run = {}) {
    cfg.validate();
    struct Item {
        std::size_t si, ni, t;
    };
    std::vector<Item> items;
    for (std::size_t si = 0; si < cfg.sigma_grid.size(); ++si)
        for (std::size_t ni = 0; ni < cfg.n_grid.size(); ++ni)
            for (std::size_t t = 0; t < cfg.trials; ++t) items.push_back({si, ni, t});
    // Largest solves first keeps the pool busy; results land in fixed slots.
    std::vector<std::size_t> order(items.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return items[a].ni > items[b].ni; });

    ResultTable table;
    table.seed = cfg.seed;
    table.config_hash = fnv1a64(cfg.canonical());
    table.rows.resize(items.size());
    std::vector<std::string> errors(items.size());
    OneSampleOptions opts;
    opts.crn = cfg.crn;
    opts.coupling = cfg.coupling;

    parallel_for(order.size(), run.jobs, [&](std::size_t k) {
        const std::size_t idx = order[k];
        const Item& it = items[idx];
        const double sigma = cfg.sigma_grid[it.si];
        const std::size_t n = cfg.n_grid[it.ni];
        ResultRow& row = table.rows[idx];
        row = {cfg.source.d, sigma, n, cfg.m_for(n), it.t, 0.0, 0.0};
        const auto t0 = std::chrono::steady_clock::now();
        try {
            const NoiseModel noise(cfg.noise, sigma, cfg.source.d);
            row.estimate = one_sample_trial(cfg.source, noise, n, row.m, cell_seed(cfg.seed, n), it.t, opts);
        } catch (const std::exception& e) {
            row.estimate = std::nan("");
            errors[idx] = e.what();
        }
        if (run.timings)
            row.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    });

    const std::size_t per_cell = cfg.trials;
    for (std::size_t c = 0; c < items.size(); c += per_cell) {
        std::string first;
        for (std::size_t k = c; k < c + per_cell; ++k)
            if (!errors[k].empty() && first.empty()) first = errors[k];
        if (first.empty()) continue;
        for (std::size_t k = c; k < c + per_cell; ++k) table.rows[k].estimate = std::nan("");
        std::ostringstream os;
        os.imbue(std::locale::classic());
        os << "sigma=" << table.rows[c].sigma << " n=" << table.rows[c].n << ": " << first;
        table.failures.push_back(os.str());
    }
    return table;
}

struct CellSummary {
    double sigma = 0.0;
    std::size_t n = 0;
    double mean = 0.0;
    double std_err = 0.0;
    std::size_t trials = 0;
};

/// Mean and std_err per (sigma, n), skipping failed rows, sorted by (sigma, n).
inline std::vector<CellSummary> summarize(const ResultTable& table) {
    std::map<std::pair<double, std::size_t>, std::vector<double>> cells;
    for (const auto& r : table.rows)
        if (!r.failed()) cells[{r.sigma, r.n}].push_back(r.estimate);
    std::vector<CellSummary> out;
    for (auto& [key, vals] : cells) {
        const Estimate e = aggregate(vals, 0, key.first, "");
        out.push_back({key.first, key.second, e.mean, e.std_err, e.trials});
    }
    return out;
}

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    std::vector<std::size_t> excluded_n;  // non-positive mean
    bool dropped_smallest = false;
    std::size_t points = 0;
};

/// Least squares on (log x, log y).
inline SlopeFit ols_loglog(const std::vector<double>& xs, const std::vector<double>& ys) {
    const double k = static_cast<double>(xs.size());
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += std::log(xs[i]);
        sy += std::log(ys[i]);
    }
    const double mx = sx / k, my = sy / k;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = std::log(xs[i]) - mx, dy = std::log(ys[i]) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    SlopeFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    f.points = xs.size();
    return f;
}

/// Log-log slope of mean estimate against n for one sigma. Non-positive
/// means are excluded and listed; when r^2 < 0.95 the smallest n is dropped.
inline SlopeFit fit_loglog_slope(const ResultTable& table, double sigma) {
    std::vector<double> xs, ys;
    std::vector<std::size_t> excluded;
    std::size_t distinct = 0;
    for (const auto& c : summarize(table)) {
        if (c.sigma != sigma) continue;
        ++distinct;
        if (c.mean > 0.0) {
            xs.push_back(static_cast<double>(c.n));
            ys.push_back(c.mean);
        } else {
            excluded.push_back(c.n);
        }
    }
    if (distinct < 4) throw ArgumentError("fit_loglog_slope: need >= 4 distinct n values for this sigma");
    if (xs.size() < 2) throw ArgumentError("fit_loglog_slope: fewer than 2 positive means");
    SlopeFit fit = ols_loglog(xs, ys);
    if (fit.r2 < 0.95 && xs.size() >= 4) {
        fit = ols_loglog({xs.begin() + 1, xs.end()}, {ys.begin() + 1, ys.end()});
        fit.dropped_smallest = true;
    }
    fit.excluded_n = std::move(excluded);
    return fit;
}

struct MonotonicityViolation {
    std::size_t n = 0;
    double sigma_lo = 0.0, sigma_hi = 0.0;
    double mean_lo = 0.0, mean_hi = 0.0;
    double tolerance = 0.0;
};

/// Pairs sigma_lo < sigma_hi at the same n where mean(sigma_hi) exceeds
/// mean(sigma_lo) by more than 3 pooled std_err.
inline std::vector<MonotonicityViolation> sigma_monotonicity_violations(const ResultTable& table) {
    std::map<std::size_t, std::vector<CellSummary>> by_n;
    for (const auto& c : summarize(table)) by_n[c.n].push_back(c);
    std::vector<MonotonicityViolation> out;
    for (auto& [n, cells] : by_n)
        for (std::size_t a = 0; a < cells.size(); ++a)
            for (std::size_t b = a + 1; b < cells.size(); ++b) {
                const auto& lo = cells[a];
                const auto& hi = cells[b];
                const double tol = 3.0 * pooled_std_err({lo.std_err, hi.std_err});
                if (hi.mean > lo.mean + tol) out.push_back({n, lo.sigma, hi.sigma, lo.mean, hi.mean, tol});
            }
    return out;
}

// ---------------------------------------------------------------------------
// Sigma sweep on a fixed pair

struct SigmaSweepConfig {
    NoiseFamily noise = NoiseFamily::gaussian;
    std::vector<double> sigma_grid{0.0, 0.5, 1.0, 2.0};
    std::size_t m = 500;
    std::size_t trials = 10;
    std::uint64_t seed = 0;
    bool crn = true;
};

struct SigmaCheck {
    double sigma1 = 0.0, sigma2 = 0.0;
    bool monotone_ok = true;   // est(sigma2) <= est(sigma1) + tol
    bool stability_ok = true;  // est(sigma1) <= est(sigma2) + stability_bound + tol
    double tolerance = 0.0;
};

struct SigmaSweepReport {
    std::vector<Estimate> estimates;  // one per sigma, grid order
    std::vector<SigmaCheck> checks;   // every sigma1 < sigma2 pair
    std::size_t violations() const {
        return static_cast<std::size_t>(std::count_if(checks.begin(), checks.end(), [](const SigmaCheck& c) {
            return !c.monotone_ok || !c.stability_ok;
        }));
    }
};

/// Plug-in estimates of W1^sigma(mu, nu) across a sigma grid with shared
/// draws, and both sides of the stability sandwich for every sigma pair.
/// Tolerance: 3 pooled std_err + the larger calibrated bias allowance.
inline SigmaSweepReport run_sigma_sweep(const MeasureInput& mu, const MeasureInput& nu, const SigmaSweepConfig& cfg,
                                        BiasCalibrator& calibrator, std::size_t jobs = 1) {
    const std::size_t d = detail::input_dim(mu);
    if (cfg.sigma_grid.empty()) throw ConfigError("sigma grid must not be empty");
    for (std::size_t k = 1; k < cfg.sigma_grid.size(); ++k)
        if (!(cfg.sigma_grid[k] > cfg.sigma_grid[k - 1])) throw ConfigError("sigma grid must be strictly increasing");
    EstimatorOptions opts;
    opts.crn = cfg.crn;
    opts.jobs = jobs;
    opts.coupling = CouplingMode::plug_in;
    SigmaSweepReport rep;
    std::vector<double> allow;
    for (double s : cfg.sigma_grid) {
        const NoiseModel noise(cfg.noise, s, d);
        rep.estimates.push_back(estimate_got(mu, nu, noise, cfg.m, cfg.trials, cfg.seed, opts));
        allow.push_back(calibrator.allowance(noise, cfg.m));
    }
    for (std::size_t a = 0; a < cfg.sigma_grid.size(); ++a)
        for (std::size_t b = a + 1; b < cfg.sigma_grid.size(); ++b) {
            const auto& e1 = rep.estimates[a];
            const auto& e2 = rep.estimates[b];
            SigmaCheck c;
            c.sigma1 = cfg.sigma_grid[a];
            c.sigma2 = cfg.sigma_grid[b];
            c.tolerance = 3.0 * pooled_std_err({e1.std_err, e2.std_err}) + std::max(allow[a], allow[b]);
            c.monotone_ok = e2.mean <= e1.mean + c.tolerance;
            c.stability_ok = e1.mean <= e2.mean + stability_bound(c.sigma1, c.sigma2, d) + c.tolerance;
            rep.checks.push_back(c);
        }
    return rep;
}

// ---------------------------------------------------------------------------
// Metric axioms

struct AxiomConfig {
    std::size_t d = 3;
    double sigma = 1.0;
    NoiseFamily noise = NoiseFamily::gaussian;
    std::size_t triples = 20;
    std::size_t atoms = 10;
    std::size_t m = 300;
    std::size_t m_small = 50;  // self-distance is compared at m_small and m
    std::size_t trials = 10;
    std::uint64_t seed = 0;
};

struct AxiomEntry {
    std::size_t triple = 0;
    std::string check;  // "triangle", "symmetry" or "self-distance"
    bool ok = true;
    double lhs = 0.0, rhs = 0.0;
};

struct AxiomReport {
    std::vector<AxiomEntry> entries;
    std::size_t violations() const {
        return static_cast<std::size_t>(
            std::count_if(entries.begin(), entries.end(), [](const AxiomEntry& e) { return !e.ok; }));
    }
};

/// Checks on explicit measures; each estimate uses the seed of its pair slot.
inline AxiomReport check_metric_axioms(const std::vector<std::array<DiscreteMeasure, 3>>& triples, const AxiomConfig& cfg,
                                       BiasCalibrator& calibrator, std::size_t jobs = 1) {
    AxiomReport rep;
    const NoiseModel noise(cfg.noise, cfg.sigma, cfg.d);
    const double allow = calibrator.allowance(noise, cfg.m);
    EstimatorOptions opts;
    opts.jobs = jobs;
    for (std::size_t k = 0; k < triples.size(); ++k) {
        const auto& [a, b, c] = triples[k];
        const std::uint64_t s = splitmix64(cfg.seed ^ splitmix64(k));
        const Estimate ab = estimate_got(a, b, noise, cfg.m, cfg.trials, s + 1, opts);
        const Estimate bc = estimate_got(b, c, noise, cfg.m, cfg.trials, s + 2, opts);
        const Estimate ac = estimate_got(a, c, noise, cfg.m, cfg.trials, s + 3, opts);
        const double tol = 3.0 * pooled_std_err({ab.std_err, bc.std_err, ac.std_err}) + allow;
        rep.entries.push_back({k, "triangle", ac.mean <= ab.mean + bc.mean + tol, ac.mean, ab.mean + bc.mean + tol});

        EstimatorOptions mirrored = opts;
        mirrored.mirror_seeds = true;
        const Estimate ba = estimate_got(b, a, noise, cfg.m, cfg.trials, s + 1, mirrored);
        // Mirrored seeds give the same clouds; only summation order differs.
        bool same = true;
        for (std::size_t t = 0; t < cfg.trials; ++t)
            same = same && std::abs(ba.values[t] - ab.values[t]) <= 1e-12 * std::max(1.0, ab.values[t]);
        rep.entries.push_back({k, "symmetry", same, ba.mean, ab.mean});

        const Estimate self_small = estimate_got(a, a, noise, cfg.m_small, cfg.trials, s + 4, opts);
        const Estimate self_large = estimate_got(a, a, noise, cfg.m, cfg.trials, s + 4, opts);
        const double self_tol = 3.0 * pooled_std_err({self_small.std_err, self_large.std_err});
        rep.entries.push_back({k, "self-distance", self_large.mean <= self_small.mean + self_tol, self_large.mean,
                               self_small.mean + self_tol});
    }
    return rep;
}

/// Random triples of uniform-weight measures on [0,1]^d.
inline AxiomReport run_metric_axioms(const AxiomConfig& cfg, BiasCalibrator& calibrator, std::size_t jobs = 1) {
    if (cfg.d == 0 || cfg.atoms == 0 || cfg.m == 0 || cfg.m_small == 0 || cfg.trials < 2)
        throw ConfigError("axioms: d, atoms, m, m_small must be >= 1 and trials >= 2");
    if (!(cfg.sigma >= 0.0)) throw ConfigError("axioms: sigma must be >= 0");
    if (cfg.m_small >= cfg.m) throw ConfigError("axioms: m_small must be < m");
    std::vector<std::array<DiscreteMeasure, 3>> triples;
    for (std::size_t k = 0; k < cfg.triples; ++k) {
        auto make = [&](const char* tag) { return random_measure(cfg.atoms, cfg.d, SeedTuple(cfg.seed, k, tag)); };
        triples.push_back({make("axiom-a"), make("axiom-b"), make("axiom-c")});
    }
    return check_metric_axioms(triples, cfg, calibrator, jobs);
}

// ---------------------------------------------------------------------------
// Plan convergence as sigma -> 0

struct PlanConvergenceConfig {
    NoiseFamily noise = NoiseFamily::gaussian;
    std::vector<double> sigmas;  // decreasing
    std::size_t m = 500;
    std::size_t trials = 10;
    std::uint64_t seed = 0;
    bool crn = true;
};

struct PlanStep {
    double sigma = 0.0;
    double estimate = 0.0;
    double std_err = 0.0;
    double diff = 0.0;  // estimate - exact W1
    double lower = 0.0, upper = 0.0;
    bool ok = true;
    double induced_atom_cost = 0.0;  // mean cost of the cloud plan pushed back onto the atoms
};

struct PlanConvergenceReport {
    double exact = 0.0;
    std::vector<PlanStep> steps;
    std::size_t violations() const {
        return static_cast<std::size_t>(std::count_if(steps.begin(), steps.end(), [](const PlanStep& s) { return !s.ok; }));
    }
};

/// For each sigma_k: estimate - W1(mu, nu) must lie in
/// [-2 sqrt(d) sigma_k - 3 se, 3 se + bias allowance], since smoothing can
/// only lower W1 and by at most the stability gap.
inline PlanConvergenceReport run_plan_convergence(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                                  const PlanConvergenceConfig& cfg, BiasCalibrator& calibrator,
                                                  std::size_t jobs = 1) {
    if (cfg.noise != NoiseFamily::gaussian) throw ConfigError("plan convergence requires gaussian noise");
    if (!cfg.crn) throw ConfigError("plan convergence requires crn");
    if (cfg.sigmas.empty()) throw ConfigError("plan convergence needs at least one sigma");
    for (std::size_t k = 0; k < cfg.sigmas.size(); ++k) {
        if (!(cfg.sigmas[k] >= 0.0)) throw ConfigError("sigma values must be >= 0");
        if (k > 0 && !(cfg.sigmas[k] < cfg.sigmas[k - 1])) throw ConfigError("sigma sequence must be decreasing");
    }
    const std::size_t d = mu.dim();
    PlanConvergenceReport rep;
    rep.exact = w1_distance(mu.points(), mu.weights(), nu.points(), nu.weights());
    EstimatorOptions opts;
    opts.jobs = jobs;
    for (double s : cfg.sigmas) {
        const NoiseModel noise(cfg.noise, s, d);
        const Estimate e = estimate_got(mu, nu, noise, cfg.m, cfg.trials, cfg.seed, opts);
        PlanStep st;
        st.sigma = s;
        st.estimate = e.mean;
        st.std_err = e.std_err;
        st.diff = e.mean - rep.exact;
        const double allow = calibrator.allowance(noise, cfg.m);
        st.lower = -2.0 * std::sqrt(static_cast<double>(d)) * s - 3.0 * e.std_err;
        st.upper = 3.0 * e.std_err + allow;
        // Tolerance for floating-point roundoff when sigma = 0 is exact.
        st.ok = st.diff >= st.lower - 1e-9 && st.diff <= st.upper + 1e-9;
        if (s > 0.0) {
            std::vector<double> costs(cfg.trials);
            parallel_for(cfg.trials, jobs, [&](std::size_t t) {
                costs[t] = induced_plan_trial(mu, nu, noise, cfg.m, cfg.seed, t, opts).atom_cost;
            });
            st.induced_atom_cost = aggregate(costs, cfg.m, s, "").mean;
        } else {
            st.induced_atom_cost = rep.exact;
        }
        rep.steps.push_back(st);
    }
    return rep;
}

}  // namespace got
