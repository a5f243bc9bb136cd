#pragma once

// Monte Carlo estimation of smoothed 1-Wasserstein quantities
// W1(mu * G_sigma, nu * G_sigma).
//
// Each trial draws an m-point cloud from each smoothed measure (atom or
// source draw plus independent noise) and solves the discrete problem
// exactly. Two ways of turning the clouds into a number:
//
//  * plug-in: exact W1 between the two uniform clouds. Its expectation lies
//    in [W1^s, W1^s + (sd_P + sd_Q)/2] where sd is the expected self-distance
//    of a smoothed measure at the same m (joint convexity of W1 plus the
//    triangle inequality), which is what the calibrated bias allowance covers.
//  * pooled: both smoothed measures are represented on the pooled support
//    A u B with balance-heuristic weights p/(p+q) and q/(p+q), using the
//    closed-form densities; only the weight difference is transported. Its
//    discretization error scales with W1^s itself, which keeps the n^{-1/2}
//    behaviour of the one-sample quantity visible at m = n.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <map>
#include <mutex>
#include <numeric>
#include <string>
#include <tuple>
#include <utility>
#include <variant>
#include <vector>

#include "got/errors.hpp"
#include "got/measures.hpp"
#include "got/noise.hpp"
#include "got/ot_exact.hpp"
#include "got/parallel.hpp"
#include "got/rng.hpp"
#include "got/smoothing.hpp"

namespace got {

using MeasureInput = std::variant<SourceSpec, DiscreteMeasure>;

enum class CouplingMode { plug_in, pooled };

inline std::string_view to_string(CouplingMode c) { return c == CouplingMode::plug_in ? "plug-in" : "pooled"; }

inline CouplingMode parse_coupling_mode(std::string_view s) {
    if (s == "plug-in") return CouplingMode::plug_in;
    if (s == "pooled") return CouplingMode::pooled;
    throw ConfigError("unknown coupling mode '" + std::string(s) + "' (expected plug-in or pooled)");
}

struct Estimate {
    double mean = 0.0;
    double std_err = 0.0;
    std::size_t trials = 0;
    std::size_t m = 0;
    double sigma = 0.0;
    std::string bias_note;
    std::vector<double> values;  // one per trial, in trial order
};

struct EstimatorOptions {
    bool crn = true;            // standard draws independent of sigma (shared across a sigma sweep)
    CouplingMode coupling = CouplingMode::plug_in;
    bool mirror_seeds = false;  // swap the role tags of the two inputs
    std::size_t jobs = 1;
};

inline double pooled_std_err(std::initializer_list<double> ses) {
    double s = 0.0;
    for (double v : ses) s += v * v;
    return std::sqrt(s);
}

/// Mean and std_err = sample standard deviation / sqrt(trials).
inline Estimate aggregate(std::vector<double> values, std::size_t m, double sigma, std::string note) {
    if (values.empty()) throw ArgumentError("aggregate: no trials");
    Estimate e;
    e.trials = values.size();
    e.m = m;
    e.sigma = sigma;
    e.bias_note = std::move(note);
    const double t = static_cast<double>(values.size());
    e.mean = std::accumulate(values.begin(), values.end(), 0.0) / t;
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - e.mean) * (v - e.mean);
        e.std_err = std::sqrt(ss / (t - 1.0)) / std::sqrt(t);
    }
    e.values = std::move(values);
    return e;
}

namespace detail {

inline std::size_t input_dim(const MeasureInput& in) {
    return std::visit([](const auto& x) -> std::size_t {
        if constexpr (std::is_same_v<std::decay_t<decltype(x)>, SourceSpec>)
            return x.d;
        else
            return x.dim();
    }, in);
}

inline std::uint64_t sigma_bits(double sigma) {
    std::uint64_t b;
    std::memcpy(&b, &sigma, sizeof b);
    return b;
}

/// A cloud drawn from one smoothed input, with the atom index behind each
/// point (SIZE_MAX for continuous sources).
struct Cloud {
    PointCloud points;
    std::vector<std::size_t> atom;
};

inline Cloud draw_atoms(const MeasureInput& in, std::size_t m, const SeedTuple& seed) {
    if (const auto* spec = std::get_if<SourceSpec>(&in))
        return {sample_source(*spec, m, seed), std::vector<std::size_t>(m, SIZE_MAX)};
    auto [pts, idx] = resample_atoms(std::get<DiscreteMeasure>(in), m, seed);
    return {std::move(pts), std::move(idx)};
}

inline void add_noise(PointCloud& pts, const NoiseModel& noise, const SeedTuple& seed) {
    if (!(noise.sigma > 0.0)) return;
    const PointCloud z = sample_standard_noise(noise, pts.size(), seed);
    auto& c = pts.coords();
    for (std::size_t k = 0; k < c.size(); ++k) c[k] += noise.sigma * z.coords()[k];
}

inline std::vector<double> log_density_at(const MeasureInput& in, const NoiseModel& noise, const PointCloud& zs) {
    if (const auto* spec = std::get_if<SourceSpec>(&in)) return log_smoothed_density(*spec, noise, zs);
    return log_smoothed_density(std::get<DiscreteMeasure>(in), noise, zs);
}

inline double uniform_cloud_w1(const PointCloud& a, const PointCloud& b) {
    const std::vector<double> wa(a.size(), 1.0 / static_cast<double>(a.size()));
    const std::vector<double> wb(b.size(), 1.0 / static_cast<double>(b.size()));
    return w1_distance(a, wa, b, wb);
}

/// Pooled-support estimate given both clouds and both log-densities on A u B.
inline double pooled_w1(const PointCloud& a, const PointCloud& b, const std::vector<double>& log_p,
                        const std::vector<double>& log_q) {
    const std::size_t total = a.size() + b.size();
    PointCloud z = PointCloud::zeros(a.dim(), total);
    std::copy(a.coords().begin(), a.coords().end(), z.coords().begin());
    std::copy(b.coords().begin(), b.coords().end(), z.coords().begin() + static_cast<std::ptrdiff_t>(a.coords().size()));

    std::vector<double> wp(total), wq(total);
    double sp = 0.0, sq = 0.0;
    for (std::size_t k = 0; k < total; ++k) {
        const double mx = std::max(log_p[k], log_q[k]);
        const double den = mx + std::log(std::exp(log_p[k] - mx) + std::exp(log_q[k] - mx));
        wp[k] = std::exp(log_p[k] - den);
        wq[k] = std::exp(log_q[k] - den);
        sp += wp[k];
        sq += wq[k];
    }
    PointCloud pos, neg;
    std::vector<double> wpos, wneg;
    double mass_pos = 0.0, mass_neg = 0.0;
    for (std::size_t k = 0; k < total; ++k) {
        const double diff = wp[k] / sp - wq[k] / sq;
        if (diff > 0.0) {
            pos.push_back(z[k]);
            wpos.push_back(diff);
            mass_pos += diff;
        } else if (diff < 0.0) {
            neg.push_back(z[k]);
            wneg.push_back(-diff);
            mass_neg += -diff;
        }
    }
    if (pos.empty() || neg.empty() || mass_pos <= 1e-15) return 0.0;
    for (double& w : wpos) w /= mass_pos;
    for (double& w : wneg) w /= mass_neg;
    const double mass = 0.5 * (mass_pos + mass_neg);
    return mass * w1_distance(pos, wpos, neg, wneg);
}

struct RoleTags {
    const char* first_atoms = "first-atoms";
    const char* first_noise = "first-noise";
    const char* second_atoms = "second-atoms";
    const char* second_noise = "second-noise";
};

inline SeedTuple role_seed(std::uint64_t seed, std::size_t trial, const char* tag, const EstimatorOptions& opts,
                           double sigma) {
    SeedTuple s(seed, trial, tag);
    return opts.crn ? s : s.mixed(sigma_bits(sigma));
}

}  // namespace detail

struct TrialDraw {
    double value = 0.0;
    detail::Cloud a, b;
};

/// One trial of the two-measure estimator, keeping the clouds.
inline TrialDraw got_trial(const MeasureInput& mu, const MeasureInput& nu, const NoiseModel& noise, std::size_t m,
                           std::uint64_t seed, std::size_t trial, const EstimatorOptions& opts) {
    const bool swap = opts.mirror_seeds;
    const char* a_atoms = swap ? "second-atoms" : "first-atoms";
    const char* a_noise = swap ? "second-noise" : "first-noise";
    const char* b_atoms = swap ? "first-atoms" : "second-atoms";
    const char* b_noise = swap ? "first-noise" : "second-noise";

    TrialDraw t;
    t.a = detail::draw_atoms(mu, m, detail::role_seed(seed, trial, a_atoms, opts, noise.sigma));
    t.b = detail::draw_atoms(nu, m, detail::role_seed(seed, trial, b_atoms, opts, noise.sigma));
    detail::add_noise(t.a.points, noise, detail::role_seed(seed, trial, a_noise, opts, noise.sigma));
    detail::add_noise(t.b.points, noise, detail::role_seed(seed, trial, b_noise, opts, noise.sigma));
    if (opts.coupling == CouplingMode::pooled && noise.sigma > 0.0) {
        const std::size_t total = 2 * m;
        PointCloud z = PointCloud::zeros(noise.d, total);
        std::copy(t.a.points.coords().begin(), t.a.points.coords().end(), z.coords().begin());
        std::copy(t.b.points.coords().begin(), t.b.points.coords().end(),
                  z.coords().begin() + static_cast<std::ptrdiff_t>(t.a.points.coords().size()));
        t.value = detail::pooled_w1(t.a.points, t.b.points, detail::log_density_at(mu, noise, z),
                                    detail::log_density_at(nu, noise, z));
    } else {
        t.value = detail::uniform_cloud_w1(t.a.points, t.b.points);
    }
    return t;
}

/// Estimate of W1(mu * G_sigma, nu * G_sigma). sigma = 0 with two discrete
/// measures is the exact discrete W1 (every trial identical).
inline Estimate estimate_got(const MeasureInput& mu, const MeasureInput& nu, const NoiseModel& noise, std::size_t m,
                             std::size_t trials, std::uint64_t seed, const EstimatorOptions& opts = {}) {
    if (!(noise.sigma >= 0.0)) throw ArgumentError("estimate_got: sigma must be >= 0");
    if (m == 0) throw ArgumentError("estimate_got: m must be >= 1");
    if (trials == 0) throw ArgumentError("estimate_got: trials must be >= 1");
    const std::size_t d = detail::input_dim(mu);
    if (detail::input_dim(nu) != d || noise.d != d) throw ArgumentError("estimate_got: dimension mismatch");

    if (noise.sigma == 0.0 && std::holds_alternative<DiscreteMeasure>(mu) && std::holds_alternative<DiscreteMeasure>(nu)) {
        const auto& a = std::get<DiscreteMeasure>(mu);
        const auto& b = std::get<DiscreteMeasure>(nu);
        const double w = w1_distance(a.points(), a.weights(), b.points(), b.weights());
        return aggregate(std::vector<double>(trials, w), m, 0.0, "exact (sigma = 0)");
    }
    std::vector<double> values(trials);
    parallel_for(trials, opts.jobs, [&](std::size_t t) { values[t] = got_trial(mu, nu, noise, m, seed, t, opts).value; });
    const bool pooled = opts.coupling == CouplingMode::pooled && noise.sigma > 0.0;
    return aggregate(std::move(values), m, noise.sigma, pooled ? "pooled" : "plug-in");
}

struct OneSampleOptions {
    bool crn = true;
    CouplingMode coupling = CouplingMode::pooled;
    std::size_t jobs = 1;
};

/// One trial of the one-sample estimator of W1(mu_hat_n * G, mu * G).
inline double one_sample_trial(const SourceSpec& source, const NoiseModel& noise, std::size_t n, std::size_t m,
                               std::uint64_t seed, std::size_t trial, const OneSampleOptions& opts) {
    EstimatorOptions eo;
    eo.crn = opts.crn;
    auto tag = [&](const char* t) { return detail::role_seed(seed, trial, t, eo, noise.sigma); };
    // Source samples do not depend on sigma even without crn: the sweep
    // compares sigma values on the same empirical measure.
    const DiscreteMeasure emp = make_empirical(sample_source(source, n, SeedTuple(seed, trial, "sample")));
    PointCloud a = resample_atoms(emp, m, SeedTuple(seed, trial, "resample")).first;
    PointCloud b = sample_source(source, m, SeedTuple(seed, trial, "fresh"));
    detail::add_noise(a, noise, tag("noise-a"));
    detail::add_noise(b, noise, tag("noise-b"));
    if (opts.coupling == CouplingMode::pooled && noise.sigma > 0.0) {
        PointCloud z = PointCloud::zeros(noise.d, 2 * m);
        std::copy(a.coords().begin(), a.coords().end(), z.coords().begin());
        std::copy(b.coords().begin(), b.coords().end(), z.coords().begin() + static_cast<std::ptrdiff_t>(a.coords().size()));
        return detail::pooled_w1(a, b, log_smoothed_density(emp, noise, z), log_smoothed_density(source, noise, z));
    }
    return detail::uniform_cloud_w1(a, b);
}

/// Estimate of E W1(mu_hat_n * G_sigma, mu * G_sigma): per trial, mu_hat_n
/// from n source draws, cloud A by resampling m atoms of mu_hat_n plus
/// noise, cloud B from m fresh source draws plus noise.
inline Estimate estimate_one_sample(const SourceSpec& source, const NoiseModel& noise, std::size_t n, std::size_t m,
                                    std::size_t trials, std::uint64_t seed, const OneSampleOptions& opts = {}) {
    if (!(noise.sigma >= 0.0)) throw ArgumentError("estimate_one_sample: sigma must be >= 0");
    if (n == 0) throw ArgumentError("estimate_one_sample: n must be >= 1");
    if (m < n) throw ArgumentError("estimate_one_sample: m must be >= n");
    if (trials == 0) throw ArgumentError("estimate_one_sample: trials must be >= 1");
    if (noise.d != source.d) throw ArgumentError("estimate_one_sample: dimension mismatch");
    std::vector<double> values(trials);
    parallel_for(trials, opts.jobs, [&](std::size_t t) { values[t] = one_sample_trial(source, noise, n, m, seed, t, opts); });
    const bool pooled = opts.coupling == CouplingMode::pooled && noise.sigma > 0.0;
    return aggregate(std::move(values), m, noise.sigma, pooled ? "one-sample pooled" : "one-sample plug-in");
}

/// Cost of a plan between uniform clouds; the plan's marginals must be uniform.
inline double coupling_cost(std::span<const CouplingEntry> plan, const PointCloud& a, const PointCloud& b) {
    if (a.dim() != b.dim()) throw ArgumentError("coupling_cost: dimension mismatch");
    std::vector<double> rows(a.size(), 0.0), cols(b.size(), 0.0);
    double cost = 0.0;
    for (const auto& e : plan) {
        if (e.i >= a.size() || e.j >= b.size()) throw ArgumentError("coupling_cost: plan index out of range");
        if (e.mass < 0.0) throw ArgumentError("coupling_cost: negative plan mass");
        rows[e.i] += e.mass;
        cols[e.j] += e.mass;
        cost += e.mass * euclidean(a[e.i], b[e.j]);
    }
    const double ra = 1.0 / static_cast<double>(a.size()), rb = 1.0 / static_cast<double>(b.size());
    for (double r : rows)
        if (std::abs(r - ra) > 1e-9) throw ArgumentError("coupling_cost: plan row marginal is not uniform");
    for (double c : cols)
        if (std::abs(c - rb) > 1e-9) throw ArgumentError("coupling_cost: plan column marginal is not uniform");
    return cost;
}

/// The optimal plan between two smoothed clouds pushed back onto the atoms
/// of the discrete measures that generated them, evaluated under the
/// unsmoothed cost. Tracks how close sigma-optimal plans are to optimal.
struct InducedPlan {
    double cloud_cost = 0.0;
    double atom_cost = 0.0;
};

inline InducedPlan induced_plan_trial(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const NoiseModel& noise,
                                      std::size_t m, std::uint64_t seed, std::size_t trial, const EstimatorOptions& opts) {
    EstimatorOptions plug = opts;
    plug.coupling = CouplingMode::plug_in;
    const TrialDraw t = got_trial(mu, nu, noise, m, seed, trial, plug);
    const std::vector<double> w(m, 1.0 / static_cast<double>(m));
    const TransportSolution sol = solve_transport(t.a.points, w, t.b.points, w);
    InducedPlan out;
    out.cloud_cost = coupling_cost(sol.coupling, t.a.points, t.b.points);
    for (const auto& e : sol.coupling) out.atom_cost += e.mass * euclidean(mu.atom(t.a.atom[e.i]), nu.atom(t.b.atom[e.j]));
    return out;
}

// ---------------------------------------------------------------------------
// Bias allowance

/// Allowance 2 c_est m^{-1/2} where c_est = sqrt(m) * (mean plug-in self-distance
/// of a reference smoothed measure). Calibrated once per (d, sigma, m, family).
class BiasCalibrator {
public:
    explicit BiasCalibrator(std::size_t trials = 10, std::uint64_t seed = 0x5eedca1bULL) : trials_(trials), seed_(seed) {}

    double c_est(const NoiseModel& noise, std::size_t m) {
        if (noise.sigma == 0.0) return 0.0;
        const auto key = std::make_tuple(noise.d, noise.sigma, m, static_cast<int>(noise.family));
        {
            std::lock_guard lock(mu_);
            if (auto it = cache_.find(key); it != cache_.end()) return it->second;
        }
        const MeasureInput ref = SourceSpec::uniform_cube(noise.d);
        EstimatorOptions opts;
        opts.coupling = CouplingMode::plug_in;
        const Estimate sd = estimate_got(ref, ref, noise, m, trials_, seed_, opts);
        const double c = sd.mean * std::sqrt(static_cast<double>(m));
        std::lock_guard lock(mu_);
        cache_[key] = c;
        return c;
    }

    double allowance(const NoiseModel& noise, std::size_t m) {
        return 2.0 * c_est(noise, m) / std::sqrt(static_cast<double>(m));
    }

private:
    std::size_t trials_;
    std::uint64_t seed_;
    std::mutex mu_;
    std::map<std::tuple<std::size_t, double, std::size_t, int>, double> cache_;
};

}  // namespace got
