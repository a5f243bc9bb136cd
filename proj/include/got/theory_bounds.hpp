#pragma once

// Closed-form bounds on smoothed W1, used as test envelopes and printed
// diagnostics. None of them gate estimation.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>

#include "got/errors.hpp"

namespace got {

struct BoundReport {
    std::string name;
    std::map<std::string, double> inputs;
    double value = 0.0;
};

/// Gap between smoothing levels sigma1 < sigma2: 2 sqrt(d (sigma2^2 - sigma1^2)).
inline double stability_bound(double sigma1, double sigma2, std::size_t d) {
    if (!(sigma1 >= 0.0)) throw ArgumentError("stability_bound: sigma1 must be >= 0");
    if (!(sigma1 < sigma2)) throw ArgumentError("stability_bound: requires sigma1 < sigma2");
    if (d == 0) throw ArgumentError("stability_bound: d must be >= 1");
    // (s2 - s1)(s2 + s1) keeps precision when the two are close.
    return 2.0 * std::sqrt(static_cast<double>(d) * (sigma2 - sigma1) * (sigma2 + sigma1));
}

/// Expected one-sample rate for a K-subgaussian source:
/// c1^d sigma sqrt(2d) (1 + K/sigma)^(d/2 + 1) e^(3d/16) / sqrt(n).
inline double rate_bound(double sigma, std::size_t d, double K, double c1, std::size_t n) {
    if (!(sigma > 0.0)) throw ArgumentError("rate_bound: sigma must be > 0");
    if (d == 0) throw ArgumentError("rate_bound: d must be >= 1");
    if (!(K >= 0.0)) throw ArgumentError("rate_bound: K must be >= 0");
    if (!(c1 >= 1.0)) throw ArgumentError("rate_bound: c1 must be >= 1");
    if (n == 0) throw ArgumentError("rate_bound: n must be >= 1");
    const double dd = static_cast<double>(d);
    return std::pow(c1, dd) * sigma * std::sqrt(2.0 * dd) * std::pow(1.0 + K / sigma, dd / 2.0 + 1.0) *
           std::exp(3.0 * dd / 16.0) / std::sqrt(static_cast<double>(n));
}

struct ConcentrationBound {
    double raw = 0.0;     // 2 exp(-2 t^2 n / diam^2)
    double capped = 0.0;  // min(raw, 1)
};

/// Deviation probability bound on a support of diameter diam.
inline ConcentrationBound concentration_bound(double diam, std::size_t n, double t) {
    if (!(diam > 0.0)) throw ArgumentError("concentration_bound: diam must be > 0");
    if (n == 0) throw ArgumentError("concentration_bound: n must be >= 1");
    if (!(t > 0.0)) throw ArgumentError("concentration_bound: t must be > 0");
    const double raw = 2.0 * std::exp(-2.0 * t * t * static_cast<double>(n) / (diam * diam));
    return {raw, std::min(raw, 1.0)};
}

/// Deviation t at which the raw concentration bound equals `level`.
inline double concentration_deviation(double diam, std::size_t n, double level) {
    if (!(level > 0.0 && level < 2.0)) throw ArgumentError("concentration_deviation: level must be in (0, 2)");
    return diam * std::sqrt(std::log(2.0 / level) / (2.0 * static_cast<double>(n)));
}

inline double delta_param(double sigma) {
    if (!(sigma > 0.0)) throw ArgumentError("delta_param: sigma must be > 0");
    return std::min(1.0, 1.0 / (4.0 * sigma * sigma));
}

/// Allowance for unbounded noise on a bounded support: smoothed points stay
/// within 3 sigma sqrt(d) of the support with high probability.
inline double noise_allowance(double sigma, std::size_t d) { return 3.0 * sigma * std::sqrt(static_cast<double>(d)); }

inline BoundReport report_stability(double sigma1, double sigma2, std::size_t d) {
    return {"stability_bound", {{"sigma1", sigma1}, {"sigma2", sigma2}, {"d", static_cast<double>(d)}},
            stability_bound(sigma1, sigma2, d)};
}

inline BoundReport report_rate(double sigma, std::size_t d, double K, double c1, std::size_t n) {
    return {"rate_bound",
            {{"sigma", sigma}, {"d", static_cast<double>(d)}, {"K", K}, {"c1", c1}, {"n", static_cast<double>(n)}},
            rate_bound(sigma, d, K, c1, n)};
}

inline BoundReport report_concentration(double diam, std::size_t n, double t) {
    return {"concentration_bound", {{"diam", diam}, {"n", static_cast<double>(n)}, {"t", t}},
            concentration_bound(diam, n, t).capped};
}

inline BoundReport report_delta(double sigma) { return {"delta_param", {{"sigma", sigma}}, delta_param(sigma)}; }

}  // namespace got
