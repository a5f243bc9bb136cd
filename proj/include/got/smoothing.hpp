#pragma once

// Log-densities of smoothed measures mu * G_sigma in closed form. Every
// source family is a mixture of product laws whose coordinates are a point,
// an interval, or a normal; each such coordinate convolved with a gaussian,
// uniform or triangular noise coordinate has an elementary formula.

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "got/measures.hpp"
#include "got/noise.hpp"

namespace got {

namespace detail {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline double safe_log(double v) { return v > 0.0 ? std::log(v) : kNegInf; }

/// log density at z of Unif[lo, hi] * noise coordinate.
inline double log_interval_smoothed(double lo, double hi, const NoiseModel& noise, double z) {
    return safe_log(noise.coord_interval(z - hi, z - lo) / (hi - lo));
}

/// log density at z of N(c, s^2) * noise coordinate.
inline double log_normal_smoothed(double c, double s, const NoiseModel& noise, double z) {
    const double u = z - c;
    const double a = noise.sigma;
    switch (noise.family) {
        case NoiseFamily::gaussian: {
            const double var = s * s + a * a;
            return -0.5 * u * u / var - 0.5 * std::log(2.0 * std::numbers::pi * var);
        }
        case NoiseFamily::uniform:
            return safe_log(special::normal_interval((u - a) / s, (u + a) / s) / (2.0 * a));
        case NoiseFamily::triangular: {
            const double v = special::normal_ramp((u + a) / s) - 2.0 * special::normal_ramp(u / s) +
                             special::normal_ramp((u - a) / s);
            return safe_log(s * v / (a * a));
        }
    }
    return kNegInf;
}

}  // namespace detail

/// log density of source * noise at z (sigma > 0).
inline double log_smoothed_density(const SourceSpec& src, const NoiseModel& noise, std::span<const double> z) {
    if (z.size() != src.d || noise.d != src.d) throw ArgumentError("log_smoothed_density: dimension mismatch");
    if (!(noise.sigma > 0.0)) throw ArgumentError("log_smoothed_density: sigma must be > 0");
    switch (src.family) {
        case SourceFamily::uniform_cube: {
            double s = 0.0;
            for (double v : z) s += detail::log_interval_smoothed(0.0, src.side, noise, v);
            return s;
        }
        case SourceFamily::isotropic_gaussian: {
            double s = 0.0;
            for (double v : z) s += detail::log_normal_smoothed(0.0, src.stddev, noise, v);
            return s;
        }
        case SourceFamily::gaussian_mixture: {
            std::vector<double> terms;
            terms.reserve(src.components.size());
            for (const auto& comp : src.components) {
                double s = std::log(comp.weight);
                for (std::size_t j = 0; j < z.size(); ++j)
                    s += detail::log_normal_smoothed(comp.mean[j], comp.stddev, noise, z[j]);
                terms.push_back(s);
            }
            return special::log_sum_exp(terms);
        }
        case SourceFamily::dirac_pair: {
            const auto& x = src.dirac_location();
            std::vector<double> t(z.begin(), z.end());
            for (std::size_t j = 0; j < t.size(); ++j) t[j] -= x[j];
            return log_density(noise, t);
        }
    }
    return detail::kNegInf;
}

/// log density of (sum_i w_i delta_{x_i}) * noise at every point of zs.
inline std::vector<double> log_smoothed_density(const DiscreteMeasure& mu, const NoiseModel& noise, const PointCloud& zs) {
    if (zs.dim() != mu.dim() || noise.d != mu.dim()) throw ArgumentError("log_smoothed_density: dimension mismatch");
    if (!(noise.sigma > 0.0)) throw ArgumentError("log_smoothed_density: sigma must be > 0");
    const std::size_t n = mu.size(), d = mu.dim();
    std::vector<double> log_w(n);
    for (std::size_t i = 0; i < n; ++i) log_w[i] = detail::safe_log(mu.weight(i));
    std::vector<double> out(zs.size()), terms(n), diff(d);
    const bool gaussian = noise.family == NoiseFamily::gaussian;
    const double inv2var = 0.5 / (noise.sigma * noise.sigma);
    const double gauss_norm = -0.5 * static_cast<double>(d) * std::log(2.0 * std::numbers::pi * noise.sigma * noise.sigma);
    const double* atoms = mu.points().coords().data();
    for (std::size_t r = 0; r < zs.size(); ++r) {
        const auto z = zs[r];
        for (std::size_t i = 0; i < n; ++i) {
            const double* x = atoms + i * d;
            if (gaussian) {
                double s = 0.0;
                for (std::size_t k = 0; k < d; ++k) {
                    const double t = z[k] - x[k];
                    s += t * t;
                }
                terms[i] = log_w[i] - s * inv2var;
            } else {
                for (std::size_t k = 0; k < d; ++k) diff[k] = z[k] - x[k];
                terms[i] = log_w[i] + log_density(noise, diff);
            }
        }
        out[r] = special::log_sum_exp(terms) + (gaussian ? gauss_norm : 0.0);
    }
    return out;
}

inline std::vector<double> log_smoothed_density(const SourceSpec& src, const NoiseModel& noise, const PointCloud& zs) {
    std::vector<double> out(zs.size());
    for (std::size_t r = 0; r < zs.size(); ++r) out[r] = log_smoothed_density(src, noise, zs[r]);
    return out;
}

}  // namespace got
