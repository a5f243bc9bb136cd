#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "got/errors.hpp"
#include "got/measures.hpp"

namespace got {

/// Dense row-major n x m matrix.
struct DenseMatrix {
    std::size_t rows = 0, cols = 0;
    std::vector<double> data;

    DenseMatrix() = default;
    DenseMatrix(std::size_t r, std::size_t c, double v = 0.0) : rows(r), cols(c), data(r * c, v) {}
    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

inline DenseMatrix cost_matrix(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
    DenseMatrix c(mu.size(), nu.size());
    for (std::size_t i = 0; i < mu.size(); ++i)
        for (std::size_t j = 0; j < nu.size(); ++j) c(i, j) = euclidean(mu.atom(i), nu.atom(j));
    return c;
}

/// Median of all pairwise costs between the atoms of mu and nu.
inline double median_pairwise_cost(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
    auto c = cost_matrix(mu, nu).data;
    const std::size_t mid = c.size() / 2;
    std::nth_element(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(mid), c.end());
    double med = c[mid];
    if (c.size() % 2 == 0) {
        const double lo = *std::max_element(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(mid));
        med = 0.5 * (med + lo);
    }
    return med;
}

/// D(pi || mu x nu) with 0 log 0 = 0; +inf when pi charges a cell where
/// the product measure vanishes.
inline double kl_divergence(const DenseMatrix& pi, const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
    if (pi.rows != mu.size() || pi.cols != nu.size()) throw ArgumentError("kl_divergence: coupling shape mismatch");
    double kl = 0.0;
    for (std::size_t i = 0; i < pi.rows; ++i)
        for (std::size_t j = 0; j < pi.cols; ++j) {
            const double p = pi(i, j);
            if (p <= 0.0) continue;
            const double q = mu.weight(i) * nu.weight(j);
            if (q <= 0.0) return std::numeric_limits<double>::infinity();
            kl += p * std::log(p / q);
        }
    return std::max(kl, 0.0);
}

struct EntropicSolution {
    double value = 0.0;          // <c, pi> + epsilon * KL(pi || mu x nu)
    double transport_cost = 0.0; // <c, pi>
    double kl = 0.0;
    DenseMatrix coupling;
    double epsilon = 0.0;
    long long iterations = 0;
    double marginal_error = 0.0;  // L1, worse of the two marginals
};

struct SinkhornOptions {
    long long max_iter = 100000;
    double tol = 1e-9;
    // Geometric epsilon schedule from the cost scale down to epsilon; the
    // potentials of each stage warm-start the next.
    bool epsilon_scaling = true;
};

/// Log-domain Sinkhorn: alternate exact c-transform-like updates of the dual
/// potentials f, g, stopping once the worse L1 marginal error <= tol.
inline EntropicSolution sinkhorn_solve(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double epsilon,
                                       const SinkhornOptions& opts = {}) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ArgumentError("sinkhorn_solve: epsilon must be > 0");
    if (mu.dim() != nu.dim()) throw ArgumentError("sinkhorn_solve: dimension mismatch");
    const std::size_t n = mu.size(), m = nu.size();
    const DenseMatrix c = cost_matrix(mu, nu);

    std::vector<double> log_a(n), log_b(m);
    for (std::size_t i = 0; i < n; ++i) log_a[i] = mu.weight(i) > 0 ? std::log(mu.weight(i)) : -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < m; ++j) log_b[j] = nu.weight(j) > 0 ? std::log(nu.weight(j)) : -std::numeric_limits<double>::infinity();

    std::vector<double> f(n, 0.0), g(m, 0.0), buf(std::max(n, m));
    auto lse = [&](std::size_t len) {
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < len; ++k) mx = std::max(mx, buf[k]);
        if (!std::isfinite(mx)) return mx;
        double s = 0.0;
        for (std::size_t k = 0; k < len; ++k) s += std::exp(buf[k] - mx);
        return mx + std::log(s);
    };
    auto update_f = [&](double eps) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < m; ++j) buf[j] = (g[j] - c(i, j)) / eps + log_b[j];
            f[i] = -eps * lse(m);
        }
    };
    auto update_g = [&](double eps) {
        for (std::size_t j = 0; j < m; ++j) {
            for (std::size_t i = 0; i < n; ++i) buf[i] = (f[i] - c(i, j)) / eps + log_a[i];
            g[j] = -eps * lse(n);
        }
    };
    // After a g-update the column marginals are exact; measure the rows.
    auto row_error = [&](double eps) {
        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (mu.weight(i) <= 0.0) continue;
            double r = 0.0;
            for (std::size_t j = 0; j < m; ++j)
                if (nu.weight(j) > 0.0) r += std::exp((f[i] + g[j] - c(i, j)) / eps + log_a[i] + log_b[j]);
            err += std::abs(r - mu.weight(i));
        }
        return err;
    };

    long long iters = 0;
    double err = std::numeric_limits<double>::infinity();
    if (opts.epsilon_scaling) {
        double cmax = 0.0;
        for (double v : c.data) cmax = std::max(cmax, v);
        for (double eps = cmax; eps > epsilon && iters < opts.max_iter; eps = std::max(epsilon, eps * 0.5)) {
            for (int k = 0; k < 20 && iters < opts.max_iter; ++k, ++iters) {
                update_f(eps);
                update_g(eps);
            }
        }
    }
    while (iters < opts.max_iter) {
        update_f(epsilon);
        update_g(epsilon);
        ++iters;
        if (iters % 10 == 0 || iters < 10) {
            err = row_error(epsilon);
            if (!std::isfinite(err)) break;
            if (err <= opts.tol) break;
        }
    }
    err = row_error(epsilon);
    if (!(err <= opts.tol))
    {
        char msg[128];
        std::snprintf(msg, sizeof msg, "sinkhorn: marginal error %.3g after %lld iterations (tol %.3g)", err, iters,
                      opts.tol);
        throw ConvergenceError(msg, err, iters);
    }

    EntropicSolution sol;
    sol.epsilon = epsilon;
    sol.iterations = iters;
    sol.coupling = DenseMatrix(n, m);
    std::vector<double> rows(n, 0.0), cols(m, 0.0);
    double cost = 0.0, kl = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            if (mu.weight(i) <= 0.0 || nu.weight(j) <= 0.0) continue;
            const double log_ratio = (f[i] + g[j] - c(i, j)) / epsilon;
            const double p = std::exp(log_ratio + log_a[i] + log_b[j]);
            sol.coupling(i, j) = p;
            rows[i] += p;
            cols[j] += p;
            cost += p * c(i, j);
            kl += p * log_ratio;
        }
    double row_err = 0.0, col_err = 0.0;
    for (std::size_t i = 0; i < n; ++i) row_err += std::abs(rows[i] - mu.weight(i));
    for (std::size_t j = 0; j < m; ++j) col_err += std::abs(cols[j] - nu.weight(j));
    sol.marginal_error = std::max(row_err, col_err);
    sol.transport_cost = cost;
    sol.kl = std::max(kl, 0.0);
    sol.value = cost + epsilon * sol.kl;
    return sol;
}

}  // namespace got
