#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "got/measures.hpp"
#include "got/ot_exact.hpp"
#include "got/sinkhorn.hpp"

using namespace got;

namespace {

// Kernel-space Sinkhorn in long double, fixed 20000 sweeps. Only usable at
// moderate epsilon; serves as a reference for small instances.
DenseMatrix plain_sinkhorn(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double eps) {
    const std::size_t n = mu.size(), m = nu.size();
    std::vector<long double> u(n, 1), v(m, 1), K(n * m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) K[i * m + j] = std::exp(-(long double)euclidean(mu.atom(i), nu.atom(j)) / eps);
    for (int it = 0; it < 20000; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            long double s = 0;
            for (std::size_t j = 0; j < m; ++j) s += K[i * m + j] * nu.weight(j) * v[j];
            u[i] = 1 / s;
        }
        for (std::size_t j = 0; j < m; ++j) {
            long double s = 0;
            for (std::size_t i = 0; i < n; ++i) s += K[i * m + j] * mu.weight(i) * u[i];
            v[j] = 1 / s;
        }
    }
    DenseMatrix p(n, m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j)
            p(i, j) = static_cast<double>(mu.weight(i) * nu.weight(j) * u[i] * K[i * m + j] * v[j]);
    return p;
}

}  // namespace

TEST(Sinkhorn, ThreeByThreeMatchesReference) {
    const DiscreteMeasure mu(PointCloud(2, {0, 0, 1, 0, 0, 2}), {0.2, 0.5, 0.3});
    const DiscreteMeasure nu(PointCloud(2, {1, 1, 2, 0, 0, 1}), {0.4, 0.4, 0.2});
    for (double eps : {0.05, 0.3, 2.0}) {
        const auto sol = sinkhorn_solve(mu, nu, eps);
        const auto ref = plain_sinkhorn(mu, nu, eps);
        const auto c = cost_matrix(mu, nu);
        double ref_cost = 0;
        for (std::size_t k = 0; k < c.data.size(); ++k) ref_cost += ref.data[k] * c.data[k];
        const double ref_value = ref_cost + eps * kl_divergence(ref, mu, nu);
        EXPECT_NEAR(sol.value, ref_value, 1e-9) << "eps=" << eps;
        for (std::size_t k = 0; k < c.data.size(); ++k) EXPECT_NEAR(sol.coupling.data[k], ref.data[k], 1e-9);
    }
}

TEST(Sinkhorn, OptimalityConditions) {
    // Strict convexity: feasibility plus additive separability of
    // eps log(pi / (a b)) + c characterizes the unique minimizer.
    const auto mu = random_measure(6, 2, SeedTuple(21, 0, "a"), true);
    const auto nu = random_measure(5, 2, SeedTuple(21, 0, "b"), true);
    const double eps = 0.1;
    const auto sol = sinkhorn_solve(mu, nu, eps);
    const auto c = cost_matrix(mu, nu);
    auto L = [&](std::size_t i, std::size_t j) {
        return eps * std::log(sol.coupling(i, j) / (mu.weight(i) * nu.weight(j))) + c(i, j);
    };
    for (std::size_t i = 0; i < mu.size(); ++i)
        for (std::size_t j = 0; j < nu.size(); ++j) EXPECT_NEAR(L(i, j) - L(i, 0) - L(0, j) + L(0, 0), 0.0, 1e-9);
    for (std::size_t i = 0; i < mu.size(); ++i) {
        double r = 0;
        for (std::size_t j = 0; j < nu.size(); ++j) r += sol.coupling(i, j);
        EXPECT_NEAR(r, mu.weight(i), 1e-9);
    }
    EXPECT_LE(sol.marginal_error, 1e-9);
}

TEST(Sinkhorn, UpperBoundsExactAndConverges) {
    for (std::size_t k = 0; k < 5; ++k) {
        const auto mu = random_measure(20, 2, SeedTuple(22, k, "a"));
        const auto nu = random_measure(20, 2, SeedTuple(22, k, "b"));
        const double w1 = solve_transport(mu, nu).cost;
        const double med = median_pairwise_cost(mu, nu);
        // Near eps = 0 Sinkhorn converges slowly; an L1 marginal error of
        // 1e-5 moves the value by at most 1e-5 * max cost.
        SinkhornOptions loose;
        loose.tol = 1e-5;
        for (double r : {1.0, 0.1}) EXPECT_GE(sinkhorn_solve(mu, nu, r * med).value, w1 - 1e-9);
        for (double r : {0.01, 0.001}) EXPECT_GE(sinkhorn_solve(mu, nu, r * med, loose).value, w1 - 1e-9);
        EXPECT_LE(std::abs(sinkhorn_solve(mu, nu, 1e-3 * med, loose).value - w1), 1e-2 * med);
    }
}

TEST(Sinkhorn, ValueIncreasesWithEpsilon) {
    for (std::size_t k = 0; k < 20; ++k) {
        const auto mu = random_measure(8, 2, SeedTuple(25, k, "a"), true);
        const auto nu = random_measure(8, 2, SeedTuple(25, k, "b"), true);
        double prev = -INFINITY;
        for (double eps : {0.01, 0.05, 0.2, 1.0, 5.0}) {
            const double v = sinkhorn_solve(mu, nu, eps).value;
            EXPECT_GE(v, prev - 1e-9);
            prev = v;
        }
    }
}

TEST(Sinkhorn, LogDomainStaysFinite) {
    const auto mu = random_measure(100, 3, SeedTuple(26, 0, "a"));
    const auto nu = random_measure(100, 3, SeedTuple(26, 0, "b"));
    double cmax = 0;
    for (double v : cost_matrix(mu, nu).data) cmax = std::max(cmax, v);
    SinkhornOptions opts;
    opts.tol = 1e-4;
    const auto sol = sinkhorn_solve(mu, nu, 1e-4 * cmax, opts);
    EXPECT_TRUE(std::isfinite(sol.value));
    for (double p : sol.coupling.data) ASSERT_TRUE(std::isfinite(p));
    EXPECT_NEAR(sol.value, solve_transport(mu, nu).cost, 1e-2 * cmax);
}

TEST(Sinkhorn, SelfValueIsPositive) {
    const auto mu = random_measure(5, 2, SeedTuple(23, 0, "a"));
    EXPECT_GT(sinkhorn_solve(mu, mu, 1.0).value, 0.0);
}

TEST(Sinkhorn, KlDivergence) {
    const DiscreteMeasure mu(PointCloud(1, {0, 1}), {0.5, 0.5});
    const DiscreteMeasure nu(PointCloud(1, {0, 1}), {1.0, 0.0});
    DenseMatrix prod(2, 2);
    prod(0, 0) = 0.5;
    prod(1, 0) = 0.5;
    EXPECT_NEAR(kl_divergence(prod, mu, nu), 0.0, 1e-15);
    DenseMatrix bad = prod;
    bad(1, 1) = 0.1;
    EXPECT_TRUE(std::isinf(kl_divergence(bad, mu, nu)));
    DenseMatrix diag(2, 2);
    diag(0, 0) = 0.5;
    diag(1, 1) = 0.5;
    EXPECT_NEAR(kl_divergence(diag, mu, mu), std::log(2.0), 1e-15);
}

TEST(Sinkhorn, MedianPairwiseCost) {
    const DiscreteMeasure mu(PointCloud(1, {0, 10}), {0.5, 0.5});
    const DiscreteMeasure nu(PointCloud(1, {1, 4}), {0.5, 0.5});
    // costs {1, 4, 9, 6} -> median (4 + 6) / 2
    EXPECT_DOUBLE_EQ(median_pairwise_cost(mu, nu), 5.0);
}

TEST(Sinkhorn, ErrorsAndNonConvergence) {
    const auto mu = random_measure(10, 2, SeedTuple(24, 0, "a"));
    const auto nu = random_measure(10, 2, SeedTuple(24, 0, "b"));
    EXPECT_THROW(sinkhorn_solve(mu, nu, 0.0), ArgumentError);
    EXPECT_THROW(sinkhorn_solve(mu, nu, -1.0), ArgumentError);
    SinkhornOptions opts;
    opts.max_iter = 2;
    opts.epsilon_scaling = false;
    try {
        sinkhorn_solve(mu, nu, 1e-3, opts);
        FAIL() << "expected ConvergenceError";
    } catch (const ConvergenceError& e) {
        EXPECT_GT(e.last_error(), 1e-9);
        EXPECT_EQ(e.iterations(), 2);
    }
}
