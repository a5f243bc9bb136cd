#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "got/measures.hpp"
#include "got/ot_exact.hpp"

using namespace got;

namespace {

// Minimum over all n! assignments.
double brute_force_assignment(const PointCloud& a, const PointCloud& b) {
    std::vector<std::size_t> perm(a.size());
    std::iota(perm.begin(), perm.end(), 0);
    double best = INFINITY;
    do {
        double c = 0;
        for (std::size_t i = 0; i < perm.size(); ++i) c += euclidean(a[i], b[perm[i]]);
        best = std::min(best, c);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best / static_cast<double>(a.size());
}

// integral |F - G| on a grid fine enough to hit every breakpoint exactly:
// evaluate the step CDFs between consecutive sorted support points.
double cdf_gap_integral(const std::vector<double>& xa, const std::vector<double>& wa, const std::vector<double>& xb,
                        const std::vector<double>& wb) {
    std::vector<double> pts(xa);
    pts.insert(pts.end(), xb.begin(), xb.end());
    std::sort(pts.begin(), pts.end());
    double total = 0;
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        const double mid = 0.5 * (pts[k] + pts[k + 1]);
        double F = 0, G = 0;
        for (std::size_t i = 0; i < xa.size(); ++i) F += xa[i] <= mid ? wa[i] : 0;
        for (std::size_t j = 0; j < xb.size(); ++j) G += xb[j] <= mid ? wb[j] : 0;
        total += std::abs(F - G) * (pts[k + 1] - pts[k]);
    }
    return total;
}

}  // namespace

TEST(ExactSolver, MatchesBruteForcePermutations) {
    for (std::size_t k = 0; k < 60; ++k) {
        Rng r(SeedTuple(11, k, "inst"));
        const std::size_t n = 2 + r.below(6), d = 1 + r.below(3);
        const auto mu = random_measure(n, d, SeedTuple(11, k, "a"));
        const auto nu = random_measure(n, d, SeedTuple(11, k, "b"));
        EXPECT_NEAR(solve_transport(mu, nu).cost, brute_force_assignment(mu.points(), nu.points()), 1e-9);
    }
}

TEST(ExactSolver, TwoByTwoClosedForm) {
    // The 2x2 transport polytope is a segment in pi_11; the optimum sits at an end.
    for (std::size_t k = 0; k < 50; ++k) {
        Rng r(SeedTuple(12, k, "inst"));
        const double a1 = 0.05 + 0.9 * r.uniform(), b1 = 0.05 + 0.9 * r.uniform();
        const PointCloud pa(2, {r.uniform(), r.uniform(), r.uniform(), r.uniform()});
        const PointCloud pb(2, {r.uniform(), r.uniform(), r.uniform(), r.uniform()});
        const std::vector<double> wa{a1, 1 - a1}, wb{b1, 1 - b1};
        auto cost = [&](double x) {
            return x * euclidean(pa[0], pb[0]) + (a1 - x) * euclidean(pa[0], pb[1]) + (b1 - x) * euclidean(pa[1], pb[0]) +
                   (1 - a1 - b1 + x) * euclidean(pa[1], pb[1]);
        };
        const double lo = std::max(0.0, a1 + b1 - 1), hi = std::min(a1, b1);
        EXPECT_NEAR(solve_transport(pa, wa, pb, wb).cost, std::min(cost(lo), cost(hi)), 1e-12);
    }
}

TEST(ExactSolver, OneDimensionalMixedWeights) {
    for (std::size_t k = 0; k < 80; ++k) {
        Rng r(SeedTuple(13, k, "inst"));
        const auto mu = random_measure(1 + r.below(30), 1, SeedTuple(13, k, "a"), true);
        const auto nu = random_measure(1 + r.below(30), 1, SeedTuple(13, k, "b"), true);
        const double ref = cdf_gap_integral(mu.points().coords(), mu.weights(), nu.points().coords(), nu.weights());
        EXPECT_NEAR(solve_transport(mu, nu).cost, ref, 1e-10);
        EXPECT_NEAR(w1_1d(mu, nu), ref, 1e-12);
    }
}

TEST(ExactSolver, OptimalityCertificateMixedWeights) {
    // An independent check of LP optimality: feasible primal, feasible dual,
    // equal objectives.
    for (std::size_t k = 0; k < 20; ++k) {
        const auto mu = random_measure(35, 3, SeedTuple(14, k, "a"), true);
        const auto nu = random_measure(28, 3, SeedTuple(14, k, "b"), true);
        const auto sol = solve_transport(mu, nu);
        std::vector<double> rows(mu.size(), 0), cols(nu.size(), 0);
        double primal = 0;
        for (const auto& e : sol.coupling) {
            ASSERT_GT(e.mass, 0.0);
            rows[e.i] += e.mass;
            cols[e.j] += e.mass;
            primal += e.mass * euclidean(mu.atom(e.i), nu.atom(e.j));
        }
        for (std::size_t i = 0; i < mu.size(); ++i) EXPECT_NEAR(rows[i], mu.weight(i), 1e-12);
        for (std::size_t j = 0; j < nu.size(); ++j) EXPECT_NEAR(cols[j], nu.weight(j), 1e-12);
        double dual = 0, worst = -INFINITY;
        for (std::size_t i = 0; i < mu.size(); ++i) dual += mu.weight(i) * sol.dual_f[i];
        for (std::size_t j = 0; j < nu.size(); ++j) dual += nu.weight(j) * sol.dual_g[j];
        for (std::size_t i = 0; i < mu.size(); ++i)
            for (std::size_t j = 0; j < nu.size(); ++j)
                worst = std::max(worst, sol.dual_f[i] + sol.dual_g[j] - euclidean(mu.atom(i), nu.atom(j)));
        EXPECT_LE(worst, 1e-12);
        EXPECT_NEAR(primal, dual, 1e-12);
        EXPECT_NEAR(primal, sol.cost, 1e-14);
        EXPECT_TRUE(check_duality(sol, mu, nu).pass);
    }
}

TEST(ExactSolver, ZeroWeightAtomsGetFeasibleDuals) {
    const DiscreteMeasure mu(PointCloud(2, {0, 0, 5, 5, 1, 0}), {0.5, 0.0, 0.5});
    const DiscreteMeasure nu(PointCloud(2, {0, 1, 9, 9, 1, 1}), {0.5, 0.0, 0.5});
    const auto sol = solve_transport(mu, nu);
    EXPECT_NEAR(sol.cost, 1.0, 1e-12);
    for (const auto& e : sol.coupling) {
        EXPECT_NE(e.i, 1u);
        EXPECT_NE(e.j, 1u);
    }
    const auto rep = check_duality(sol, mu, nu);
    EXPECT_TRUE(rep.pass) << (rep.failures.empty() ? "" : rep.failures.front());
}

TEST(ExactSolver, Identities) {
    const auto mu = random_measure(15, 3, SeedTuple(15, 0, "a"), true);
    EXPECT_NEAR(solve_transport(mu, mu).cost, 0.0, 1e-12);
    const std::vector<double> v{0.3, -0.4, 1.2};
    EXPECT_NEAR(solve_transport(mu, mu.translated(v)).cost, norm(v), 1e-12);
    const auto nu = random_measure(11, 3, SeedTuple(15, 0, "b"), true);
    EXPECT_NEAR(solve_transport(mu, nu).cost, solve_transport(nu, mu).cost, 1e-12);
}

TEST(ExactSolver, TriangleInequality) {
    for (std::size_t k = 0; k < 20; ++k) {
        const auto a = random_measure(12, 2, SeedTuple(16, k, "a"), true);
        const auto b = random_measure(9, 2, SeedTuple(16, k, "b"), true);
        const auto c = random_measure(14, 2, SeedTuple(16, k, "c"), true);
        EXPECT_LE(solve_transport(a, c).cost, solve_transport(a, b).cost + solve_transport(b, c).cost + 1e-12);
    }
}

TEST(ExactSolver, DegenerateTiesAndDuplicates) {
    // all points coincide: many optimal bases, cost 0
    const PointCloud p(2, std::vector<double>(40, 0.5));
    const std::vector<double> w(20, 0.05);
    EXPECT_NEAR(solve_transport(p, w, p, w).cost, 0.0, 1e-15);
    // lattice with equal distances everywhere
    const PointCloud a(1, {0, 0, 1, 1}), b(1, {0, 1, 0, 1});
    const std::vector<double> u(4, 0.25);
    EXPECT_NEAR(solve_transport(a, u, b, u).cost, 0.0, 1e-15);
}

TEST(ExactSolver, LargerAssignmentMatchesCertificate) {
    const auto mu = random_measure(400, 2, SeedTuple(17, 0, "a"));
    const auto nu = random_measure(400, 2, SeedTuple(17, 0, "b"));
    const auto sol = solve_transport(mu, nu);
    EXPECT_TRUE(check_duality(sol, mu, nu).pass);
}

TEST(ExactSolver, InputValidation) {
    const PointCloud a(1, {0, 1}), b(2, {0, 0});
    const std::vector<double> w{0.5, 0.5};
    EXPECT_THROW(solve_transport(a, w, b, std::vector<double>{1.0}), ArgumentError);
    EXPECT_THROW(solve_transport(a, w, a, std::vector<double>{0.5}), ArgumentError);
    EXPECT_THROW(solve_transport(a, w, a, std::vector<double>{0.5, 0.6}), ArgumentError);
    EXPECT_THROW(solve_transport(a, w, a, std::vector<double>{1.5, -0.5}), ArgumentError);
    EXPECT_THROW(solve_transport(a, std::vector<double>{0, 0}, a, std::vector<double>{0, 0}), ArgumentError);
    const DiscreteMeasure m2(PointCloud(2, {0, 0}), {1.0});
    EXPECT_THROW(w1_1d(m2, m2), ArgumentError);
}

TEST(ExactSolver, IterationCapRaisesSolverError) {
    const auto mu = random_measure(50, 2, SeedTuple(18, 0, "a"));
    const auto nu = random_measure(50, 2, SeedTuple(18, 0, "b"));
    SolverOptions opts;
    opts.max_iterations = 1;
    EXPECT_THROW(solve_transport(mu, nu, opts), SolverError);
}

TEST(ExactSolver, OnDemandCostsMatchCachedCosts) {
    const auto mu = random_measure(60, 3, SeedTuple(19, 0, "a"), true);
    const auto nu = random_measure(70, 3, SeedTuple(19, 0, "b"), true);
    SolverOptions nocache;
    nocache.cost_cache_limit = 0;
    EXPECT_NEAR(solve_transport(mu, nu).cost, solve_transport(mu, nu, nocache).cost, 1e-12);
}
