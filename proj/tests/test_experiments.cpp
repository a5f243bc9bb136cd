#include <gtest/gtest.h>

#include <cmath>

#include "got/experiments.hpp"

using namespace got;

namespace {

BiasCalibrator& calibrator() {
    static BiasCalibrator c;
    return c;
}

// Table with exact means c * n^slope for one sigma (two trials each).
ResultTable synthetic(double sigma, const std::vector<std::size_t>& ns, double c, double slope) {
    ResultTable t;
    for (auto n : ns)
        for (std::size_t k = 0; k < 2; ++k)
            t.rows.push_back({2, sigma, n, n, k, c * std::pow(static_cast<double>(n), slope), 0.0});
    return t;
}

SweepConfig small_sweep() {
    SweepConfig cfg;
    cfg.source = SourceSpec::uniform_cube(2);
    cfg.sigma_grid = {0.0, 1.0};
    cfg.n_grid = {5, 10, 20};
    cfg.trials = 3;
    cfg.seed = 4;
    return cfg;
}

DiscreteMeasure point(std::vector<double> x) { return DiscreteMeasure::dirac(x); }

}  // namespace

TEST(Grid, GeometricSpacing) {
    EXPECT_EQ(geometric_grid(10, 1000, 3), (std::vector<std::size_t>{10, 100, 1000}));
    EXPECT_EQ(geometric_grid(10, 3000, 8).front(), 10u);
    EXPECT_EQ(geometric_grid(10, 3000, 8).back(), 3000u);
    EXPECT_EQ(geometric_grid(1, 2, 10), (std::vector<std::size_t>{1, 2}));
    EXPECT_THROW(geometric_grid(0, 5, 3), ArgumentError);
}

TEST(Sweep, Validation) {
    auto cfg = small_sweep();
    EXPECT_NO_THROW(cfg.validate());
    cfg.sigma_grid = {1.0, 0.5};
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = small_sweep();
    cfg.sigma_grid = {-1.0};
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = small_sweep();
    cfg.fixed_m = 10;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = small_sweep();
    cfg.trials = 1;
    EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Sweep, RowsOrderedAndComplete) {
    const auto cfg = small_sweep();
    const auto t = run_convergence_sweep(cfg);
    ASSERT_EQ(t.rows.size(), 2u * 3u * 3u);
    std::size_t k = 0;
    for (double s : cfg.sigma_grid)
        for (auto n : cfg.n_grid)
            for (std::size_t trial = 0; trial < 3; ++trial, ++k) {
                EXPECT_EQ(t.rows[k].sigma, s);
                EXPECT_EQ(t.rows[k].n, n);
                EXPECT_EQ(t.rows[k].m, n);
                EXPECT_EQ(t.rows[k].trial, trial);
                EXPECT_EQ(t.rows[k].d, 2u);
                EXPECT_GE(t.rows[k].estimate, 0.0);
                EXPECT_EQ(t.rows[k].elapsed_ms, 0.0);
            }
    EXPECT_FALSE(t.has_failures());
    EXPECT_EQ(t.seed, 4u);
}

TEST(Sweep, DiracSourceAtSigmaZeroIsZero) {
    SweepConfig cfg;
    cfg.source = SourceSpec::dirac_pair({0.5, 0.5}, {0.0, 0.0});
    cfg.sigma_grid = {0.0};
    cfg.n_grid = {4, 8};
    cfg.trials = 2;
    for (const auto& r : run_convergence_sweep(cfg).rows) EXPECT_EQ(r.estimate, 0.0);
}

TEST(Sweep, JobsDoNotChangeResults) {
    const auto cfg = small_sweep();
    RunOptions four;
    four.jobs = 4;
    const auto a = run_convergence_sweep(cfg), b = run_convergence_sweep(cfg, four);
    EXPECT_EQ(a.rows, b.rows);
    EXPECT_EQ(a.config_hash, b.config_hash);
}

TEST(Sweep, SeedAndConfigChangeHash) {
    auto cfg = small_sweep();
    const auto h = run_convergence_sweep(cfg).config_hash;
    cfg.seed = 5;
    EXPECT_NE(run_convergence_sweep(cfg).config_hash, h);
}

TEST(Slope, RecoversExactPowerLaws) {
    const std::vector<std::size_t> ns{10, 30, 100, 300, 1000};
    auto fit = fit_loglog_slope(synthetic(1.0, ns, 2.0, -0.5), 1.0);
    EXPECT_NEAR(fit.slope, -0.5, 1e-12);
    EXPECT_NEAR(fit.intercept, std::log(2.0), 1e-12);
    EXPECT_NEAR(fit.r2, 1.0, 1e-12);
    EXPECT_FALSE(fit.dropped_smallest);
    EXPECT_NEAR(fit_loglog_slope(synthetic(0.0, ns, 0.7, -0.2), 0.0).slope, -0.2, 1e-12);
}

TEST(Slope, ExcludesNonPositiveAndDropsOutlier) {
    auto t = synthetic(1.0, {10, 30, 100, 300, 1000, 3000}, 1.0, -0.5);
    for (auto& r : t.rows)
        if (r.n == 3000) r.estimate = 0.0;
    auto fit = fit_loglog_slope(t, 1.0);
    EXPECT_EQ(fit.excluded_n, (std::vector<std::size_t>{3000}));
    EXPECT_EQ(fit.points, 5u);

    auto u = synthetic(1.0, {10, 30, 100, 300, 1000}, 1.0, -0.5);
    for (auto& r : u.rows)
        if (r.n == 10) r.estimate = 1e-4;
    fit = fit_loglog_slope(u, 1.0);
    EXPECT_TRUE(fit.dropped_smallest);
    EXPECT_NEAR(fit.slope, -0.5, 1e-12);
}

TEST(Slope, NeedsFourDistinctN) {
    EXPECT_THROW(fit_loglog_slope(synthetic(1.0, {10, 20, 40}, 1.0, -0.5), 1.0), ArgumentError);
    EXPECT_THROW(fit_loglog_slope(synthetic(1.0, {10, 20, 40, 80}, 1.0, -0.5), 2.0), ArgumentError);
}

TEST(Monotonicity, FlagsIncreasesBeyondNoise) {
    ResultTable t;
    // sigma 0: mean 1, sigma 1: mean 2 with zero spread
    for (std::size_t k = 0; k < 3; ++k) {
        t.rows.push_back({2, 0.0, 10, 10, k, 1.0, 0.0});
        t.rows.push_back({2, 1.0, 10, 10, k, 2.0, 0.0});
        t.rows.push_back({2, 2.0, 10, 10, k, 0.5, 0.0});
    }
    const auto v = sigma_monotonicity_violations(t);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].sigma_lo, 0.0);
    EXPECT_EQ(v[0].sigma_hi, 1.0);
}

TEST(Summary, SkipsFailedRows) {
    ResultTable t;
    t.rows.push_back({1, 0.0, 5, 5, 0, 1.0, 0.0});
    t.rows.push_back({1, 0.0, 5, 5, 1, NAN, 0.0});
    t.rows.push_back({1, 0.0, 5, 5, 2, 3.0, 0.0});
    const auto s = summarize(t);
    ASSERT_EQ(s.size(), 1u);
    EXPECT_EQ(s[0].trials, 2u);
    EXPECT_DOUBLE_EQ(s[0].mean, 2.0);
    EXPECT_TRUE(t.has_failures());
}

TEST(SigmaSweep, DiracPairHasNoViolations) {
    SigmaSweepConfig cfg;
    cfg.m = 300;
    const auto rep = run_sigma_sweep(point({0.0, 0.0}), point({1.0, 0.0}), cfg,
                                     calibrator());
    EXPECT_EQ(rep.violations(), 0u);
    EXPECT_EQ(rep.checks.size(), 6u);
    EXPECT_DOUBLE_EQ(rep.estimates[0].mean, 1.0);
}

TEST(SigmaSweep, RandomPairHasNoViolations) {
    SigmaSweepConfig cfg;
    cfg.m = 300;
    const auto mu = random_measure(10, 2, SeedTuple(41, 0, "a"), true);
    const auto nu = random_measure(10, 2, SeedTuple(41, 0, "b"), true);
    EXPECT_EQ(run_sigma_sweep(mu, nu, cfg, calibrator(), 2).violations(), 0u);
}

TEST(Axioms, RandomTriplesSatisfyAll) {
    AxiomConfig cfg;
    cfg.triples = 4;
    cfg.m = 200;
    cfg.trials = 6;
    const auto rep = run_metric_axioms(cfg, calibrator(), 2);
    EXPECT_EQ(rep.entries.size(), 12u);
    EXPECT_EQ(rep.violations(), 0u);
}

TEST(Axioms, CollinearDiracsAreTight) {
    AxiomConfig cfg;
    cfg.d = 1;
    cfg.m = 200;
    cfg.trials = 6;
    std::vector<std::array<DiscreteMeasure, 3>> triples;
    triples.push_back({point({0.0}), point({1.0}), point({2.0})});
    const auto rep = check_metric_axioms(triples, cfg, calibrator());
    EXPECT_EQ(rep.violations(), 0u);
    EXPECT_NEAR(rep.entries[0].lhs, 2.0, 0.3);
}

TEST(Axioms, ConfigErrors) {
    AxiomConfig cfg;
    cfg.m_small = cfg.m;
    EXPECT_THROW(run_metric_axioms(cfg, calibrator()), ConfigError);
}

TEST(PlanConvergence, HalvingSigmaStaysInEnvelope) {
    PlanConvergenceConfig cfg;
    for (int k = 0; k <= 6; ++k) cfg.sigmas.push_back(std::ldexp(1.0, -k));
    cfg.m = 300;
    const auto mu = random_measure(10, 2, SeedTuple(42, 0, "a"));
    const auto nu = random_measure(10, 2, SeedTuple(42, 0, "b"));
    const auto rep = run_plan_convergence(mu, nu, cfg, calibrator(), 2);
    EXPECT_NEAR(rep.exact, solve_transport(mu, nu).cost, 1e-12);
    EXPECT_EQ(rep.violations(), 0u);
    // the last step is within a few percent of the exact value
    EXPECT_LT(std::abs(rep.steps.back().diff), 0.1 * rep.exact + 3 * rep.steps.back().std_err);
    EXPECT_GE(rep.steps.back().induced_atom_cost, rep.exact - 1e-12);
}

TEST(PlanConvergence, RequiresGaussianCrn) {
    const auto mu = random_measure(3, 2, SeedTuple(43, 0, "a"));
    PlanConvergenceConfig cfg;
    cfg.sigmas = {1.0};
    cfg.noise = NoiseFamily::uniform;
    EXPECT_THROW(run_plan_convergence(mu, mu, cfg, calibrator()), ConfigError);
    cfg.noise = NoiseFamily::gaussian;
    cfg.crn = false;
    EXPECT_THROW(run_plan_convergence(mu, mu, cfg, calibrator()), ConfigError);
    cfg.crn = true;
    cfg.sigmas = {0.5, 1.0};
    EXPECT_THROW(run_plan_convergence(mu, mu, cfg, calibrator()), ConfigError);
}
