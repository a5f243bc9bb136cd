#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

#include "got/measures.hpp"
#include "got/rng.hpp"

using namespace got;

TEST(Rng, SameTupleSameStream) {
    Rng a(SeedTuple(7, 3, "noise")), b(SeedTuple(7, 3, "noise"));
    for (int k = 0; k < 100; ++k) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, TupleFieldsSeparateStreams) {
    std::set<std::uint64_t> keys;
    keys.insert(SeedTuple(7, 3, "noise").key());
    keys.insert(SeedTuple(7, 4, "noise").key());
    keys.insert(SeedTuple(8, 3, "noise").key());
    keys.insert(SeedTuple(7, 3, "atoms").key());
    keys.insert(SeedTuple(7, 3, "noise").mixed(1).key());
    EXPECT_EQ(keys.size(), 5u);
}

TEST(Rng, UniformMoments) {
    Rng r(SeedTuple(1, 0, "u"));
    const int n = 200000;
    double s = 0, s2 = 0;
    for (int k = 0; k < n; ++k) {
        const double u = r.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        s += u;
        s2 += u * u;
    }
    // mean 1/2, variance 1/12; 5 standard errors
    EXPECT_NEAR(s / n, 0.5, 5 * std::sqrt(1.0 / 12 / n));
    EXPECT_NEAR(s2 / n - (s / n) * (s / n), 1.0 / 12, 0.002);
}

TEST(Rng, NormalMoments) {
    Rng r(SeedTuple(2, 0, "n"));
    const int n = 200000;
    double s = 0, s2 = 0, s4 = 0;
    for (int k = 0; k < n; ++k) {
        const double z = r.normal();
        s += z;
        s2 += z * z;
        s4 += z * z * z * z;
    }
    EXPECT_NEAR(s / n, 0.0, 5 / std::sqrt(n));
    EXPECT_NEAR(s2 / n, 1.0, 5 * std::sqrt(2.0 / n));
    EXPECT_NEAR(s4 / n, 3.0, 5 * std::sqrt(96.0 / n));
}

TEST(Rng, BelowIsUniform) {
    Rng r(SeedTuple(3, 0, "b"));
    std::vector<int> counts(7, 0);
    const int n = 70000;
    for (int k = 0; k < n; ++k) ++counts[r.below(7)];
    double chi2 = 0;
    for (int c : counts) chi2 += (c - n / 7.0) * (c - n / 7.0) / (n / 7.0);
    EXPECT_LT(chi2, 22.46);  // chi-square(6) 0.999 quantile
}

TEST(PointCloud, Validation) {
    EXPECT_THROW(PointCloud(0, {}), ArgumentError);
    EXPECT_THROW(PointCloud(2, {1, 2, 3}), ArgumentError);
    PointCloud p(2, {1, 2, 3, 4});
    EXPECT_EQ(p.size(), 2u);
    EXPECT_EQ(p[1][0], 3.0);
    EXPECT_THROW(p.push_back(std::vector<double>{1.0}), ArgumentError);
}

TEST(DiscreteMeasure, WeightInvariants) {
    PointCloud p(1, {0, 1});
    EXPECT_NO_THROW(DiscreteMeasure(p, {0.5, 0.5}));
    EXPECT_THROW(DiscreteMeasure(p, {0.5, 0.5 + 1e-10}), ArgumentError);
    EXPECT_THROW(DiscreteMeasure(p, {1.5, -0.5}), ArgumentError);
    EXPECT_THROW(DiscreteMeasure(p, {1.0}), ArgumentError);
    EXPECT_THROW(DiscreteMeasure(PointCloud(1, {0, NAN}), {0.5, 0.5}), ArgumentError);
}

TEST(DiscreteMeasure, EmpiricalAndMoment) {
    const auto m = make_empirical(PointCloud(2, {3, 4, 0, 0}));
    EXPECT_DOUBLE_EQ(m.weight(0), 0.5);
    EXPECT_DOUBLE_EQ(first_moment(m), 2.5);
    const std::vector<double> v{1, 1};
    const auto t = m.translated(v);
    EXPECT_EQ(t.atom(1)[0], 1.0);
}

TEST(SourceSpec, Validation) {
    EXPECT_THROW(SourceSpec::uniform_cube(0), ConfigError);
    EXPECT_THROW(SourceSpec::uniform_cube(2, -1.0), ConfigError);
    EXPECT_THROW(SourceSpec::isotropic_gaussian(2, 0.0), ConfigError);
    EXPECT_THROW(SourceSpec::dirac_pair({0, 0}, {0, 0}), ConfigError);
    EXPECT_THROW(SourceSpec::dirac_pair({0, 0}, {1}), ConfigError);
    EXPECT_THROW(SourceSpec::gaussian_mixture({{0.5, {0.0}, 1.0}, {0.4, {1.0}, 1.0}}), ConfigError);
    EXPECT_THROW(parse_source_family("cube"), ConfigError);
    EXPECT_EQ(parse_source_family("gaussian-mixture"), SourceFamily::gaussian_mixture);
}

TEST(SourceSpec, SubgaussianConstants) {
    EXPECT_DOUBLE_EQ(SourceSpec::uniform_cube(3, 2.0).subgaussian_constant(), 1.0);
    EXPECT_DOUBLE_EQ(SourceSpec::isotropic_gaussian(3, 0.7).subgaussian_constant(), 0.7);
    EXPECT_DOUBLE_EQ(SourceSpec::dirac_pair({0}, {1}).subgaussian_constant(), 0.0);
    const auto mix = SourceSpec::gaussian_mixture({{0.5, {0.0, 0.0}, 0.5}, {0.5, {3.0, 4.0}, 1.0}});
    EXPECT_DOUBLE_EQ(mix.subgaussian_constant(), std::sqrt(1.0 + 25.0 / 4.0));
}

TEST(Sampling, DeterministicInSeed) {
    const auto spec = SourceSpec::isotropic_gaussian(3);
    EXPECT_EQ(sample_source(spec, 50, SeedTuple(1, 2, "s")), sample_source(spec, 50, SeedTuple(1, 2, "s")));
    EXPECT_FALSE(sample_source(spec, 50, SeedTuple(1, 2, "s")) == sample_source(spec, 50, SeedTuple(1, 3, "s")));
}

TEST(Sampling, UniformCubeSupportAndMean) {
    const auto pts = sample_source(SourceSpec::uniform_cube(2, 3.0), 20000, SeedTuple(4, 0, "s"));
    double s = 0;
    for (double c : pts.coords()) {
        ASSERT_GE(c, 0.0);
        ASSERT_LT(c, 3.0);
        s += c;
    }
    const double n = static_cast<double>(pts.coords().size());
    EXPECT_NEAR(s / n, 1.5, 5 * 3.0 / std::sqrt(12.0 * n));
}

TEST(Sampling, GaussianVariance) {
    const auto pts = sample_source(SourceSpec::isotropic_gaussian(2, 2.0), 20000, SeedTuple(5, 0, "s"));
    double s2 = 0;
    for (double c : pts.coords()) s2 += c * c;
    const double n = static_cast<double>(pts.coords().size());
    EXPECT_NEAR(s2 / n, 4.0, 5 * 4.0 * std::sqrt(2.0 / n));
}

TEST(Sampling, MixtureComponentFrequencies) {
    const auto spec = SourceSpec::gaussian_mixture({{0.25, {-100.0}, 1.0}, {0.75, {100.0}, 1.0}});
    const auto pts = sample_source(spec, 8000, SeedTuple(6, 0, "s"));
    int right = 0;
    for (double c : pts.coords()) right += c > 0;
    EXPECT_NEAR(right / 8000.0, 0.75, 5 * std::sqrt(0.75 * 0.25 / 8000));
}

TEST(Sampling, DiracPairComponents) {
    const auto spec = SourceSpec::dirac_pair({1, 2}, {3, 4});
    const auto a = sample_source(spec, 5, SeedTuple(1, 0, "s"));
    const auto b = sample_source(spec.other_component(), 5, SeedTuple(1, 0, "s"));
    for (std::size_t i = 0; i < 5; ++i) {
        EXPECT_EQ(a[i][0], 1.0);
        EXPECT_EQ(b[i][1], 4.0);
    }
}

TEST(Resample, FrequenciesFollowWeights) {
    const DiscreteMeasure mu(PointCloud(1, {0, 1, 2}), {0.2, 0.3, 0.5});
    const auto [pts, idx] = resample_atoms(mu, 30000, SeedTuple(9, 0, "r"));
    std::vector<double> counts(3, 0);
    for (std::size_t r = 0; r < idx.size(); ++r) {
        ASSERT_EQ(pts[r][0], static_cast<double>(idx[r]));
        ++counts[idx[r]];
    }
    double chi2 = 0;
    for (int k = 0; k < 3; ++k) chi2 += std::pow(counts[k] - 30000 * mu.weight(k), 2) / (30000 * mu.weight(k));
    EXPECT_LT(chi2, 13.82);  // chi-square(2) 0.999 quantile
}

TEST(RandomMeasure, WeightsAndSupport) {
    const auto m = random_measure(40, 3, SeedTuple(1, 1, "m"), true);
    double total = 0;
    for (double w : m.weights()) total += w;
    EXPECT_NEAR(total, 1.0, 1e-12);
    for (double c : m.points().coords()) {
        EXPECT_GE(c, 0.0);
        EXPECT_LT(c, 1.0);
    }
}
