#include <gtest/gtest.h>

#include <cmath>

#include "got/theory_bounds.hpp"

using namespace got;

namespace {

// Log-space recomputation, independent of the product form in the library.
double rate_reference(double s, double d, double K, double c1, double n) {
    return std::exp(d * std::log(c1) + std::log(s) + 0.5 * std::log(2 * d) + (d / 2 + 1) * std::log1p(K / s) +
                    3 * d / 16 - 0.5 * std::log(n));
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST(Bounds, StabilityExamples) {
    EXPECT_DOUBLE_EQ(stability_bound(0, 1, 4), 4.0);
    EXPECT_NEAR(stability_bound(0, 0.7, 3), 2 * 0.7 * std::sqrt(3.0), 1e-15);
    EXPECT_LT(stability_bound(1, 1 + 1e-12, 2), 1e-5);
    EXPECT_THROW(stability_bound(1, 1, 2), ArgumentError);
    EXPECT_THROW(stability_bound(2, 1, 2), ArgumentError);
}

TEST(Bounds, StabilityComposesInSquares) {
    for (double s1 : {0.0, 0.3, 1.0})
        for (double gap : {0.1, 0.5, 2.0})
            for (std::size_t d : {1, 3, 5}) {
                const double s2 = s1 + gap, s3 = s2 + 0.7;
                const double lhs = std::pow(stability_bound(s1, s2, d), 2) + std::pow(stability_bound(s2, s3, d), 2);
                EXPECT_LE(rel(lhs, std::pow(stability_bound(s1, s3, d), 2)), 1e-12);
                EXPECT_LE(rel(lhs, 4.0 * d * (s3 * s3 - s1 * s1)), 1e-12);
            }
}

TEST(Bounds, RateExamples) {
    EXPECT_NEAR(rate_bound(1, 1, 0, 1, 1), std::sqrt(2.0) * std::exp(3.0 / 16), 1e-12);
    EXPECT_NEAR(rate_bound(1, 1, 0, 1, 1), 1.70587, 5e-5);
    // K = sigma = sqrt(2), d = 2: sqrt(2) * 2 * 2^2 * e^{3/8}
    const double s = std::sqrt(2.0);
    EXPECT_LE(rel(rate_bound(s, 2, s, 1, 1), 8 * std::sqrt(2.0) * std::exp(3.0 / 8)), 1e-12);
    EXPECT_LE(rel(rate_bound(0.8, 3, 0.5, 1.2, 200) / rate_bound(0.8, 3, 0.5, 1.2, 400), std::sqrt(2.0)), 1e-12);
    EXPECT_THROW(rate_bound(0, 1, 0, 1, 1), ArgumentError);
    EXPECT_THROW(rate_bound(1, 1, 0, 0.5, 1), ArgumentError);
}

TEST(Bounds, RateMonotoneInKAndD) {
    for (double K = 0; K < 3; K += 0.25) EXPECT_LT(rate_bound(1, 3, K, 1, 100), rate_bound(1, 3, K + 0.25, 1, 100));
    for (std::size_t d = 1; d < 10; ++d) EXPECT_LT(rate_bound(0.5, d, 0.5, 1, 100), rate_bound(0.5, d + 1, 0.5, 1, 100));
}

TEST(Bounds, ConcentrationExamples) {
    EXPECT_NEAR(concentration_bound(1, 1, 1).raw, 2 * std::exp(-2.0), 1e-15);
    EXPECT_NEAR(concentration_bound(1, 1, 1).raw, 0.2707, 5e-5);
    EXPECT_LT(concentration_bound(1, 10, 100).raw, 1e-300);
    EXPECT_EQ(concentration_bound(10, 1, 0.1).capped, 1.0);
    const double raw = concentration_bound(2, 30, 0.4).raw;
    EXPECT_LE(rel(concentration_bound(2, 60, 0.4).raw, raw * raw / 2), 1e-12);
    for (double t = 0.1; t < 2; t += 0.1) EXPECT_GT(concentration_bound(1.5, 20, t).raw, concentration_bound(1.5, 20, t + 0.1).raw);
    for (std::size_t n = 1; n < 50; ++n) EXPECT_GT(concentration_bound(1.5, n, 0.3).raw, concentration_bound(1.5, n + 1, 0.3).raw);
    const double t = concentration_deviation(std::sqrt(2.0), 200, 0.1);
    EXPECT_NEAR(concentration_bound(std::sqrt(2.0), 200, t).raw, 0.1, 1e-14);
}

TEST(Bounds, DeltaExamples) {
    EXPECT_EQ(delta_param(0.5), 1.0);
    EXPECT_EQ(delta_param(1.0), 0.25);
    EXPECT_EQ(delta_param(2.0), 0.0625);
    EXPECT_EQ(delta_param(0.1), 1.0);
    EXPECT_THROW(delta_param(0), ArgumentError);
}

TEST(Bounds, GridRecomputation) {
    // 20-point grid, log-space reference for the rate, direct formulas otherwise
    int k = 0;
    for (double s : {0.25, 0.5, 1.0, 2.0, 4.0})
        for (std::size_t d : {1, 2, 5, 10}) {
            const double K = 0.3 * k, c1 = 1.0 + 0.1 * k;
            const std::size_t n = 10 + 37 * k;
            EXPECT_LE(rel(rate_bound(s, d, K, c1, n), rate_reference(s, d, K, c1, n)), 1e-12);
            EXPECT_LE(rel(stability_bound(s / 2, s, d), 2 * std::sqrt(d * 0.75 * s * s)), 1e-12);
            EXPECT_LE(rel(concentration_bound(s, n, 0.1 * s).raw, 2 * std::exp(-0.02 * n)), 1e-12);
            EXPECT_EQ(delta_param(s), s <= 0.5 ? 1.0 : 0.25 / (s * s));
            ++k;
        }
    EXPECT_EQ(k, 20);
}

TEST(Bounds, Reports) {
    const auto r = report_rate(1, 5, 0.5, 1, 1000);
    EXPECT_EQ(r.name, "rate_bound");
    EXPECT_EQ(r.inputs.at("K"), 0.5);
    EXPECT_EQ(r.value, rate_bound(1, 5, 0.5, 1, 1000));
    EXPECT_GE(report_concentration(1, 10, 0.1).value, 0.0);
}
