#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fracdiff/integrals.hpp"
#include "fracdiff/suites.hpp"

using namespace fracdiff;

namespace {

constexpr double pi = std::numbers::pi;

std::vector<double> dyadic_scales(int first, int last) {
    std::vector<double> s;
    for (int k = first; k <= last; ++k) s.push_back(std::ldexp(1.0, -k));
    return s;
}

}  // namespace

TEST(SingularLine, PowerWeightsExact) {
    // \int_0^1 u^{-1/2} (1 - u)^{-1/2} du = pi.
    auto one = [](double) { return 1.0; };
    const auto r = singular_line_integral(one, {{0.0, -0.5}, {1.0, -0.5}}, 0.0, 1.0);
    EXPECT_NEAR(r.value, pi, 1e-12);
    // Interior singularity: \int_{-1}^{2} |u|^{-0.3} du = (1 + 2^{0.7}) / 0.7.
    const auto s = singular_line_integral(one, {{0.0, -0.3}}, -1.0, 2.0);
    EXPECT_NEAR(s.value, (1.0 + std::pow(2.0, 0.7)) / 0.7, 1e-12);
    // A singular point outside the range still weights the integrand.
    const auto o = singular_line_integral(one, {{-1.0, -0.5}}, 0.0, 3.0);
    EXPECT_NEAR(o.value, 2.0 * (2.0 - 1.0), 1e-12);
}

TEST(WeightedIntegral, GaussianCases) {
    EXPECT_NEAR(weighted_integral_1d(0.0, 1.0, 1.0, 1.0, 0.0).value, std::sqrt(pi), 1e-10);
    EXPECT_NEAR(weighted_integral_1d(0.0, 1.0, 1.0, 1.0, 2.7).value, std::sqrt(pi), 1e-10);
    EXPECT_NEAR(weighted_integral_1d(0.0, 1.0, 1.0, 4.0, 0.0).value, 2.0 * std::sqrt(pi), 1e-10);
    // \int |x|^{-1/2} e^{-x^2} dx = Gamma(1/4).
    EXPECT_NEAR(weighted_integral_1d(-0.5, 1.0, 1.0, 1.0, 0.0).value, 3.6256099082219083119, 1e-10);
    // alpha = 0.8: 2 \int_0^inf x^{-1/2} exp(-x^{5/3}) dx, reference value at 30 digits.
    EXPECT_NEAR(weighted_integral_1d(-0.5, 0.8, 1.0, 1.0, 0.0).value, 3.5898827852251087338, 1e-10);
}

TEST(WeightedIntegral, ScalingSlope) {
    std::vector<double> s{0.25, 1.0, 4.0}, y;
    for (double si : s) y.push_back(weighted_integral_1d(-0.5, 0.8, 1.0, si, 0.0).value);
    EXPECT_NEAR(loglog_slope(s, y), 0.2, 0.2 * 0.02);
    // Off-center the exponent is only an upper bound; the small-s slope approaches the same value.
    const auto ss = dyadic_scales(30, 33);
    std::vector<double> yy;
    for (double si : ss) yy.push_back(weighted_integral_1d(-0.25, 0.6, 1.0, si, 0.0).value);
    EXPECT_NEAR(loglog_slope(ss, yy), 0.6 * -0.25 / 2 + 0.3, 0.225 * 0.02);
    EXPECT_THROW((void)weighted_integral_1d(-1.0, 0.8, 1.0, 1.0, 0.0), Error);
    EXPECT_THROW((void)weighted_integral_1d(0.2, 0.8, 1.0, 1.0, 0.0), Error);
}

TEST(WeightedLogIntegral, ReferenceValueAtTwoTolerances) {
    // 2 \int_0^inf |log x| e^{-x^2} dx, reference value at 30 digits.
    const double ref = 1.8836464518328203417;
    const auto a = weighted_log_integral_1d(0.0, 1.0, 1.0, 1.0, 0.0, {1e-14, 1e-11, 2000});
    const auto b = weighted_log_integral_1d(0.0, 1.0, 1.0, 1.0, 0.0, {1e-10, 1e-7, 2000});
    EXPECT_NEAR(a.value, ref, 1e-9);
    EXPECT_NEAR(b.value, ref, 1e-6);
}

TEST(WeightedLogIntegral, TwoPointScaling) {
    const double s = std::ldexp(1.0, -20), beta = -0.25, a = 0.8;
    const double ratio = weighted_log_integral_1d(beta, a, 1.0, s / 4.0, 0.0).value /
                         weighted_log_integral_1d(beta, a, 1.0, s, 0.0).value;
    const double L = std::abs(std::log(s));
    const double expected = std::pow(0.25, 0.3) * (1.0 + L + std::log(4.0)) / (1.0 + L);
    EXPECT_NEAR(ratio / expected, 1.0, 0.05);
}

TEST(WeightedLogIntegral, DependenceOnCenter) {
    // For beta < 0 the supremum over xi sits near 0.
    const double at0 = weighted_log_integral_1d(-0.5, 1.0, 1.0, 1.0, 0.0).value;
    for (double xi : {0.5, 2.0, 10.0})
        EXPECT_LE(weighted_log_integral_1d(-0.5, 1.0, 1.0, 1.0, xi).value, at0 + 1e-6);
    // For beta = 0 the log weight grows like sqrt(pi) log xi, so xi = 10 exceeds xi = 0.
    const double b0 = weighted_log_integral_1d(0.0, 1.0, 1.0, 1.0, 0.0).value;
    const double b10 = weighted_log_integral_1d(0.0, 1.0, 1.0, 1.0, 10.0).value;
    EXPECT_GT(b10, b0);
    EXPECT_NEAR(b10 / (std::sqrt(pi) * std::log(10.0)), 1.0, 0.01);
}

TEST(ConvolutionBound, ReducesToWeightedIntegral) {
    for (double D : {0.3, 1.0, 2.5}) {
        const double c = convolution_bound_1d(-0.5, 0.0, 0.7, D, 0.0, 0.8).value;
        const double w = weighted_integral_1d(-0.5, 0.8, 1.0, 0.7, D).value;
        EXPECT_NEAR(c / w, 1.0, 1e-8) << D;
    }
}

TEST(ConvolutionBound, LogGrowthAtCriticalSum) {
    const double at1 = convolution_bound_1d(-0.5, -0.5, 1.0, 1.0, 0.0, 0.8).value;
    EXPECT_TRUE(std::isfinite(at1));
    std::vector<double> v;
    for (int k = 30; k <= 36; k += 2)
        v.push_back(convolution_bound_1d(-0.5, -0.5, 1.0, std::ldexp(1.0, -k), 0.0, 0.8).value);
    // Growth per factor 4 in D settles to a constant increment.
    const double i1 = v[1] - v[0], i2 = v[2] - v[1], i3 = v[3] - v[2];
    EXPECT_GT(i1, 0.0);
    EXPECT_NEAR(i3 / i2, 1.0, 0.05);
    EXPECT_NEAR(i2 / i1, 1.0, 0.05);
}

TEST(ConvolutionBound, PowerGrowthBelowCriticalSum) {
    const auto D = dyadic_scales(40, 46);
    std::vector<double> x, y;
    for (std::size_t k = 0; k < D.size(); k += 2) {
        x.push_back(D[k]);
        y.push_back(convolution_bound_1d(-0.7, -0.5, 1.0, D[k], 0.0, 0.8).value);
    }
    EXPECT_NEAR(loglog_slope(x, y), -0.2, 0.2 * 0.05);
}

TEST(ConvolutionBound, CoincidentPoints) {
    try {
        (void)convolution_bound_1d(-0.5, -0.5, 1.0, 0.4, 0.4, 0.8);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::coincident_points);
    }
}

TEST(DoubleIntegral, RegimesAndTargets) {
    const auto a = double_integral_exponents(-0.3, -0.2, 0.8);
    EXPECT_EQ(a.regime, "sum>-1");
    EXPECT_NEAR(a.s_exponent, 0.2, 1e-15);
    EXPECT_NEAR(a.r_exponent, 0.32, 1e-15);
    const auto b = double_integral_exponents(-0.8, -0.4, 0.8);
    EXPECT_EQ(b.regime, "sum<-1");
    EXPECT_NEAR(b.r_exponent, 0.8 * (-0.8 - 0.8 + 2.0) / 2.0, 1e-15);
    EXPECT_NEAR(b.symmetric, 0.8 * 0.4 / 4.0, 1e-15);
    EXPECT_EQ(double_integral_exponents(-0.5, -0.5, 0.8).regime, "sum=-1");
    EXPECT_THROW((void)double_integral_bound(-0.9, -0.6, 1.0, 1.0, 0.0, 0.0, 0.8), Error);
}

TEST(DoubleIntegral, SwapSymmetry) {
    const double t = -0.4;
    const double a = double_integral_bound(t, t, 0.3, 0.7, 0.2, -0.1, 0.8).value;
    const double b = double_integral_bound(t, t, 0.7, 0.3, -0.1, 0.2, 0.8).value;
    EXPECT_NEAR(a / b, 1.0, 1e-6);
}

TEST(DoubleIntegral, FirstCaseRExponent) {
    const auto r = dyadic_scales(30, 33);
    std::vector<double> y;
    for (double dr : r) y.push_back(double_integral_bound(-0.3, -0.2, 1.0, dr, 0.0, 0.0, 0.8).value);
    EXPECT_NEAR(loglog_slope(r, y), 0.32, 0.32 * 0.05);
}

TEST(Suites, WeightedAndLogarithmicFitSuitesPass) {
    const auto t9 = suites::lem9();
    EXPECT_TRUE(t9.all_pass);
    EXPECT_EQ(t9.rows.size(), 9u);
    const auto t11 = suites::lem11();
    EXPECT_TRUE(t11.all_pass);
}

TEST(Simplex, FormulaExamples) {
    EXPECT_NEAR(simplex_formula({{1.0, 1.0}, 1.0}), 0.5, 1e-15);
    EXPECT_NEAR(simplex_formula({{0.5}, 2.0}), 2.0 * std::sqrt(2.0), 1e-14);
    EXPECT_NEAR(simplex_formula({{0.5, 0.5}, 2.0}), 2.0 * pi, 1e-13);
    EXPECT_NEAR(simplex_formula_power_n({{0.5, 0.5}, 2.0}), 4.0 * pi, 1e-13);
    // The two forms agree when the p_k sum to n.
    EXPECT_NEAR(simplex_formula({{0.5, 1.5}, 3.0}), simplex_formula_power_n({{0.5, 1.5}, 3.0}), 1e-13);
    EXPECT_THROW((void)simplex_formula({{0.5, -1.0}, 1.0}), Error);
}

TEST(Simplex, MonteCarloAgreesWithinThreeSigma) {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double Ts[] = {0.5, 1.0, 2.0};
    for (int k = 0; k < 8; ++k) {
        SimplexSpec s;
        const int n = 1 + static_cast<int>(u(rng) * 4);
        for (int i = 0; i < n; ++i) s.p.push_back(0.3 + 1.7 * u(rng));
        s.T = Ts[k % 3];
        const auto mc = simplex_mc(s, 50000, 100 + static_cast<std::uint64_t>(k));
        EXPECT_LE(std::abs(mc.mean - simplex_formula(s)), 3.0 * mc.std_error) << k;
    }
}

TEST(Simplex, SortedUniformSamplerOnSmoothWeights) {
    const SimplexSpec s{{1.0, 1.5, 2.0}, 2.0};
    const auto mc = simplex_mc(s, 100000, 5, SimplexSampler::sorted_uniform);
    EXPECT_LE(std::abs(mc.mean - simplex_formula(s)), 3.0 * mc.std_error);
}

TEST(Simplex, DeterministicAcrossThreadCounts) {
    const SimplexSpec s{{0.5, 0.7, 1.3}, 1.0};
    const auto a = simplex_mc(s, 30000, 99, SimplexSampler::stick_breaking, 1);
    const auto b = simplex_mc(s, 30000, 99, SimplexSampler::stick_breaking, 4);
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.variance, b.variance);
    EXPECT_THROW((void)simplex_mc(s, 100, 1), Error);
}

TEST(ThetaSeries, SinhClosedForm) {
    const auto t = theta_tail_series(0.0, 1.0, 30);
    EXPECT_NEAR(t.partial_sums.back(), std::sinh(1.0), 1e-15);
    EXPECT_TRUE(t.within_theorem);
    EXPECT_TRUE(t.eventually_decreasing);
}

TEST(ThetaSeries, BoundaryAndSubcritical) {
    const auto b = theta_tail_series(-0.5, 2.0, 60);
    EXPECT_TRUE(b.boundary);
    EXPECT_FALSE(b.within_theorem);
    EXPECT_NEAR(b.partial_sums.back(), 2.0 * std::exp(2.0), 1e-10);  // sum 2^n / (n-1)!
    // Gamma(0.8 n) outgrows 2^n, so the terms still decrease eventually; the flag that
    // matters is that the rate 0.8 lies outside the theorem.
    const auto s = theta_tail_series(-0.6, 2.0, 200);
    EXPECT_FALSE(s.within_theorem);
    EXPECT_FALSE(s.boundary);
    EXPECT_TRUE(s.eventually_decreasing);
}

TEST(ThetaSeries, OverflowIsGuarded) {
    const auto t = theta_tail_series(-0.99, 1e6, 10000);
    EXPECT_TRUE(t.overflow);
    EXPECT_EQ(t.terms.size(), 10000u);
    EXPECT_THROW((void)theta_tail_series(0.0, 1.0, 20000), Error);
}

TEST(ThetaSeries, BorderlineExponentStaysConvergent) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int checked = 0;
    for (int k = 0; k < 200; ++k) {
        const int d = 1 + static_cast<int>(u(rng) * 4);
        std::vector<double> h;
        for (int i = 0; i < d; ++i) h.push_back(0.5 + 0.49 * u(rng));
        const double a = 0.5 + 0.5 * u(rng);
        const auto v = check_conditions(a, HurstVector(h), 0.9);
        if (!v.overall) continue;
        for (double eps : {1e-3, 1e-2}) {
            const auto t = theta_tail_series(ell_borderline(d, a, v.table.kappa_d, eps), 10.0, 200);
            EXPECT_TRUE(t.within_theorem);
            EXPECT_TRUE(t.eventually_decreasing);
            EXPECT_LT(t.tail_estimate, 1e-12);
        }
        ++checked;
    }
    EXPECT_GT(checked, 20);
}
