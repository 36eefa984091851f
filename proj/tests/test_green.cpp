#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "fracdiff/chaos.hpp"
#include "fracdiff/green.hpp"

using namespace fracdiff;
using specfun::HMethod;

namespace {

constexpr double pi = std::numbers::pi;

double gaussian(int d, double t, double r) {
    return std::pow(4.0 * pi * t, -0.5 * d) * std::exp(-r * r / (4.0 * t));
}

// Z0 at alpha = 1 through the H-function itself rather than the closed form.
double z0_alpha1_via_h(int d, double t, double r, HMethod method) {
    const double Q = r * r;
    const specfun::HFunctionSpec spec{2, 0, {{1.0, 1.0}}, {{0.5 * d, 1.0}, {1.0, 1.0}}};
    const double h = specfun::h_eval(spec, 0.25 * Q / t, method).value;
    return std::pow(pi, -0.5 * d) * std::pow(Q, -0.5 * d) * h;
}

}  // namespace

TEST(QuadForm, Examples) {
    double x2[] = {3.0, 4.0};
    EXPECT_DOUBLE_EQ(quad_form(GreenModel::isotropic(0.8, 2), x2), 25.0);
    Eigen::MatrixXd A1(1, 1);
    A1 << 4.0;
    double x1[] = {2.0};
    EXPECT_DOUBLE_EQ(quad_form(GreenModel(0.8, A1), x1), 1.0);
    Eigen::MatrixXd A(2, 2);
    A << 2.0, 1.0, 1.0, 2.0;
    double y[] = {1.0, 1.0};
    EXPECT_NEAR(quad_form(GreenModel(0.8, A), y), 2.0 / 3.0, 1e-15);
    double bad[] = {1.0};
    EXPECT_THROW((void)quad_form(GreenModel::isotropic(0.8, 2), bad), Error);
}

TEST(GreenModel, RejectsBadInputs) {
    Eigen::MatrixXd A(2, 2);
    A << 1.0, 2.0, 2.0, 1.0;  // indefinite
    EXPECT_THROW(GreenModel(0.8, A), Error);
    EXPECT_THROW(GreenModel::isotropic(0.0, 1), Error);
    EXPECT_THROW(GreenModel::isotropic(1.2, 1), Error);
}

TEST(Envelope, Examples) {
    EXPECT_DOUBLE_EQ(envelope_p(0.8, 1.0, 1.0, 0.0), 1.0);
    EXPECT_NEAR(envelope_p(1.0, 1.0, 1.0, 1.0), std::exp(-1.0), 1e-15);
    EXPECT_NEAR(envelope_p(0.5, 2.0, 4.0, 1.0), std::exp(-2.0 * std::pow(4.0, -1.0 / 3.0)), 1e-15);
    EXPECT_GT(envelope_p(0.7, 1.0, 1.0, 0.5), envelope_p(0.7, 1.0, 1.0, 0.6));
}

TEST(Z0, GaussianExamples) {
    const auto m1 = GreenModel::isotropic(1.0, 1);
    double x0[] = {0.0};
    EXPECT_NEAR(z0_eval(m1, 1.0, x0), 1.0 / std::sqrt(4.0 * pi), 1e-14);
    EXPECT_NEAR(y0_eval(m1, 1.0, x0), 1.0 / std::sqrt(4.0 * pi), 1e-14);
    const auto m2 = GreenModel::isotropic(1.0, 2);
    double x2[] = {2.0, 0.0};
    EXPECT_NEAR(z0_eval(m2, 1.0, x2), std::exp(-1.0) / (4.0 * pi), 1e-15);
    const auto m3 = GreenModel::isotropic(1.0, 3);
    double x3[] = {1.0, 0.0, 0.0};
    EXPECT_NEAR(y0_eval(m3, 2.0, x3), std::pow(8.0 * pi, -1.5) * std::exp(-0.125), 1e-15);
}

TEST(Z0, AlphaOneHFunctionRouteMatchesGaussian) {
    for (int d = 1; d <= 3; ++d)
        for (double t : {0.2, 1.0, 3.0})
            for (double r : {0.1, 0.7, 1.5, 3.0}) {
                const double g = gaussian(d, t, r);
                for (auto method : {HMethod::residue, HMethod::contour})
                    EXPECT_LT(std::abs(z0_alpha1_via_h(d, t, r, method) - g) / g, 1e-8)
                        << "d=" << d << " t=" << t << " r=" << r;
            }
}

TEST(Z0, DualMethodOracles) {
    const auto m = GreenModel::isotropic(0.8, 1);
    double x[] = {1.0};
    const double r = z0_eval(m, 1.0, x, HMethod::residue);
    const double c = z0_eval(m, 1.0, x, HMethod::contour);
    EXPECT_LT(std::abs(r - c) / c, 1e-8);
    const auto m6 = GreenModel::isotropic(0.6, 1);
    double x5[] = {0.5};
    const double yr = y0_eval(m6, 1.0, x5, HMethod::residue);
    const double yc = y0_eval(m6, 1.0, x5, HMethod::contour);
    EXPECT_LT(std::abs(yr - yc) / yc, 1e-8);
}

TEST(Z0, SingularAtOriginForHigherDimensions) {
    const auto m = GreenModel::isotropic(0.8, 2);
    double x[] = {0.0, 0.0};
    try {
        (void)z0_eval(m, 1.0, x);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::singular_point);
    }
}

TEST(Z0, PositivityAndSelfSimilarity) {
    for (double a : {0.6, 0.8, 1.0})
        for (int d : {1, 2, 3}) {
            const auto m = GreenModel::isotropic(a, d);
            for (double t : {0.1, 0.5, 2.0})
                for (double r : {0.05, 0.5, 1.0, 2.5}) {
                    std::vector<double> x(static_cast<std::size_t>(d), 0.0);
                    x[0] = r;
                    const double z = z0_eval(m, t, x);
                    EXPECT_GT(z, 0.0);
                    std::vector<double> xs(x);
                    xs[0] = std::pow(t, -0.5 * a) * r;
                    const double scaled = std::pow(t, -0.5 * a * d) * z0_eval(m, 1.0, xs);
                    EXPECT_LT(std::abs(z - scaled) / z, 1e-8) << a << " " << d << " " << t << " " << r;
                }
        }
}

TEST(Z0, TranslationInvariance) {
    Eigen::MatrixXd A(2, 2);
    A << 1.5, 0.3, 0.3, 0.8;
    const GreenModel m(0.7, A);
    double x[] = {1.2, -0.3}, xi[] = {0.4, 0.5}, diff[] = {0.8, -0.8};
    EXPECT_DOUBLE_EQ(z0_eval(m, 0.9, x, xi), z0_eval(m, 0.9, diff));
}

TEST(Z0, MassIsOne) {
    EXPECT_NEAR(z0_mass(GreenModel::isotropic(1.0, 1), 3.0).value, 1.0, 1e-6);
    EXPECT_NEAR(z0_mass(GreenModel::isotropic(0.8, 1), 1.0).value, 1.0, 1e-4);
    EXPECT_NEAR(z0_mass(GreenModel::isotropic(0.6, 2), 0.5).value, 1.0, 1e-3);
}

TEST(Caputo, ConstantsAndPowers) {
    {
        std::vector<double> f(50, 3.0);
        for (double v : caputo_l1(f, 0.1, 0.4)) EXPECT_EQ(v, 0.0);
    }
    auto at_one = [](auto fn, double alpha, int n) {
        std::vector<double> f(static_cast<std::size_t>(n + 1));
        for (int k = 0; k <= n; ++k) f[static_cast<std::size_t>(k)] = fn(static_cast<double>(k) / n);
        return caputo_l1(f, 1.0 / n, alpha).back();
    };
    // D^0.5 t = t^0.5 / Gamma(1.5); the L1 scheme is exact on linear functions.
    EXPECT_NEAR(at_one([](double t) { return t; }, 0.5, 64), 2.0 / std::sqrt(pi), 1e-12);
    // D^0.3 t^2 = 2 t^1.7 / Gamma(2.7): error shrinks with refinement.
    const double target = 2.0 / std::tgamma(2.7);
    const double e1 = std::abs(at_one([](double t) { return t * t; }, 0.3, 50) - target);
    const double e2 = std::abs(at_one([](double t) { return t * t; }, 0.3, 400) - target);
    EXPECT_LT(e2, e1 / 4.0);
    EXPECT_LT(e2, 2e-3);
    std::vector<double> two{1.0, 2.0};
    EXPECT_THROW((void)caputo_l1(two, 0.1, 0.5), Error);
}

TEST(Caputo, Psi0ResidualDecreasesUnderRefinement) {
    // Psi0 with u0 = exp(-x^2) solves D^alpha Psi0 = Psi0_xx for alpha = 0.8.
    ChaosConfig cfg;
    cfg.model = GreenModel::isotropic(0.8, 1);
    cfg = with_u0(cfg, [](std::span<const double> p) { return std::exp(-p[0] * p[0]); });
    std::vector<double> residual;
    for (int n : {16, 32, 64}) {
        std::vector<double> f(static_cast<std::size_t>(n + 1));
        f[0] = 1.0;
        double y0[] = {0.0};
        for (int k = 1; k <= n; ++k)
            f[static_cast<std::size_t>(k)] = psi0_at(cfg, static_cast<double>(k) / n, y0).value;
        const double h = 1.0 / n;
        double yp[] = {h}, ym[] = {-h};
        const double d2 = (psi0_at(cfg, 1.0, yp).value - 2.0 * f.back() + psi0_at(cfg, 1.0, ym).value) /
                          (h * h);
        residual.push_back(std::abs(caputo_l1(f, h, 0.8).back() - d2));
    }
    EXPECT_GE(residual[0] / residual[1], 1.5);
    EXPECT_GE(residual[1] / residual[2], 1.5);
}
