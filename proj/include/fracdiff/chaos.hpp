#pragma once

// First chaos terms of the mild solution with constant coefficients:
//   Psi0(t, x) = \int Z0(t, x - xi) u0(xi) dxi
//   F(y)       = \int_0^t Y0(t - s, x - y) Psi0(s, y) ds
//   Psi1       = \int F(y) W^H(dy),  E[Psi1^2] = <F, F>_H
// and the convergence diagnosis built from the Theta_n bound series.

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fracdiff/error.hpp"
#include "fracdiff/estimates.hpp"
#include "fracdiff/field.hpp"
#include "fracdiff/green.hpp"
#include "fracdiff/integrals.hpp"
#include "fracdiff/parallel.hpp"
#include "fracdiff/quadrature.hpp"

namespace fracdiff {

struct ChaosConfig {
    GreenModel model = GreenModel::isotropic(0.8, 1);
    HurstVector H{{0.75}};
    /// Initial condition. When `u0_constant` is set, u0 is that constant and Psi0 equals
    /// it identically (Z0 has unit mass), which the F kernel then uses directly.
    std::function<double(std::span<const double>)> u0;
    std::optional<double> u0_constant = 1.0;
    bool u0_holder = false;  // Holder continuity of u0, needed when d > 1
    double T = 1.0;
    double t = 0.5;
    std::vector<double> x{0.0};
    int panels = 14;          // graded panels per side of x for tabulating F
    int panel_order = 12;     // Chebyshev-Lobatto nodes per panel minus one
    int space_cells = 64;     // field cells for the Monte Carlo route
    double half_width = 0.0;  // 0 selects the envelope truncation radius
    std::uint64_t mc_samples = 10000;
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
};

inline ChaosConfig with_constant_u0(ChaosConfig cfg, double c) {
    cfg.u0_constant = c;
    cfg.u0 = nullptr;
    return cfg;
}

inline ChaosConfig with_u0(ChaosConfig cfg, std::function<double(std::span<const double>)> u0) {
    cfg.u0_constant.reset();
    cfg.u0 = std::move(u0);
    return cfg;
}

namespace detail {

inline void validate(const ChaosConfig& c) {
    require(c.t > 0.0 && c.t <= c.T, ErrorCode::invalid_parameter, "require 0 < t <= T");
    require(static_cast<int>(c.x.size()) == c.model.dim(), ErrorCode::dimension_mismatch,
            "evaluation point dimension does not match the model");
    require(c.H.dim() == c.model.dim(), ErrorCode::dimension_mismatch,
            "one Hurst parameter per space dimension is required");
    require(c.u0_constant.has_value() || static_cast<bool>(c.u0), ErrorCode::invalid_parameter,
            "an initial condition is required");
    require(c.panels >= 2 && c.panel_order >= 2 && c.space_cells >= 2, ErrorCode::invalid_parameter,
            "discretization sizes are too small");
    if (c.u0_constant) {
        require(std::isfinite(*c.u0_constant), ErrorCode::invalid_parameter, "u0 must be finite");
        return;
    }
    require(c.model.dim() == 1 || c.u0_holder, ErrorCode::invalid_parameter,
            "d > 1 needs a Holder continuous u0 (set u0_holder)");
    // Boundedness, checked on axis lines through x across the envelope window.
    const double reach = truncation_radius(c.model.alpha(), c.t, 1e-6);
    std::vector<double> p(c.x);
    for (std::size_t axis = 0; axis < p.size(); ++axis)
        for (int k = -20; k <= 20; ++k) {
            p = c.x;
            p[axis] += reach * k / 20.0;
            require(std::isfinite(c.u0(p)), ErrorCode::invalid_parameter, "u0 must be bounded");
        }
}

inline double u0_at(const ChaosConfig& c, std::span<const double> p) {
    return c.u0_constant ? *c.u0_constant : c.u0(p);
}

// Half-width of the space window, in the coordinates of x.
inline double chaos_half_width(const ChaosConfig& c) {
    if (c.half_width > 0.0) return c.half_width;
    const double scale = std::sqrt(c.model.A().diagonal().maxCoeff());
    return scale * truncation_radius(c.model.alpha(), c.t, 1e-6);
}

}  // namespace detail

/// Psi0(s, y) by radial quadrature in the A-metric, d in {1, 2}.
inline quad::Result psi0_at(const ChaosConfig& cfg, double s, std::span<const double> y) {
    detail::validate(cfg);
    const GreenModel& m = cfg.model;
    const int d = m.dim();
    require(d == 1 || d == 2, ErrorCode::dimension_mismatch, "Psi0 quadrature supports d = 1, 2");
    require(s > 0.0, ErrorCode::invalid_parameter, "time must be positive");
    require(static_cast<int>(y.size()) == d, ErrorCode::dimension_mismatch, "point dimension mismatch");
    const Eigen::MatrixXd L = Eigen::LLT<Eigen::MatrixXd>(m.A()).matrixL();
    const double jac = std::sqrt(m.det());
    constexpr int n_angles = 64;
    std::vector<double> xi(static_cast<std::size_t>(d));
    // xi = y - L z with |z| = r, so Q = r^2 and dxi = sqrt(det A) dz.
    auto radial = [&](double r) {
        const double z = z0_from_quad(m, s, r * r);
        if (d == 1) {
            xi[0] = y[0] - L(0, 0) * r;
            double acc = detail::u0_at(cfg, xi);
            xi[0] = y[0] + L(0, 0) * r;
            acc += detail::u0_at(cfg, xi);
            return jac * z * acc;
        }
        double acc = 0.0;
        for (int k = 0; k < n_angles; ++k) {
            const double th = 2.0 * std::numbers::pi * (k + 0.5) / n_angles;
            const double z1 = r * std::cos(th), z2 = r * std::sin(th);
            xi[0] = y[0] - L(0, 0) * z1;
            xi[1] = y[1] - (L(1, 0) * z1 + L(1, 1) * z2);
            acc += detail::u0_at(cfg, xi);
        }
        return jac * z * r * (2.0 * std::numbers::pi / n_angles) * acc;
    };
    const double R = truncation_radius(m.alpha(), s);
    std::vector<double> breaks{0.0};
    const double core = std::sqrt(std::pow(s, m.alpha()));
    for (double b = core * 1e-6; b < R; b *= 4.0) breaks.push_back(b);
    breaks.push_back(R);
    auto res = quad::integrate_global(radial, breaks, {1e-13, 1e-10, 4000});
    if (!res.converged) throw Error(ErrorCode::quadrature_failure, "Psi0 quadrature did not converge");
    return res;
}

inline double psi0(const ChaosConfig& cfg) { return psi0_at(cfg, cfg.t, cfg.x).value; }

namespace detail {

// Self-similarity Z0(s, x) = s^{-alpha d/2} Z0(1, s^{-alpha/2} x) turns Psi0 into
//   Psi0(s, y) = sqrt(det A) \int Z0(1, L z) u0(y - s^{alpha/2} L z) dz,
// so one radial rule, weighted by Z0(1, .), serves every (s, y).
struct Psi0Rule {
    double alpha = 0.0;
    Eigen::MatrixXd A;
    Eigen::MatrixXd L;
    std::vector<double> rho;
    std::vector<double> weight;
};

inline constexpr int psi0_rule_angles = 64;

inline Psi0Rule make_psi0_rule(const GreenModel& m) {
    const int d = m.dim();
    require(d == 1 || d == 2, ErrorCode::dimension_mismatch, "Psi0 rule supports d = 1, 2");
    Psi0Rule rule{m.alpha(), m.A(), Eigen::LLT<Eigen::MatrixXd>(m.A()).matrixL(), {}, {}};
    const double jac = std::sqrt(m.det());
    const double R = truncation_radius(m.alpha(), 1.0, 1e-14);
    std::vector<double> edges{0.0};
    for (double b = 1e-10; b < std::min(1.0, R); b *= 2.0) edges.push_back(b);
    for (double b = 1.0; b < R; b += 0.25) edges.push_back(b);
    edges.push_back(R);
    const auto& gl = quad::gauss_legendre(16);
    for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
        const double mid = 0.5 * (edges[k] + edges[k + 1]), half = 0.5 * (edges[k + 1] - edges[k]);
        for (std::size_t j = 0; j < gl.nodes.size(); ++j) {
            const double r = mid + half * gl.nodes[j];
            double w = half * gl.weights[j] * jac * z0_from_quad(m, 1.0, r * r);
            if (d == 2) w *= r * 2.0 * std::numbers::pi / psi0_rule_angles;
            rule.rho.push_back(r);
            rule.weight.push_back(w);
        }
    }
    return rule;
}

inline const Psi0Rule& psi0_rule(const GreenModel& m) {
    thread_local std::vector<Psi0Rule> cache;
    for (const auto& r : cache)
        if (r.alpha == m.alpha() && r.A.rows() == m.A().rows() && r.A == m.A()) return r;
    if (cache.size() >= 8) cache.erase(cache.begin());
    cache.push_back(make_psi0_rule(m));
    return cache.back();
}

inline double psi0_by_rule(const Psi0Rule& rule, const ChaosConfig& cfg, double s,
                           std::span<const double> y) {
    const double scale = std::pow(s, 0.5 * rule.alpha);
    const auto d = static_cast<std::size_t>(rule.L.rows());
    double acc = 0.0;
    std::array<double, 2> xi{};
    const std::span<const double> p(xi.data(), d);
    for (std::size_t k = 0; k < rule.rho.size(); ++k) {
        const double r = scale * rule.rho[k];
        double v = 0.0;
        if (d == 1) {
            xi[0] = y[0] - rule.L(0, 0) * r;
            v = u0_at(cfg, p);
            xi[0] = y[0] + rule.L(0, 0) * r;
            v += u0_at(cfg, p);
        } else {
            for (int a = 0; a < psi0_rule_angles; ++a) {
                const double th = 2.0 * std::numbers::pi * (a + 0.5) / psi0_rule_angles;
                const double z1 = r * std::cos(th), z2 = r * std::sin(th);
                xi[0] = y[0] - rule.L(0, 0) * z1;
                xi[1] = y[1] - (rule.L(1, 0) * z1 + rule.L(1, 1) * z2);
                v += u0_at(cfg, p);
            }
        }
        acc += rule.weight[k] * v;
    }
    return acc;
}

}  // namespace detail

/// F(y) = \int_0^t Y0(tau, x - y) Psi0(t - tau, y) dtau.
inline double f1_kernel(const ChaosConfig& cfg, std::span<const double> y) {
    detail::validate(cfg);
    const GreenModel& m = cfg.model;
    const int d = m.dim();
    require(static_cast<int>(y.size()) == d, ErrorCode::dimension_mismatch, "point dimension mismatch");
    if (cfg.u0_constant && *cfg.u0_constant == 0.0) return 0.0;
    std::vector<double> diff(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) diff[static_cast<std::size_t>(i)] = cfg.x[i] - y[i];
    const double Q = quad_form(m, diff);
    require(Q > 0.0 || d == 1, ErrorCode::singular_point, "F is singular at y = x for d >= 2");
    const double alpha = m.alpha();
    const detail::Psi0Rule* rule = cfg.u0_constant ? nullptr : &detail::psi0_rule(m);
    auto psi = [&](double s) { return rule ? detail::psi0_by_rule(*rule, cfg, s, y) : 1.0; };
    quad::Result r;
    if (d == 1) {
        // Y0(tau, .) ~ tau^{alpha/2 - 1}; the power is removed by substitution.
        const double e = 0.5 * alpha - 1.0;
        auto g = [&](double tau) {
            return y0_from_quad(m, tau, Q) * std::pow(tau, -e) * psi(cfg.t - tau);
        };
        r = quad::integrate_power_weight(g, e, cfg.t, {1e-14, 1e-10, 4000});
    } else {
        auto g = [&](double tau) { return y0_from_quad(m, tau, Q) * psi(cfg.t - tau); };
        std::vector<double> breaks{0.0};
        for (double b = cfg.t * std::pow(4.0, -30); b < cfg.t; b *= 4.0) breaks.push_back(b);
        breaks.push_back(cfg.t);
        r = quad::integrate_global(g, breaks, {1e-14, 1e-10, 4000});
    }
    if (!r.converged) throw Error(ErrorCode::quadrature_failure, "F kernel quadrature did not converge");
    return cfg.u0_constant ? *cfg.u0_constant * r.value : r.value;
}

/// F tabulated on Chebyshev-Lobatto panels, graded geometrically toward y = x (d = 1).
class F1Table {
public:
    explicit F1Table(const ChaosConfig& cfg) : x_(cfg.x.at(0)), half_(detail::chaos_half_width(cfg)) {
        detail::validate(cfg);
        require(cfg.model.dim() == 1, ErrorCode::dimension_mismatch, "F tables are one-dimensional");
        const int P = cfg.panels, n = cfg.panel_order;
        edges_.push_back(0.0);
        for (int k = P - 1; k >= 0; --k) edges_.push_back(half_ * std::pow(0.5, k));
        for (int j = 0; j <= n; ++j) {
            cheb_.push_back(-std::cos(std::numbers::pi * j / n));
            bary_.push_back((j == 0 || j == n ? 0.5 : 1.0) * (j % 2 == 0 ? 1.0 : -1.0));
        }
        // A constant u0 makes F a function of |y - x|; otherwise tabulate both sides.
        const bool symmetric = cfg.u0_constant.has_value();
        for (int side : {+1, -1}) {
            auto& vals = side > 0 ? right_ : left_;
            if (side < 0 && symmetric) {
                left_ = right_;
                break;
            }
            vals.assign(static_cast<std::size_t>(P), std::vector<double>(static_cast<std::size_t>(n + 1)));
            std::vector<std::pair<std::size_t, std::size_t>> jobs;
            for (std::size_t p = 0; p < static_cast<std::size_t>(P); ++p)
                for (std::size_t j = 0; j <= static_cast<std::size_t>(n); ++j) jobs.emplace_back(p, j);
            for_each_chunk(jobs.size(), 1, cfg.threads, [&](std::size_t, std::size_t b, std::size_t e) {
                for (std::size_t i = b; i < e; ++i) {
                    const auto [p, j] = jobs[i];
                    const double r = node(p, j);
                    const double y = x_ + side * r;
                    vals[p][j] = f1_kernel(cfg, std::span<const double>(&y, 1));
                }
            });
        }
        for (const auto* side : {&left_, &right_})
            for (const auto& panel : *side)
                for (double v : panel) peak_ = std::max(peak_, std::abs(v));
    }

    [[nodiscard]] double operator()(double y) const {
        const double r = std::abs(y - x_);
        if (r >= half_) return 0.0;
        const auto& vals = y >= x_ ? right_ : left_;
        const auto it = std::upper_bound(edges_.begin(), edges_.end(), r);
        const std::size_t p = std::min<std::size_t>(static_cast<std::size_t>(it - edges_.begin()) - 1,
                                                    vals.size() - 1);
        const double a = edges_[p], b = edges_[p + 1];
        const double s = (2.0 * r - a - b) / (b - a);
        double num = 0.0, den = 0.0;
        for (std::size_t j = 0; j < cheb_.size(); ++j) {
            const double dx = s - cheb_[j];
            if (dx == 0.0) return vals[p][j];
            const double w = bary_[j] / dx;
            num += w * vals[p][j];
            den += w;
        }
        return num / den;
    }

    [[nodiscard]] double center() const { return x_; }
    [[nodiscard]] double half_width() const { return half_; }
    [[nodiscard]] double peak() const { return peak_; }
    /// Largest |F| at the window boundary relative to the peak.
    [[nodiscard]] double edge_ratio() const {
        if (peak_ == 0.0) return 0.0;
        return std::max(std::abs(left_.back().back()), std::abs(right_.back().back())) / peak_;
    }
    /// Breakpoints in y: the panel edges on both sides of x.
    [[nodiscard]] std::vector<double> breaks() const {
        std::vector<double> out;
        for (double e : edges_) {
            out.push_back(x_ + e);
            if (e > 0.0) out.push_back(x_ - e);
        }
        std::sort(out.begin(), out.end());
        return out;
    }

private:
    [[nodiscard]] double node(std::size_t p, std::size_t j) const {
        const double a = edges_[p], b = edges_[p + 1];
        return 0.5 * (a + b) + 0.5 * (b - a) * cheb_[j];
    }

    double x_;
    double half_;
    std::vector<double> edges_;
    std::vector<double> cheb_;
    std::vector<double> bary_;
    std::vector<std::vector<double>> right_, left_;
    double peak_ = 0.0;
};

/// <F, F>_H by singular quadrature (d = 1).
inline quad::Result psi1_moment_exact(const F1Table& F, const HurstVector& H, double rel_tol = 1e-9) {
    if (F.peak() == 0.0) return {};
    BoxFunction f{[&F](std::span<const double> u) { return F(u[0]); },
                  {F.center() - F.half_width()},
                  {F.center() + F.half_width()},
                  {F.breaks()}};
    return inner_product_H(f, f, H, 1, rel_tol);
}

inline quad::Result psi1_moment_exact(const ChaosConfig& cfg, double rel_tol = 1e-9) {
    return psi1_moment_exact(F1Table(cfg), cfg.H, rel_tol);
}

struct Psi1Estimate {
    double mean = 0.0;
    double variance = 0.0;
    double std_error = 0.0;            // of the mean
    double second_moment = 0.0;
    double second_moment_error = 0.0;  // standard error of the second moment
    double discretized_moment = 0.0;   // exact E[Psi1^2] of the cell discretization
    std::uint64_t samples = 0;
    int cells = 0;
};

/// Psi1 = sum_k F(mid_k) (W(e_{k+1}) - W(e_k)) over uniform cells of the window around x.
inline Psi1Estimate psi1_mc(const ChaosConfig& cfg, const F1Table& F) {
    detail::validate(cfg);
    require(cfg.seed.has_value(), ErrorCode::invalid_parameter, "Monte Carlo needs a seed");
    require(cfg.mc_samples >= 2, ErrorCode::invalid_parameter, "need at least two samples");
    if (F.peak() > 0.0)
        require(F.edge_ratio() < 1e-6, ErrorCode::grid_coverage,
                "field window does not cover the support of F (edge ratio >= 1e-6)");
    const int n = cfg.space_cells;
    const double a = F.center() - F.half_width();
    const double h = 2.0 * F.half_width() / n;
    std::vector<double> edges(static_cast<std::size_t>(n + 1)), fmid(static_cast<std::size_t>(n));
    for (int k = 0; k <= n; ++k) edges[static_cast<std::size_t>(k)] = a + h * k;
    for (int k = 0; k < n; ++k) fmid[static_cast<std::size_t>(k)] = F(a + h * (k + 0.5));

    FieldGrid grid({edges}, cfg.H);
    grid.factorize();
    const Eigen::MatrixXd& C = grid.covariance();
    double disc = 0.0;
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            const double c = C(j + 1, k + 1) - C(j + 1, k) - C(j, k + 1) + C(j, k);
            disc += fmid[static_cast<std::size_t>(j)] * fmid[static_cast<std::size_t>(k)] * c;
        }

    constexpr std::size_t chunk = 512;
    const std::size_t N = cfg.mc_samples;
    std::vector<Moments> first((N + chunk - 1) / chunk), second(first.size());
    for_each_chunk(N, chunk, cfg.threads, [&](std::size_t c, std::size_t begin, std::size_t end) {
        std::vector<double> w(grid.size());
        Moments m1, m2;
        for (std::size_t i = begin; i < end; ++i) {
            grid.draw(*cfg.seed, i, w);
            double psi = 0.0;
            for (int k = 0; k < n; ++k)
                psi += fmid[static_cast<std::size_t>(k)] *
                       (w[static_cast<std::size_t>(k + 1)] - w[static_cast<std::size_t>(k)]);
            m1.add(psi);
            m2.add(psi * psi);
        }
        first[c] = m1;
        second[c] = m2;
    });
    Moments m1, m2;
    for (std::size_t c = 0; c < first.size(); ++c) {
        m1.merge(first[c]);
        m2.merge(second[c]);
    }
    Psi1Estimate out;
    out.mean = m1.mean;
    out.variance = m1.variance();
    out.std_error = m1.std_error();
    out.second_moment = m2.mean;
    out.second_moment_error = m2.std_error();
    out.discretized_moment = disc;
    out.samples = N;
    out.cells = n;
    return out;
}

inline Psi1Estimate psi1_mc(const ChaosConfig& cfg) { return psi1_mc(cfg, F1Table(cfg)); }

// ---------------------------------------------------------------------------

struct ConvergenceReport {
    ExponentTable table;
    Verdict conditions;
    ThetaSeries theta;
    double theta_constant = 10.0;
    std::string verdict;  // "yes", "no" or "boundary"
};

/// Assembles the exponents, the condition verdicts and the Theta_n bound partial sums.
/// The constant C of the bound C^n / Gamma(2n(ell + 1)) absorbs the Gamma(ell + 1)^n factor.
inline ConvergenceReport convergence_report(double alpha, const HurstVector& H, double gamma,
                                            double gamma0, int N = 50, double C = 10.0) {
    ConvergenceReport rep;
    rep.conditions = check_conditions(alpha, H, gamma, gamma0);
    rep.table = rep.conditions.table;
    rep.theta_constant = C;
    const double ell = rep.table.ell;
    if (ell > -1.0) rep.theta = theta_tail_series(ell, C, N);
    if (rep.conditions.boundary || rep.theta.boundary) rep.verdict = "boundary";
    else if (rep.conditions.overall && rep.theta.within_theorem) rep.verdict = "yes";
    else rep.verdict = "no";
    return rep;
}

inline ConvergenceReport convergence_report(const ChaosConfig& cfg, double gamma, double gamma0,
                                            int N = 50, double C = 10.0) {
    return convergence_report(cfg.model.alpha(), cfg.H, gamma, gamma0, N, C);
}

}  // namespace fracdiff
