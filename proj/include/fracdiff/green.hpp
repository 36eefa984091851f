#pragma once

// Constant-coefficient fundamental solutions of D_t^alpha u = sum a_ij d_i d_j u.
//
//   Z0(t,x) = pi^{-d/2} (det A)^{-1/2} Q^{-d/2} H^{20}_{12}[Q / (4 t^alpha) | (1,alpha); (d/2,1),(1,1)]
//   Y0(t,x) = t^{alpha-1} pi^{-d/2} (det A)^{-1/2} Q^{-d/2} H^{20}_{12}[... | (alpha,alpha); ...]
//
// with Q = x^T A^{-1} x. At alpha = 1 both reduce to the Gaussian heat kernel,
// which is evaluated in closed form.

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "fracdiff/error.hpp"
#include "fracdiff/quadrature.hpp"
#include "fracdiff/specfun/hfunction.hpp"

namespace fracdiff {

class GreenModel {
public:
    GreenModel(double alpha, Eigen::MatrixXd A) : alpha_(alpha), A_(std::move(A)) {
        require(alpha > 0.0 && alpha <= 1.0, ErrorCode::invalid_parameter,
                "alpha must lie in (0, 1]");
        require(A_.rows() >= 1 && A_.rows() == A_.cols(), ErrorCode::dimension_mismatch,
                "coefficient matrix must be square");
        require((A_ - A_.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * A_.cwiseAbs().maxCoeff(),
                ErrorCode::invalid_parameter, "coefficient matrix must be symmetric");
        Eigen::LLT<Eigen::MatrixXd> llt(A_);
        require(llt.info() == Eigen::Success, ErrorCode::invalid_parameter,
                "coefficient matrix must be positive definite");
        A_inv_ = llt.solve(Eigen::MatrixXd::Identity(A_.rows(), A_.cols()));
        const auto L = llt.matrixL();
        double log_det = 0.0;
        for (Eigen::Index i = 0; i < A_.rows(); ++i) log_det += 2.0 * std::log(L(i, i));
        det_ = std::exp(log_det);
    }

    static GreenModel isotropic(double alpha, int d) {
        require(d >= 1, ErrorCode::invalid_parameter, "dimension must be positive");
        return {alpha, Eigen::MatrixXd::Identity(d, d)};
    }

    [[nodiscard]] double alpha() const { return alpha_; }
    [[nodiscard]] int dim() const { return static_cast<int>(A_.rows()); }
    [[nodiscard]] const Eigen::MatrixXd& A() const { return A_; }
    [[nodiscard]] const Eigen::MatrixXd& A_inv() const { return A_inv_; }
    [[nodiscard]] double det() const { return det_; }

private:
    double alpha_;
    Eigen::MatrixXd A_;
    Eigen::MatrixXd A_inv_;
    double det_ = 1.0;
};

struct EnvelopeParams {
    double C = 1.0;
    double sigma = 1.0;
};

/// x^T A^{-1} x.
inline double quad_form(const GreenModel& model, std::span<const double> x) {
    require(static_cast<int>(x.size()) == model.dim(), ErrorCode::dimension_mismatch,
            "point dimension does not match the model");
    const Eigen::Map<const Eigen::VectorXd> v(x.data(), static_cast<Eigen::Index>(x.size()));
    return std::max(0.0, v.dot(model.A_inv() * v));
}

/// exp(-sigma t^{-alpha/(2-alpha)} r^{2/(2-alpha)}) for a distance r >= 0.
inline double envelope_p(double alpha, double sigma, double t, double r) {
    require(t > 0.0 && alpha > 0.0 && alpha < 2.0, ErrorCode::invalid_parameter,
            "envelope needs t > 0 and alpha in (0, 2)");
    if (r == 0.0) return 1.0;
    const double k = 2.0 - alpha;
    return std::exp(-sigma * std::pow(t, -alpha / k) * std::pow(std::abs(r), 2.0 / k));
}

inline double envelope_p(double alpha, double sigma, double t, std::span<const double> x) {
    double r2 = 0.0;
    for (double v : x) r2 += v * v;
    return envelope_p(alpha, sigma, t, std::sqrt(r2));
}

/// Exact decay constant of Z0 in the envelope variable (Q t^{-alpha})^{1/(2-alpha)}; 1/4 at alpha = 1.
inline double kernel_decay_rate(double alpha) {
    return (1.0 - 0.5 * alpha) * std::pow(0.5 * alpha, alpha / (2.0 - alpha));
}

namespace detail {

inline double gaussian_kernel(const GreenModel& m, double t, double Q) {
    const int d = m.dim();
    return std::pow(4.0 * std::numbers::pi * t, -0.5 * d) / std::sqrt(m.det()) *
           std::exp(-Q / (4.0 * t));
}

// Shared body of Z0 and Y0; Y0 has upper pair (alpha, alpha) and an extra t^{alpha-1}.
inline double kernel_from_q(const GreenModel& m, double t, double Q, bool y_kernel,
                            specfun::HMethod method) {
    require(t > 0.0, ErrorCode::invalid_parameter, "t must be positive");
    const double alpha = m.alpha();
    const int d = m.dim();
    const double upper_shift = y_kernel ? alpha : 1.0;
    const double time_factor = y_kernel ? std::pow(t, alpha - 1.0) : 1.0;
    if (alpha == 1.0) return gaussian_kernel(m, t, Q);
    if (Q == 0.0) {
        require(d == 1, ErrorCode::singular_point, "kernel is singular at x = 0 for d >= 2");
        // Leading residue at s = -1/2.
        return time_factor * std::pow(t, -0.5 * alpha) /
               (2.0 * std::tgamma(upper_shift - 0.5 * alpha) * std::sqrt(m.det()));
    }
    const specfun::HFunctionSpec spec{
        2, 0, {{upper_shift, alpha}}, {{0.5 * d, 1.0}, {1.0, 1.0}}};
    // The parameter family repeats across calls; validate it once per thread.
    struct Cached {
        double shift = -1.0, alpha = -1.0;
        int d = 0;
        specfun::ValidationReport rep;
    };
    thread_local Cached cache;
    if (cache.shift != upper_shift || cache.alpha != alpha || cache.d != d)
        cache = {upper_shift, alpha, d, specfun::h_check(spec)};
    const double w = 0.25 * std::pow(t, -alpha) * Q;
    const double h = specfun::h_eval(spec, cache.rep, w, method).value;
    return time_factor * std::pow(std::numbers::pi, -0.5 * d) / std::sqrt(m.det()) *
           std::pow(Q, -0.5 * d) * h;
}

}  // namespace detail

/// Z0(t, x) through the quadratic form value Q = x^T A^{-1} x.
inline double z0_from_quad(const GreenModel& m, double t, double Q,
                           specfun::HMethod method = specfun::HMethod::automatic) {
    return detail::kernel_from_q(m, t, Q, false, method);
}

inline double y0_from_quad(const GreenModel& m, double t, double Q,
                           specfun::HMethod method = specfun::HMethod::automatic) {
    return detail::kernel_from_q(m, t, Q, true, method);
}

inline double z0_eval(const GreenModel& m, double t, std::span<const double> x,
                      specfun::HMethod method = specfun::HMethod::automatic) {
    return z0_from_quad(m, t, quad_form(m, x), method);
}

inline double y0_eval(const GreenModel& m, double t, std::span<const double> x,
                      specfun::HMethod method = specfun::HMethod::automatic) {
    return y0_from_quad(m, t, quad_form(m, x), method);
}

namespace detail {

inline std::vector<double> difference(std::span<const double> x, std::span<const double> xi) {
    require(x.size() == xi.size(), ErrorCode::dimension_mismatch, "point dimensions differ");
    std::vector<double> d(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) d[i] = x[i] - xi[i];
    return d;
}

}  // namespace detail

/// Two-point forms Z0(t, x, xi) = Z0(t, x - xi), likewise Y0.
inline double z0_eval(const GreenModel& m, double t, std::span<const double> x,
                      std::span<const double> xi,
                      specfun::HMethod method = specfun::HMethod::automatic) {
    return z0_eval(m, t, detail::difference(x, xi), method);
}

inline double y0_eval(const GreenModel& m, double t, std::span<const double> x,
                      std::span<const double> xi,
                      specfun::HMethod method = specfun::HMethod::automatic) {
    return y0_eval(m, t, detail::difference(x, xi), method);
}

/// Radius in the A-metric beyond which the Z0 envelope tail is negligible.
inline double truncation_radius(double alpha, double t, double tail = 1e-8) {
    const double sigma = 0.5 * kernel_decay_rate(alpha);
    const double k = 2.0 - alpha;
    // sigma (r^2 / t^alpha)^{1/k} = log(1/tail) + margin
    const double level = std::log(1.0 / tail) + 6.0;
    return std::sqrt(std::pow(level / sigma, k) * std::pow(t, alpha));
}

/// \int Z0(t, x) dx over R^d in radial coordinates of the A-metric, d in {1, 2}.
inline quad::Result z0_mass(const GreenModel& m, double t) {
    require(t > 0.0, ErrorCode::invalid_parameter, "t must be positive");
    const int d = m.dim();
    require(d == 1 || d == 2, ErrorCode::dimension_mismatch, "mass quadrature supports d = 1, 2");
    const double R = truncation_radius(m.alpha(), t);
    const double scale = std::sqrt(m.det());
    // Z0 depends on x only through r^2 = Q; dx = sqrt(det A) * (surface) r^{d-1} dr.
    auto radial = [&](double r) {
        const double z = z0_from_quad(m, t, r * r);
        return (d == 1 ? 2.0 : 2.0 * std::numbers::pi * r) * z * scale;
    };
    std::vector<double> breaks{0.0};
    const double core = std::sqrt(std::pow(t, m.alpha()));
    for (double b = core * 1e-6; b < R; b *= 4.0) breaks.push_back(b);
    breaks.push_back(R);
    quad::Options opt{1e-12, 1e-10, 4000};
    auto res = quad::integrate_global(radial, breaks, opt);
    if (!res.converged)
        throw Error(ErrorCode::quadrature_failure, "mass quadrature did not converge");
    return res;
}

/// L1 discretization of the Caputo derivative on a uniform grid t_k = k h.
/// Entry 0 is set to 0; entry n uses f_0..f_n.
inline std::vector<double> caputo_l1(std::span<const double> f, double h, double alpha) {
    require(f.size() >= 3, ErrorCode::insufficient_grid, "need at least three grid points");
    require(h > 0.0, ErrorCode::invalid_parameter, "grid step must be positive");
    require(alpha > 0.0 && alpha < 1.0, ErrorCode::invalid_parameter, "alpha must lie in (0, 1)");
    const std::size_t N = f.size();
    std::vector<double> b(N);
    for (std::size_t k = 0; k < N; ++k)
        b[k] = std::pow(static_cast<double>(k + 1), 1.0 - alpha) -
               std::pow(static_cast<double>(k), 1.0 - alpha);
    const double c = std::pow(h, -alpha) / std::tgamma(2.0 - alpha);
    std::vector<double> out(N, 0.0);
    for (std::size_t n = 1; n < N; ++n) {
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) acc += b[k] * (f[n - k] - f[n - k - 1]);
        out[n] = c * acc;
    }
    return out;
}

}  // namespace fracdiff
