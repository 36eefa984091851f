#pragma once

// Fractional Brownian field with product covariance prod_i R_{H_i}(x_i, y_i),
// pinned at the origin; dense Cholesky sampling on tensor grids; and the inner
// product <f, g>_H = \int\int prod phi_H(u_i, v_i) f(u) g(v) du dv.

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "fracdiff/error.hpp"
#include "fracdiff/estimates.hpp"
#include "fracdiff/integrals.hpp"
#include "fracdiff/parallel.hpp"
#include "fracdiff/quadrature.hpp"
#include "fracdiff/rng.hpp"

namespace fracdiff {

/// R_H(x, y) = (|x|^{2H} + |y|^{2H} - |x - y|^{2H}) / 2.
inline double cov_R(double H, double x, double y) {
    require(H > 0.0 && H < 1.0, ErrorCode::invalid_parameter, "H must lie in (0, 1)");
    const double e = 2.0 * H;
    return 0.5 * (std::pow(std::abs(x), e) + std::pow(std::abs(y), e) - std::pow(std::abs(x - y), e));
}

/// H (2H - 1) |u - v|^{2H - 2}.
inline double phi_H(double H, double u, double v) {
    require(H > 0.5 && H < 1.0, ErrorCode::invalid_parameter, "H must lie in (1/2, 1)");
    require(u != v, ErrorCode::coincident_points, "phi_H is singular at u = v");
    return H * (2.0 * H - 1.0) * std::pow(std::abs(u - v), 2.0 * H - 2.0);
}

class FieldGrid {
public:
    /// Tensor grid; node index runs with the last axis fastest.
    FieldGrid(std::vector<std::vector<double>> axes, HurstVector H)
        : axes_(std::move(axes)), H_(std::move(H)) {
        require(!axes_.empty(), ErrorCode::invalid_parameter, "grid needs at least one axis");
        require(static_cast<int>(axes_.size()) == H_.dim(), ErrorCode::dimension_mismatch,
                "one Hurst parameter per axis is required");
        std::size_t count = 1;
        for (const auto& a : axes_) {
            require(!a.empty(), ErrorCode::invalid_parameter, "axes must be nonempty");
            count *= a.size();
        }
        require(count <= 4000, ErrorCode::dimension_too_large, "dense sampling supports <= 4000 nodes");
        const std::size_t d = axes_.size();
        nodes_.assign(count, std::vector<double>(d));
        for (std::size_t idx = 0; idx < count; ++idx) {
            std::size_t rest = idx;
            for (std::size_t k = d; k-- > 0;) {
                nodes_[idx][k] = axes_[k][rest % axes_[k].size()];
                rest /= axes_[k].size();
            }
        }
        const auto n = static_cast<Eigen::Index>(count);
        cov_.resize(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j <= i; ++j) {
                double c = 1.0;
                for (std::size_t k = 0; k < d; ++k)
                    c *= cov_R(H_[static_cast<int>(k)], nodes_[static_cast<std::size_t>(i)][k],
                               nodes_[static_cast<std::size_t>(j)][k]);
                cov_(i, j) = cov_(j, i) = c;
            }
    }

    [[nodiscard]] int dim() const { return static_cast<int>(axes_.size()); }
    [[nodiscard]] std::size_t size() const { return nodes_.size(); }
    [[nodiscard]] const std::vector<std::vector<double>>& axes() const { return axes_; }
    [[nodiscard]] const std::vector<double>& node(std::size_t i) const { return nodes_[i]; }
    [[nodiscard]] const HurstVector& hurst() const { return H_; }
    [[nodiscard]] const Eigen::MatrixXd& covariance() const { return cov_; }
    [[nodiscard]] bool factorized() const { return factorized_; }
    [[nodiscard]] double jitter() const { return jitter_; }
    [[nodiscard]] const std::vector<Eigen::Index>& active() const { return active_; }
    [[nodiscard]] const Eigen::MatrixXd& factor() const { return L_; }

    /// Cholesky of the covariance restricted to nodes of positive variance, with
    /// diagonal jitter escalated from 1e-14 to 1e-8 times trace/size if needed.
    void factorize() {
        if (factorized_) return;
        active_.clear();
        for (Eigen::Index i = 0; i < cov_.rows(); ++i)
            if (cov_(i, i) > 0.0) active_.push_back(i);
        const auto m = static_cast<Eigen::Index>(active_.size());
        Eigen::MatrixXd sub(m, m);
        for (Eigen::Index i = 0; i < m; ++i)
            for (Eigen::Index j = 0; j < m; ++j) sub(i, j) = cov_(active_[i], active_[j]);
        const double scale = m > 0 ? sub.trace() / static_cast<double>(m) : 0.0;
        for (double rel : {0.0, 1e-14, 1e-13, 1e-12, 1e-11, 1e-10, 1e-9, 1e-8}) {
            Eigen::MatrixXd shifted = sub;
            shifted.diagonal().array() += rel * scale;
            Eigen::LLT<Eigen::MatrixXd> llt(shifted);
            if (llt.info() == Eigen::Success) {
                L_ = llt.matrixL();
                jitter_ = rel * scale;
                factorized_ = true;
                return;
            }
        }
        throw Error(ErrorCode::not_psd, "covariance is not positive semidefinite within jitter budget");
    }

    /// One field realization at every node; pinned nodes are exactly 0.
    void draw(std::uint64_t seed, std::uint64_t index, std::span<double> out) const {
        require(factorized_, ErrorCode::invalid_parameter, "call factorize() before sampling");
        require(out.size() == size(), ErrorCode::dimension_mismatch, "output size mismatch");
        CounterStream rng(seed, index);
        const auto m = static_cast<Eigen::Index>(active_.size());
        Eigen::VectorXd z(m);
        for (Eigen::Index i = 0; i < m; ++i) z(i) = rng.normal();
        std::fill(out.begin(), out.end(), 0.0);
        for (Eigen::Index i = 0; i < m; ++i) {
            double acc = 0.0;
            for (Eigen::Index j = 0; j <= i; ++j) acc += L_(i, j) * z(j);
            out[static_cast<std::size_t>(active_[i])] = acc;
        }
    }

private:
    std::vector<std::vector<double>> axes_;
    HurstVector H_;
    std::vector<std::vector<double>> nodes_;
    Eigen::MatrixXd cov_;
    Eigen::MatrixXd L_;
    std::vector<Eigen::Index> active_;
    double jitter_ = 0.0;
    bool factorized_ = false;
};

/// Rows are samples, columns are grid nodes. Sample i uses stream (seed, i).
inline Eigen::MatrixXd sample_field(FieldGrid& grid, std::size_t n_samples, std::uint64_t seed,
                                    unsigned threads = 0) {
    grid.factorize();
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> out(
        static_cast<Eigen::Index>(n_samples), static_cast<Eigen::Index>(grid.size()));
    for_each_chunk(n_samples, 256, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
            grid.draw(seed, i,
                      std::span<double>(out.row(static_cast<Eigen::Index>(i)).data(), grid.size()));
    });
    return out;
}

namespace detail {

inline std::string format_g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

/// RFC-4180 CSV: header of node coordinates, one row per sample.
inline void write_samples_csv(std::ostream& os, const FieldGrid& grid, const Eigen::MatrixXd& samples) {
    for (std::size_t j = 0; j < grid.size(); ++j) {
        if (j) os << ',';
        std::string label;
        for (std::size_t k = 0; k < grid.node(j).size(); ++k) {
            if (k) label += ' ';
            label += detail::format_g17(grid.node(j)[k]);
        }
        os << '"' << label << '"';
    }
    os << "\r\n";
    for (Eigen::Index i = 0; i < samples.rows(); ++i) {
        for (Eigen::Index j = 0; j < samples.cols(); ++j) {
            if (j) os << ',';
            os << detail::format_g17(samples(i, j));
        }
        os << "\r\n";
    }
}

// ---------------------------------------------------------------------------

/// A function on a box of R^k, smooth inside; `breaks` lists interior kink
/// coordinates per axis.
struct BoxFunction {
    std::function<double(std::span<const double>)> f;
    std::vector<double> lo;
    std::vector<double> hi;
    std::vector<std::vector<double>> breaks;
};

inline BoxFunction indicator(double a, double b) {
    return {[](std::span<const double>) { return 1.0; }, {a}, {b}, {{}}};
}

namespace detail {

inline void validate_box(const BoxFunction& f, std::size_t k) {
    require(f.lo.size() == k && f.hi.size() == k, ErrorCode::dimension_mismatch,
            "function box has the wrong dimension");
    for (std::size_t i = 0; i < k; ++i)
        require(f.lo[i] < f.hi[i], ErrorCode::invalid_parameter, "function box must be nonempty");
}

inline std::vector<double> breakpoints(double a, double b, const std::vector<double>& extra) {
    std::vector<double> pts{a};
    for (double x : extra)
        if (x > a && x < b) pts.push_back(x);
    pts.push_back(b);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

// Cross-correlation K(w) = \int f(v + w) g(v) dv over the overlap of the boxes.
inline double cross_correlation(const BoxFunction& f, const BoxFunction& g, std::vector<double>& w,
                                std::vector<double>& v, std::vector<double>& u, std::size_t axis,
                                const quad::Options& opt) {
    const std::size_t k = w.size();
    if (axis == k) {
        for (std::size_t i = 0; i < k; ++i) u[i] = v[i] + w[i];
        return f.f(u) * g.f(v);
    }
    const double lo = std::max(g.lo[axis], f.lo[axis] - w[axis]);
    const double hi = std::min(g.hi[axis], f.hi[axis] - w[axis]);
    if (!(lo < hi)) return 0.0;
    std::vector<double> extra = axis < g.breaks.size() ? g.breaks[axis] : std::vector<double>{};
    if (axis < f.breaks.size())
        for (double b : f.breaks[axis]) extra.push_back(b - w[axis]);
    auto inner = [&](double x) {
        v[axis] = x;
        return cross_correlation(f, g, w, v, u, axis + 1, opt);
    };
    return quad::integrate_global(inner, breakpoints(lo, hi, extra), opt).value;
}

}  // namespace detail

/// <f, g>_H with k = n d integration variables on each side; coordinate j uses H_{j mod d}.
/// Substituting w = u - v leaves \int prod phi(w_j) K(w) dw with K the cross-correlation.
inline quad::Result inner_product_H(const BoxFunction& f, const BoxFunction& g, const HurstVector& H,
                                    int n = 1, double rel_tol = 1e-9) {
    require(n >= 1, ErrorCode::invalid_parameter, "chaos order must be positive");
    require(H.admissible(), ErrorCode::invalid_parameter, "inner product needs every H_i > 1/2");
    const auto k = static_cast<std::size_t>(n * H.dim());
    require(k <= 2, ErrorCode::dimension_too_large,
            "quadrature supports n d <= 2; use Monte Carlo estimation for larger orders");
    detail::validate_box(f, k);
    detail::validate_box(g, k);
    const quad::Options inner_opt{0.0, 0.01 * rel_tol, 2000};
    std::vector<double> w(k), v(k), u(k);

    std::function<double(std::size_t)> outer = [&](std::size_t axis) -> double {
        if (axis == k) return detail::cross_correlation(f, g, w, v, u, 0, inner_opt);
        const double Hj = H[static_cast<int>(axis % static_cast<std::size_t>(H.dim()))];
        const double lo = f.lo[axis] - g.hi[axis];
        const double hi = f.hi[axis] - g.lo[axis];
        // K has kinks where box faces or function breaks align.
        std::vector<Singularity> pts{{0.0, 2.0 * Hj - 2.0}};
        pts.push_back({f.lo[axis] - g.lo[axis], 0.0});
        pts.push_back({f.hi[axis] - g.hi[axis], 0.0});
        auto body = [&, axis](double x) {
            w[axis] = x;
            return Hj * (2.0 * Hj - 1.0) * outer(axis + 1);
        };
        const quad::Options opt{0.0, axis == 0 ? rel_tol : 0.1 * rel_tol, 2000};
        return singular_line_integral(body, pts, lo, hi, opt).value;
    };
    const double value = outer(0);
    return {value, std::abs(value) * rel_tol, 0, true};
}

}  // namespace fracdiff
