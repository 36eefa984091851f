#pragma once

// Adaptive Gauss-Kronrod quadrature and fixed Gauss-Legendre rules.
//
// The 7/15 Kronrod pair and the error heuristic follow QUADPACK (qk15/qag).
// Everything here is stateless apart from the Gauss-Legendre node cache,
// which is built once per order under a mutex.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <mutex>
#include <queue>
#include <utility>
#include <vector>

#include "fracdiff/error.hpp"

namespace fracdiff::quad {

struct Options {
    double abs_tol = 1e-12;
    double rel_tol = 1e-10;
    int max_intervals = 2000;
};

struct Result {
    double value = 0.0;
    double error = 0.0;
    int evaluations = 0;
    bool converged = true;

    Result& operator+=(const Result& other) {
        value += other.value;
        error += other.error;
        evaluations += other.evaluations;
        converged = converged && other.converged;
        return *this;
    }
};

namespace detail {

inline constexpr std::array<double, 8> kronrod_x = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr std::array<double, 8> kronrod_w = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

// Gauss weights for kronrod_x[1], [3], [5], [7].
inline constexpr std::array<double, 4> gauss_w = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a, b, value, error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment gk15(F& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double res_k = fc * kronrod_w[7];
    double res_g = fc * gauss_w[3];
    double res_abs = std::abs(res_k);
    std::array<double, 7> f1{}, f2{};
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kronrod_x[j];
        f1[j] = f(center - dx);
        f2[j] = f(center + dx);
        const double sum = f1[j] + f2[j];
        res_k += kronrod_w[j] * sum;
        res_abs += kronrod_w[j] * (std::abs(f1[j]) + std::abs(f2[j]));
        if (j % 2 == 1) res_g += gauss_w[j / 2] * sum;
    }
    const double mean = 0.5 * res_k;
    double res_asc = kronrod_w[7] * std::abs(fc - mean);
    for (int j = 0; j < 7; ++j)
        res_asc += kronrod_w[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));

    const double value = res_k * half;
    res_abs *= std::abs(half);
    res_asc *= std::abs(half);
    double err = std::abs((res_k - res_g) * half);
    if (res_asc != 0.0 && err != 0.0)
        err = res_asc * std::min(1.0, std::pow(200.0 * err / res_asc, 1.5));
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (res_abs > std::numeric_limits<double>::min() / (50.0 * eps))
        err = std::max(err, 50.0 * eps * res_abs);
    return {a, b, value, err};
}

}  // namespace detail

/// Globally adaptive 15-point Gauss-Kronrod over [breaks.front(), breaks.back()], starting
/// from the given partition; the tolerance applies to the total, not per piece.
template <class F>
Result integrate_global(F&& f, const std::vector<double>& breaks, const Options& opt = {}) {
    Result out;
    std::priority_queue<detail::Segment> heap;
    double total = 0.0, total_err = 0.0;
    int intervals = 0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        if (breaks[i + 1] == breaks[i]) continue;
        auto seg = detail::gk15(f, breaks[i], breaks[i + 1]);
        total += seg.value;
        total_err += seg.error;
        heap.push(seg);
        out.evaluations += 15;
        ++intervals;
    }
    if (heap.empty()) return out;
    while (total_err > std::max(opt.abs_tol, opt.rel_tol * std::abs(total))) {
        if (intervals >= opt.max_intervals) {
            out.converged = false;
            break;
        }
        auto worst = heap.top();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > std::min(worst.a, worst.b) && mid < std::max(worst.a, worst.b))) {
            out.converged = false;  // interval exhausted at machine resolution
            break;
        }
        heap.pop();
        auto left = detail::gk15(f, worst.a, mid);
        auto right = detail::gk15(f, mid, worst.b);
        out.evaluations += 30;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++intervals;
    }
    // Re-sum to shed accumulated cancellation from the running updates.
    double value = 0.0, err = 0.0;
    while (!heap.empty()) {
        value += heap.top().value;
        err += heap.top().error;
        heap.pop();
    }
    out.value = value;
    out.error = err;
    return out;
}

/// Globally adaptive 15-point Gauss-Kronrod on [a, b].
template <class F>
Result integrate(F&& f, double a, double b, const Options& opt = {}) {
    if (a == b) return {};
    return integrate_global(f, std::vector<double>{a, b}, opt);
}

/// Integrate over consecutive breakpoints, each piece adaptively.
template <class F>
Result integrate_pieces(F&& f, const std::vector<double>& breaks, const Options& opt = {}) {
    Result out;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        if (breaks[i + 1] == breaks[i]) continue;
        out += integrate(f, breaks[i], breaks[i + 1], opt);
    }
    return out;
}

/// \int_0^L u^e g(u) du for e > -1, with the endpoint power removed by u = w^{1/(1+e)}.
/// `g` is called with the distance u itself so callers never lose it to cancellation.
template <class G>
Result integrate_power_weight(G&& g, double e, double length, const Options& opt = {}) {
    require(e > -1.0, ErrorCode::invalid_parameter, "power weight exponent must exceed -1");
    if (length <= 0.0) return {};
    const double k = 1.0 / (1.0 + e);
    const double upper = std::pow(length, 1.0 + e);
    auto h = [&](double w) { return g(std::min(length, std::pow(w, k))); };
    auto r = integrate(h, 0.0, upper, opt);
    r.value *= k;
    r.error *= k;
    return r;
}

/// \int_a^\infty f(x) dx over geometrically growing panels until the tail is negligible.
template <class F>
Result integrate_to_infinity(F&& f, double a, double scale, const Options& opt = {},
                             int max_panels = 80) {
    require(scale > 0.0, ErrorCode::invalid_parameter, "panel scale must be positive");
    Result out;
    double lo = a;
    double width = scale;
    int quiet = 0;
    for (int k = 0; k < max_panels; ++k) {
        const double hi = lo + width;
        auto piece = integrate(f, lo, hi, opt);
        out += piece;
        const double tol = std::max(opt.abs_tol, opt.rel_tol * std::abs(out.value));
        quiet = (std::abs(piece.value) <= 0.1 * tol) ? quiet + 1 : 0;
        if (quiet >= 2) return out;
        lo = hi;
        width *= 2.0;
    }
    out.converged = false;
    return out;
}

struct Rule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1], computed by Newton iteration and cached.
inline const Rule& gauss_legendre(int n) {
    static std::mutex mutex;
    static std::map<int, Rule> cache;
    std::lock_guard<std::mutex> lock(mutex);
    if (auto it = cache.find(n); it != cache.end()) return it->second;
    require(n >= 1, ErrorCode::invalid_parameter, "rule order must be positive");
    Rule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double pi = std::acos(-1.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return cache.emplace(n, std::move(rule)).first->second;
}

}  // namespace fracdiff::quad
