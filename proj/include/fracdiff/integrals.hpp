#pragma once

// Weighted envelope integrals, their scaling laws, the ordered-simplex
// (Dirichlet) integral, and the Theta_n bound series.
//
// Every line integral here has the form \int g(u) prod_k |u - c_k|^{e_k} du with
// g smooth apart from kinks. The line is cut at the singular points; each half
// segment next to a point c_k is integrated in the distance to c_k with the power
// removed by substitution, so no node ever sits at a singularity and distances
// are never formed by cancellation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "fracdiff/error.hpp"
#include "fracdiff/green.hpp"
#include "fracdiff/parallel.hpp"
#include "fracdiff/quadrature.hpp"
#include "fracdiff/rng.hpp"

namespace fracdiff {

struct Singularity {
    double at;
    double power;  // 0 for a plain breakpoint
};

namespace detail {

// Half-width beyond which p(s, .) < exp(-depth).
inline double envelope_radius(double alpha, double sigma, double s, double depth = 40.0) {
    return std::pow(depth / sigma, 0.5 * (2.0 - alpha)) * std::pow(s, 0.5 * alpha);
}

}  // namespace detail

/// \int_lo^hi g(u) prod_k |u - c_k|^{e_k} du.
template <class G>
quad::Result singular_line_integral(G&& g, const std::vector<Singularity>& points, double lo,
                                    double hi, const quad::Options& opt = {}) {
    require(lo < hi, ErrorCode::invalid_parameter, "integration range must be nonempty");
    std::vector<Singularity> inside, outside;
    double power_lo = 0.0, power_hi = 0.0;
    for (const auto& s : points) {
        if (s.at == lo) power_lo += s.power;
        else if (s.at == hi) power_hi += s.power;
        else if (s.at > lo && s.at < hi) inside.push_back(s);
        else if (s.power != 0.0) outside.push_back(s);
    }
    std::sort(inside.begin(), inside.end(),
              [](const Singularity& a, const Singularity& b) { return a.at < b.at; });
    std::vector<Singularity> nodes{{lo, power_lo}};
    for (const auto& s : inside) {
        if (nodes.back().at == s.at) nodes.back().power += s.power;
        else nodes.push_back(s);
    }
    nodes.push_back({hi, power_hi});

    // Integrand at u = anchor + dir * v, excluding the anchor's own power.
    auto value_at = [&](std::size_t anchor, int dir, double v) {
        const double a = nodes[anchor].at;
        const double u = a + dir * v;
        double w = g(u);
        for (std::size_t k = 0; k < nodes.size(); ++k) {
            if (k == anchor || nodes[k].power == 0.0) continue;
            const double dist = std::abs((a - nodes[k].at) + dir * v);
            w *= std::pow(dist, nodes[k].power);
        }
        for (const auto& s : outside) w *= std::pow(std::abs(u - s.at), s.power);
        return w;
    };
    auto half = [&](std::size_t anchor, int dir, double length) {
        auto h = [&](double v) { return value_at(anchor, dir, v); };
        return quad::integrate_power_weight(h, nodes[anchor].power, length, opt);
    };

    quad::Result total;
    for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
        const double len = nodes[k + 1].at - nodes[k].at;
        total += half(k, +1, 0.5 * len);
        total += half(k + 1, -1, 0.5 * len);
    }
    return total;
}

/// \int |x|^beta p(s, x - xi) dx.
inline quad::Result weighted_integral_1d(double beta, double alpha, double sigma, double s,
                                         double xi, const quad::Options& opt = {1e-14, 1e-11, 2000}) {
    require(beta > -1.0 && beta <= 0.0, ErrorCode::invalid_parameter, "beta must lie in (-1, 0]");
    require(s > 0.0 && sigma > 0.0, ErrorCode::invalid_parameter, "s and sigma must be positive");
    const double Y = detail::envelope_radius(alpha, sigma, s);
    auto g = [&](double x) { return envelope_p(alpha, sigma, s, x - xi); };
    auto r = singular_line_integral(g, {{0.0, beta}, {xi, 0.0}}, xi - Y, xi + Y, opt);
    if (!r.converged) throw Error(ErrorCode::quadrature_failure, "weighted integral did not converge");
    return r;
}

/// \int |x|^beta |log|x|| p(s, x - xi) dx.
inline quad::Result weighted_log_integral_1d(double beta, double alpha, double sigma, double s,
                                             double xi,
                                             const quad::Options& opt = {1e-14, 1e-11, 2000}) {
    require(beta > -1.0 && beta <= 0.0, ErrorCode::invalid_parameter, "beta must lie in (-1, 0]");
    require(s > 0.0 && sigma > 0.0, ErrorCode::invalid_parameter, "s and sigma must be positive");
    const double Y = detail::envelope_radius(alpha, sigma, s);
    auto g = [&](double x) {
        return std::abs(std::log(std::abs(x))) * envelope_p(alpha, sigma, s, x - xi);
    };
    auto r = singular_line_integral(g, {{0.0, beta}, {xi, 0.0}, {-1.0, 0.0}, {1.0, 0.0}}, xi - Y,
                                    xi + Y, opt);
    if (!r.converged)
        throw Error(ErrorCode::quadrature_failure, "weighted log integral did not converge");
    return r;
}

/// \int |rho1 - tau1|^theta1 |rho2 - rho1|^theta2 p(ds, rho2 - rho1) d rho1.
inline quad::Result convolution_bound_1d(double theta1, double theta2, double ds, double rho2,
                                         double tau1, double alpha, double sigma = 1.0,
                                         const quad::Options& opt = {0.0, 1e-11, 2000}) {
    require(theta1 > -1.0 && theta1 < 0.0, ErrorCode::invalid_parameter,
            "theta1 must lie in (-1, 0)");
    require(theta2 > -1.0 && theta2 <= 0.0, ErrorCode::invalid_parameter,
            "theta2 must lie in (-1, 0]");
    require(ds > 0.0, ErrorCode::invalid_parameter, "time increment must be positive");
    const double D = rho2 - tau1;
    require(D != 0.0, ErrorCode::coincident_points, "rho2 and tau1 coincide");
    // u = rho2 - rho1, so rho1 - tau1 = D - u.
    const double Y = detail::envelope_radius(alpha, sigma, ds);
    auto g = [&](double u) { return envelope_p(alpha, sigma, ds, u); };
    auto r = singular_line_integral(g, {{0.0, theta2}, {D, theta1}}, -Y, Y, opt);
    if (!r.converged)
        throw Error(ErrorCode::quadrature_failure, "convolution integral did not converge");
    return r;
}

struct DoubleIntegralExponents {
    std::string regime;  // "sum>-1", "sum<-1", "sum=-1"
    double s_exponent;   // exponent of (s2 - s1) in the one-sided bound
    double r_exponent;   // exponent of (r2 - r1) in the one-sided bound
    double symmetric;    // exponent of each variable in the symmetrized bound
};

inline DoubleIntegralExponents double_integral_exponents(double theta1, double theta2,
                                                         double alpha) {
    const double sum = theta1 + theta2;
    if (std::abs(sum + 1.0) <= 1e-12)
        return {"sum=-1", 0.0, alpha * (theta2 + 1.0) / 2.0, alpha * (theta2 + 1.0) / 4.0};
    if (sum > -1.0)
        return {"sum>-1", alpha * (sum + 1.0) / 2.0, alpha * (theta2 + 1.0) / 2.0,
                alpha * (theta1 + 2.0 * theta2 + 2.0) / 4.0};
    return {"sum<-1", 0.0, alpha * (theta1 + 2.0 * theta2 + 2.0) / 2.0,
            alpha * (theta1 + 2.0 * theta2 + 2.0) / 4.0};
}

/// \int\int |rho1 - tau1|^theta1 |rho2 - rho1|^theta2 |tau2 - tau1|^theta2
///          p(ds, rho2 - rho1) p(dr, tau2 - tau1) d rho1 d tau1.
inline quad::Result double_integral_bound(double theta1, double theta2, double ds, double dr,
                                          double rho2, double tau2, double alpha,
                                          double sigma = 1.0, double rel_tol = 1e-8) {
    require(theta1 > -1.0 && theta1 < 0.0 && theta2 > -1.0 && theta2 <= 0.0 &&
                theta1 + 2.0 * theta2 > -2.0,
            ErrorCode::invalid_parameter,
            "require -1 < theta1 < 0, -1 < theta2 <= 0 and theta1 + 2 theta2 > -2");
    require(ds > 0.0 && dr > 0.0, ErrorCode::invalid_parameter, "time increments must be positive");
    const double delta = rho2 - tau2;
    const quad::Options inner_opt{0.0, 0.01 * rel_tol, 2000};
    // v = tau2 - tau1; the inner integral is the convolution with rho2 - tau1 = delta + v,
    // which behaves like |delta + v|^{min(0, 1 + theta1 + theta2)} near v = -delta.
    const double inner_power = std::min(0.0, 1.0 + theta1 + theta2);
    auto h = [&](double v) {
        const double D = delta + v;
        const double inner =
            convolution_bound_1d(theta1, theta2, ds, D, 0.0, alpha, sigma, inner_opt).value;
        return envelope_p(alpha, sigma, dr, v) * inner * std::pow(std::abs(D), -inner_power);
    };
    const double Y = detail::envelope_radius(alpha, sigma, dr);
    const std::vector<Singularity> pts{{0.0, theta2}, {-delta, inner_power}};
    auto r = singular_line_integral(h, pts, -Y, Y, {0.0, rel_tol, 2000});
    if (!r.converged) throw Error(ErrorCode::quadrature_failure, "double integral did not converge");
    return r;
}

/// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    require(x.size() == y.size() && x.size() >= 2, ErrorCode::invalid_parameter,
            "slope fit needs at least two matching points");
    double mx = 0.0, my = 0.0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += std::log(x[i]) / n;
        my += std::log(y[i]) / n;
    }
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

/// Exponent e of a power law with a logarithmic factor, y ~ x^e (a + b |log x|):
/// the e for which x^{-e} y is closest to linear in log x (relative least squares).
inline double loglog_slope_with_log(const std::vector<double>& x, const std::vector<double>& y) {
    require(x.size() == y.size() && x.size() >= 3, ErrorCode::invalid_parameter,
            "log-corrected slope fit needs at least three matching points");
    const std::size_t n = x.size();
    auto misfit = [&](double e) {
        std::vector<double> L(n), v(n);
        for (std::size_t i = 0; i < n; ++i) {
            L[i] = std::abs(std::log(x[i]));
            v[i] = y[i] * std::pow(x[i], -e);
        }
        double mL = 0.0, mv = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            mL += L[i] / n;
            mv += v[i] / n;
        }
        double sLL = 0.0, sLv = 0.0, svv = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            sLL += (L[i] - mL) * (L[i] - mL);
            sLv += (L[i] - mL) * (v[i] - mv);
        }
        const double b = sLv / sLL;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = v[i] - mv - b * (L[i] - mL);
            svv += r * r;
        }
        double norm = 0.0;
        for (double vi : v) norm += vi * vi;
        return svv / norm;
    };
    // Coarse scan around the plain slope, then golden-section refinement.
    const double center = loglog_slope(x, y);
    double best = center, best_val = misfit(center);
    for (int k = -200; k <= 200; ++k) {
        const double e = center + 0.005 * k;
        const double v = misfit(e);
        if (v < best_val) {
            best_val = v;
            best = e;
        }
    }
    double lo = best - 0.005, hi = best + 0.005;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
    for (int it = 0; it < 80; ++it) {
        if (misfit(c) < misfit(d)) hi = d;
        else lo = c;
        c = hi - gr * (hi - lo);
        d = lo + gr * (hi - lo);
    }
    return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Ordered simplex 0 <= s_1 < ... < s_n <= T with weight prod (s_k - s_{k-1})^{p_k - 1}, s_0 = 0.

struct SimplexSpec {
    std::vector<double> p;
    double T = 1.0;
};

inline void validate(const SimplexSpec& s) {
    require(!s.p.empty(), ErrorCode::invalid_parameter, "simplex order must be positive");
    for (double v : s.p) require(v > 0.0, ErrorCode::invalid_parameter, "exponents must be positive");
    require(s.T > 0.0, ErrorCode::invalid_parameter, "horizon must be positive");
}

/// T^{sum p} prod Gamma(p_k) / Gamma(sum p + 1).
inline double simplex_formula(const SimplexSpec& s) {
    validate(s);
    double sum = 0.0, lg = 0.0;
    for (double v : s.p) {
        sum += v;
        lg += std::lgamma(v);
    }
    return std::exp(sum * std::log(s.T) + lg - std::lgamma(sum + 1.0));
}

/// The same with T^n in place of T^{sum p}; coincides with the formula iff sum p = n.
inline double simplex_formula_power_n(const SimplexSpec& s) {
    validate(s);
    double sum = 0.0;
    for (double v : s.p) sum += v;
    return simplex_formula(s) * std::pow(s.T, static_cast<double>(s.p.size()) - sum);
}

enum class SimplexSampler {
    stick_breaking,  // importance sampling with bounded weights (default)
    sorted_uniform,  // order statistics of uniforms; infinite variance when some p_k < 1/2
};

struct McEstimate {
    double mean = 0.0;
    double variance = 0.0;
    double std_error = 0.0;
    std::uint64_t samples = 0;
};

namespace detail {

// log of prod (s_k - s_{k-1})^{p_k - 1} at an ordered point.
inline double log_simplex_weight(const std::vector<double>& p, const std::vector<double>& s) {
    double acc = 0.0, prev = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        acc += (p[k] - 1.0) * std::log(s[k] - prev);
        prev = s[k];
    }
    return acc;
}

}  // namespace detail

/// Monte Carlo estimate of the simplex integral. The integrand is evaluated at actual
/// simplex points, so the power of T comes out of the sampling rather than a formula.
///
/// Stick-breaking parametrizes s_k = T v_k v_{k+1} ... v_n with Jacobian
/// T^n prod_k v_k^{k-1}; each v_k is drawn from the mixture
/// (1/2) a v^{a-1} + (1/2) b (1-v)^{b-1}, a = min(p_1 + ... + p_k, 1), b = min(p_{k+1}, 1),
/// which keeps the importance weights bounded.
inline McEstimate simplex_mc(const SimplexSpec& spec, std::uint64_t samples, std::uint64_t seed,
                             SimplexSampler sampler = SimplexSampler::stick_breaking,
                             unsigned threads = 0) {
    validate(spec);
    require(samples >= 10000, ErrorCode::invalid_parameter, "simplex MC needs at least 1e4 samples");
    const std::size_t n = spec.p.size();
    std::vector<double> a(n), b(n), P(n);
    double cum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        cum += spec.p[k];
        P[k] = cum;
        a[k] = std::min(cum, 1.0);
        b[k] = std::min(k + 1 < n ? spec.p[k + 1] : 1.0, 1.0);
    }
    const double logT = std::log(spec.T);
    const double log_volume = static_cast<double>(n) * logT - std::lgamma(static_cast<double>(n) + 1.0);

    auto one_sample = [&](std::uint64_t index, std::vector<double>& v, std::vector<double>& s) {
        CounterStream rng(seed, index);
        if (sampler == SimplexSampler::sorted_uniform) {
            for (std::size_t k = 0; k < n; ++k) s[k] = spec.T * rng.uniform();
            std::sort(s.begin(), s.end());
            return std::exp(log_volume + detail::log_simplex_weight(spec.p, s));
        }
        double log_q = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double pick = rng.uniform();
            const double u = rng.uniform();
            v[k] = pick < 0.5 ? std::pow(u, 1.0 / a[k]) : 1.0 - std::pow(u, 1.0 / b[k]);
            v[k] = std::clamp(v[k], std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
            const double q = 0.5 * a[k] * std::pow(v[k], a[k] - 1.0) +
                             0.5 * b[k] * std::pow(1.0 - v[k], b[k] - 1.0);
            log_q += std::log(q);
        }
        // s_k = T prod_{j >= k} v_j; log-Jacobian n log T + sum_k (k - 1) log v_k (1-based k).
        double acc = logT;
        double log_jac = static_cast<double>(n) * logT;
        for (std::size_t k = n; k-- > 0;) {
            acc += std::log(v[k]);
            s[k] = std::exp(acc);
            log_jac += static_cast<double>(k) * std::log(v[k]);
        }
        // Differences in log form: s_k - s_{k-1} = s_k (1 - v_{k-1}) for k >= 2, s_1 for k = 1.
        double log_w = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double log_gap = std::log(s[k]) + (k == 0 ? 0.0 : std::log1p(-v[k - 1]));
            log_w += (spec.p[k] - 1.0) * log_gap;
        }
        return std::exp(log_w + log_jac - log_q);
    };

    constexpr std::size_t chunk = 4096;
    const std::size_t chunks = (samples + chunk - 1) / chunk;
    std::vector<Moments> parts(chunks);
    for_each_chunk(samples, chunk, threads, [&](std::size_t c, std::size_t begin, std::size_t end) {
        std::vector<double> v(n), s(n);
        Moments m;
        for (std::size_t i = begin; i < end; ++i) m.add(one_sample(i, v, s));
        parts[c] = m;
    });
    Moments total;
    for (const auto& m : parts) total.merge(m);
    return {total.mean, total.variance(), total.std_error(), samples};
}

// ---------------------------------------------------------------------------
// Theta_n bound series  sum_{n=1}^N C^n / Gamma(2 n (ell + 1)).

struct ThetaSeries {
    std::vector<double> terms;
    std::vector<double> partial_sums;
    bool within_theorem = false;       // 2 (ell + 1) > 1
    bool boundary = false;             // 2 (ell + 1) within 1e-9 of 1
    bool eventually_decreasing = false;  // ratio test on the trailing terms
    double last_ratio = 0.0;
    double tail_estimate = 0.0;        // geometric bound on the omitted tail
    bool overflow = false;
};

inline ThetaSeries theta_tail_series(double ell, double C, int N) {
    require(N >= 1 && N <= 10000, ErrorCode::invalid_parameter, "N must lie in [1, 1e4]");
    require(C > 0.0, ErrorCode::invalid_parameter, "C must be positive");
    require(ell > -1.0, ErrorCode::invalid_parameter, "ell must exceed -1");
    ThetaSeries out;
    const double rate = 2.0 * (ell + 1.0);
    out.within_theorem = rate > 1.0;
    out.boundary = std::abs(rate - 1.0) <= 1e-9;
    std::vector<double> logs(static_cast<std::size_t>(N));
    double sum = 0.0;
    for (int n = 1; n <= N; ++n) {
        const double lt = n * std::log(C) - std::lgamma(rate * n);
        logs[static_cast<std::size_t>(n - 1)] = lt;
        const double t = std::exp(lt);
        if (!std::isfinite(t)) out.overflow = true;
        out.terms.push_back(t);
        sum += t;
        out.partial_sums.push_back(sum);
    }
    const int window = std::max(1, std::min(10, N / 2));
    bool decreasing = N >= 2;
    for (int k = N - window; k < N && decreasing; ++k)
        if (k >= 1 && logs[static_cast<std::size_t>(k)] >= logs[static_cast<std::size_t>(k - 1)])
            decreasing = false;
    out.eventually_decreasing = decreasing;
    if (N >= 2) {
        out.last_ratio = std::exp(logs[static_cast<std::size_t>(N - 1)] -
                                  logs[static_cast<std::size_t>(N - 2)]);
        const double r = out.last_ratio;
        out.tail_estimate = r < 1.0 ? out.terms.back() * r / (1.0 - r)
                                    : std::numeric_limits<double>::infinity();
    }
    return out;
}

/// Exponent ell used in the borderline theta1 + theta2 = -1 branch of the chaos bound.
inline double ell_borderline(int d, double alpha, double kappa_d, double eps) {
    return (d * eps + kappa_d + d) * alpha / 4.0;
}

}  // namespace fracdiff
