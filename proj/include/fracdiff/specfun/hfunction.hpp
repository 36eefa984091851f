#pragma once

// Fox H-function H^{mn}_{pq}(z) for real z > 0.
//
//   H(z) = (1/2 pi i) \int_L G(s) z^{-s} ds,
//   G(s) = prod_{j<=m} Gamma(b_j + beta_j s) prod_{i<=n} Gamma(1 - a_i - alpha_i s)
//        / ( prod_{i>n} Gamma(a_i + alpha_i s) prod_{j>m} Gamma(1 - b_j - beta_j s) ).
//
// Two routes. The left loop is closed over the poles of the Gamma(b_j + beta_j s)
// factors and summed as a residue series in extended precision. The vertical
// line s = g + i tau is integrated numerically, with g placed at the minimum of
// |G(x) z^{-x}| on the real axis between the two pole families (the saddle), so
// the integrand carries little cancellation. Pole orders are counted across all
// factors, so a numerator pole cancelled by a denominator pole is recognized
// as regular.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fracdiff/error.hpp"
#include "fracdiff/quadrature.hpp"
#include "fracdiff/specfun/log_gamma.hpp"

namespace fracdiff::specfun {

/// One gamma-factor parameter pair: Gamma(shift + scale * s) in the lower row,
/// Gamma(shift + scale * s) or Gamma(1 - shift - scale * s) in the upper row.
struct GammaParam {
    double shift;
    double scale;
};

struct HFunctionSpec {
    int m = 0;
    int n = 0;
    std::vector<GammaParam> upper;  // (a_i, alpha_i), length p
    std::vector<GammaParam> lower;  // (b_j, beta_j), length q

    [[nodiscard]] int p() const { return static_cast<int>(upper.size()); }
    [[nodiscard]] int q() const { return static_cast<int>(lower.size()); }
};

/// H^{20}_{12}[z | (1,1); (d/2,1), (1,1)], which equals z^{d/2} e^{-z}.
inline HFunctionSpec exp_family_spec(double d) {
    return {2, 0, {{1.0, 1.0}}, {{0.5 * d, 1.0}, {1.0, 1.0}}};
}

enum class HMethod { residue, contour, automatic };

constexpr std::string_view to_string(HMethod m) noexcept {
    switch (m) {
        case HMethod::residue: return "residue";
        case HMethod::contour: return "contour";
        case HMethod::automatic: return "auto";
    }
    return "unknown";
}

struct PoleClash {
    int j, l;  // left family j, index l
    int i, k;  // right family i, index k
    double point;
};

struct ValidationReport {
    bool valid = true;
    std::optional<ErrorCode> error;
    std::string message;
    bool poles_separated = true;
    std::vector<PoleClash> clashes;  // at most a handful are kept
    double delta = 0.0;              // sum beta_j - sum alpha_i
    double decay_rate = 0.0;         // a*: |G(g + i tau)| ~ exp(-a* pi |tau| / 2)
    bool simple_left_poles = true;
    std::vector<std::string> contours;  // implemented contour kinds admissible for this spec
};

struct HValue {
    double value = 0.0;
    double error = 0.0;
    HMethod method = HMethod::residue;
    int terms = 0;  // residues summed, or integrand evaluations
};

namespace detail {

inline constexpr int max_residue_terms = 500;
inline constexpr int separation_depth = 200;
inline constexpr long double multiplicity_tol = 1e-10L;
inline constexpr double separation_tol = 1e-12;

// Gamma(c + sigma * g * s), in the numerator or the denominator of G.
struct Factor {
    double c;
    double g;
    int sigma;
    bool numerator;
};

inline std::vector<Factor> factors_of(const HFunctionSpec& h) {
    std::vector<Factor> out;
    for (int j = 0; j < h.q(); ++j) {
        const auto& b = h.lower[j];
        if (j < h.m) out.push_back({b.shift, b.scale, +1, true});
        else out.push_back({1.0 - b.shift, b.scale, -1, false});
    }
    for (int i = 0; i < h.p(); ++i) {
        const auto& a = h.upper[i];
        if (i < h.n) out.push_back({1.0 - a.shift, a.scale, -1, true});
        else out.push_back({a.shift, a.scale, +1, false});
    }
    return out;
}

// l >= 0 when x lies within tolerance of the nonpositive integer -l, else -1.
inline long long pole_index(long double x) {
    const long double r = std::round(x);
    if (r > 0.0L) return -1;
    if (std::abs(x - r) > multiplicity_tol * std::max(1.0L, std::abs(x))) return -1;
    return static_cast<long long>(-r);
}

// Walks the candidate left poles -(b_j + l)/beta_j, j < m, rightmost first, merging
// points that agree within tolerance. Each family is already ordered, so this is a merge.
class LeftPoleCursor {
public:
    explicit LeftPoleCursor(const HFunctionSpec& h, int depth) : h_(h), depth_(depth), next_(h.m, 0) {}

    bool next(long double& out) {
        for (;;) {
            int best = -1;
            long double best_pt = 0.0L;
            for (int j = 0; j < h_.m; ++j) {
                if (next_[j] >= depth_) continue;
                const long double p = point(j, next_[j]);
                if (best < 0 || p > best_pt) {
                    best = j;
                    best_pt = p;
                }
            }
            if (best < 0) return false;
            ++next_[best];
            if (has_last_ &&
                std::abs(last_ - best_pt) <= multiplicity_tol * std::max(1.0L, std::abs(best_pt)))
                continue;
            last_ = best_pt;
            has_last_ = true;
            out = best_pt;
            return true;
        }
    }

private:
    [[nodiscard]] long double point(int j, int l) const {
        return -(static_cast<long double>(h_.lower[j].shift) + l) / h_.lower[j].scale;
    }
    const HFunctionSpec& h_;
    int depth_;
    std::vector<int> next_;
    long double last_ = 0.0L;
    bool has_last_ = false;
};

inline std::vector<long double> left_pole_points(const HFunctionSpec& h, int depth) {
    std::vector<long double> merged;
    LeftPoleCursor cur(h, depth);
    for (long double s; cur.next(s);) merged.push_back(s);
    return merged;
}

struct ResidueTerm {
    int order = 0;
    int sign = 1;
    long double log_abs = 0.0L;
    long double weight = 0.0L;  // sum of |log| components, for the rounding estimate
};

// Residue of G(s) z^{-s} at s0 when s0 is a simple pole; order reports the pole order
// (numerator poles minus denominator poles, <= 0 meaning regular).
inline ResidueTerm residue_at(const std::vector<Factor>& fs, long double s0, long double log_z) {
    ResidueTerm r;
    r.log_abs = -s0 * log_z;
    r.weight = std::abs(r.log_abs);
    for (const auto& f : fs) {
        const long double x = f.c + f.sigma * static_cast<long double>(f.g) * s0;
        const long long l = pole_index(x);
        if (l >= 0) {
            // Gamma(-l + e) ~ (-1)^l / (l! e); the factor's e is sigma * g * (s - s0).
            const long double lf = std::lgamma(static_cast<long double>(l) + 1.0L) +
                                   std::log(static_cast<long double>(f.g));
            const int sgn = ((l % 2 == 0) ? 1 : -1) * f.sigma;
            r.order += f.numerator ? 1 : -1;
            r.log_abs += f.numerator ? -lf : lf;
            r.sign *= sgn;
            r.weight += std::abs(lf);
        } else {
            int sg = 1;
            const long double lg = log_abs_gamma(x, sg);
            r.log_abs += f.numerator ? lg : -lg;
            r.sign *= sg;
            r.weight += std::abs(lg);
        }
    }
    return r;
}

// Pole order of G at s0 without evaluating the residue.
inline int pole_order_at(const std::vector<Factor>& fs, long double s0) {
    int order = 0;
    for (const auto& f : fs)
        if (pole_index(f.c + f.sigma * static_cast<long double>(f.g) * s0) >= 0)
            order += f.numerator ? 1 : -1;
    return order;
}

enum class ResidueStatus { ok, multiple_pole, no_convergence };

struct ResidueOutcome {
    ResidueStatus status = ResidueStatus::ok;
    HValue value;
};

inline ResidueOutcome residue_sum(const HFunctionSpec& h, double z, double rel_tol) {
    const auto fs = factors_of(h);
    const long double log_z = std::log(static_cast<long double>(z));
    LeftPoleCursor cursor(h, max_residue_terms + 1);
    std::vector<long double> terms;
    std::vector<long double> weights;
    long double running = 0.0L;
    int quiet = 0;
    ResidueOutcome out;
    bool done = false;
    for (long double s0; cursor.next(s0);) {
        const auto r = residue_at(fs, s0, log_z);
        if (r.order <= 0) continue;
        if (r.order >= 2) {
            out.status = ResidueStatus::multiple_pole;
            return out;
        }
        const long double t = r.sign * std::exp(r.log_abs);
        terms.push_back(t);
        weights.push_back(r.weight);
        running += t;
        quiet = (std::abs(t) <= rel_tol * std::abs(running)) ? quiet + 1 : 0;
        if (quiet >= 5) {
            done = true;
            break;
        }
        if (static_cast<int>(terms.size()) >= max_residue_terms) break;
    }
    if (!done && !terms.empty()) {
        out.status = ResidueStatus::no_convergence;
        return out;
    }

    std::vector<std::size_t> idx(terms.size());
    for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = k;
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return std::abs(terms[a]) < std::abs(terms[b]); });
    long double sum = 0.0L;
    long double rounding = 0.0L;
    const long double eps_ld = std::numeric_limits<long double>::epsilon();
    const long double spread = std::sqrt(static_cast<long double>(terms.size()));
    for (std::size_t k : idx) {
        sum += terms[k];
        rounding += eps_ld * (4.0L + weights[k] + spread) * std::abs(terms[k]);
    }
    long double tail = 0.0L;
    if (terms.size() >= 2) {
        const long double last = std::abs(terms.back());
        const long double prev = std::abs(terms[terms.size() - 2]);
        const long double ratio = prev > 0.0L ? last / prev : 0.0L;
        tail = ratio < 0.5L ? last * ratio / (1.0L - ratio) : 5.0L * last;
    }
    out.value.value = static_cast<double>(sum);
    out.value.error = static_cast<double>(tail + rounding) +
                      std::numeric_limits<double>::epsilon() * std::abs(out.value.value);
    out.value.method = HMethod::residue;
    out.value.terms = static_cast<int>(terms.size());
    return out;
}

inline double decay_rate(const HFunctionSpec& h) {
    double a = 0.0;
    for (int j = 0; j < h.q(); ++j) a += (j < h.m ? 1.0 : -1.0) * h.lower[j].scale;
    for (int i = 0; i < h.p(); ++i) a += (i < h.n ? 1.0 : -1.0) * h.upper[i].scale;
    return a;
}

// log|G(x) z^{-x}| on the real axis; +/-inf at uncancelled poles and zeros.
inline double real_log_integrand(const std::vector<Factor>& fs, double x, double log_z) {
    long double acc = -static_cast<long double>(x) * log_z;
    for (const auto& f : fs) {
        const long double arg = f.c + f.sigma * static_cast<long double>(f.g) * x;
        if (arg <= 0.0L && arg == std::floor(arg))
            return f.numerator ? std::numeric_limits<double>::infinity()
                               : -std::numeric_limits<double>::infinity();
        int sg = 1;
        const long double lg = log_abs_gamma(arg, sg);
        acc += f.numerator ? lg : -lg;
    }
    return static_cast<double>(acc);
}

inline cplx complex_log_integrand(const std::vector<Factor>& fs, cplx s, double log_z) {
    cplx acc = -s * log_z;
    for (const auto& f : fs) {
        const cplx arg = f.c + static_cast<double>(f.sigma) * f.g * s;
        acc += f.numerator ? log_gamma(arg) : -log_gamma(arg);
    }
    return acc;
}

// Real-axis window strictly between the rightmost left pole and the leftmost right pole.
inline std::pair<double, double> separating_window(const HFunctionSpec& h,
                                                   const std::vector<Factor>& fs) {
    double lo = -std::numeric_limits<double>::infinity();
    for (long double s0 : left_pole_points(h, separation_depth)) {
        if (residue_at(fs, s0, 0.0L).order >= 1) {
            lo = static_cast<double>(s0);
            break;
        }
    }
    double hi = std::numeric_limits<double>::infinity();
    for (int i = 0; i < h.n; ++i)
        hi = std::min(hi, (1.0 - h.upper[i].shift) / h.upper[i].scale);
    return {lo, hi};
}

inline double saddle_abscissa(const HFunctionSpec& h, const std::vector<Factor>& fs, double z) {
    auto [lo, hi] = separating_window(h, fs);
    require(lo < hi, ErrorCode::unsupported_contour,
            "no vertical line separates the two pole families");
    double span_hi = hi;
    double span_lo = lo;
    const double d = [&] {
        double sb = 0.0, sa = 0.0;
        for (const auto& b : h.lower) sb += b.scale;
        for (const auto& a : h.upper) sa += a.scale;
        return sb - sa;
    }();
    const double reach = 10.0 + 2.0 * std::pow(std::max(z, 1.0), 1.0 / std::max(d, 0.5));
    if (!std::isfinite(span_lo)) span_lo = (std::isfinite(span_hi) ? span_hi : 0.0) - reach;
    if (!std::isfinite(span_hi)) span_hi = span_lo + reach;
    const double margin = std::min(0.05, 0.25 * (span_hi - span_lo));
    const double a = span_lo + margin;
    const double b = span_hi - margin;
    const double log_z = std::log(z);
    auto phi = [&](double x) {
        const double v = real_log_integrand(fs, x, log_z);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };
    constexpr int scan = 400;
    double best_x = 0.5 * (a + b);
    double best = phi(best_x);
    int best_k = -1;
    for (int k = 0; k <= scan; ++k) {
        const double x = a + (b - a) * k / scan;
        const double v = phi(x);
        if (v < best) {
            best = v;
            best_x = x;
            best_k = k;
        }
    }
    if (best_k < 0) return best_x;
    // Golden-section refinement in the bracketing cells.
    double l = a + (b - a) * std::max(best_k - 1, 0) / scan;
    double r = a + (b - a) * std::min(best_k + 1, scan) / scan;
    const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = r - ratio * (r - l);
    double x2 = l + ratio * (r - l);
    double f1 = phi(x1), f2 = phi(x2);
    for (int it = 0; it < 60 && r - l > 1e-9 * std::max(1.0, std::abs(l)); ++it) {
        if (f1 < f2) {
            r = x2;
            x2 = x1;
            f2 = f1;
            x1 = r - ratio * (r - l);
            f1 = phi(x1);
        } else {
            l = x1;
            x1 = x2;
            f1 = f2;
            x2 = l + ratio * (r - l);
            f2 = phi(x2);
        }
    }
    return 0.5 * (l + r);
}

inline HValue contour_integral(const HFunctionSpec& h, double z, double rel_tol) {
    const double a_star = decay_rate(h);
    require(a_star > 0.0, ErrorCode::unsupported_contour,
            "vertical-line integrand does not decay (a* <= 0)");
    const auto fs = factors_of(h);
    const double log_z = std::log(z);
    const double g = saddle_abscissa(h, fs, z);

    auto log_mod = [&](double tau) { return complex_log_integrand(fs, {g, tau}, log_z).real(); };
    const double peak = log_mod(0.0);
    constexpr double drop = 40.0;
    HValue out;
    out.method = HMethod::contour;
    // |integrand| peaks on the real axis; below this the whole integral underflows.
    if (peak < std::log(std::numeric_limits<double>::min()) - drop) return out;
    double tau_max = 1.0;
    const double reach = 150.0 / std::max(a_star, 1e-3) + 200.0 + 20.0 * std::abs(g);
    while (log_mod(tau_max) > peak - drop) {
        tau_max *= 1.5;
        if (tau_max > reach)
            throw Error(ErrorCode::quadrature_failure, "vertical-line integrand decays too slowly");
    }
    int evaluations = 0;
    auto integrand = [&](double tau) {
        ++evaluations;
        return std::exp(complex_log_integrand(fs, {g, tau}, log_z)).real() / std::numbers::pi;
    };
    auto magnitude = [&](double tau) {
        ++evaluations;
        return std::exp(log_mod(tau)) / std::numbers::pi;
    };

    constexpr int pieces = 32;
    std::vector<double> breaks(pieces + 1);
    for (int k = 0; k <= pieces; ++k) breaks[k] = tau_max * k / pieces;

    const double eps = std::numeric_limits<double>::epsilon();
    quad::Options loose{0.0, 1e-3, 500};
    const auto mass = quad::integrate_global(magnitude, breaks, loose);
    quad::Options opt{64.0 * eps * mass.value, 0.1 * rel_tol, 4000};
    const auto res = quad::integrate_global(integrand, breaks, opt);
    if (!res.converged && res.error > std::max(opt.abs_tol, rel_tol * std::abs(res.value)))
        throw Error(ErrorCode::quadrature_failure, "vertical-line quadrature did not converge");

    const double tail = std::exp(log_mod(tau_max)) / std::numbers::pi / (a_star * std::numbers::pi / 2.0);
    out.value = res.value;
    out.error = res.error + tail + 64.0 * eps * mass.value + eps * std::abs(res.value);
    out.terms = evaluations;
    return out;
}

}  // namespace detail

/// Structural validation: index ranges, positive scales, separation of the two pole
/// families over the first 200 poles of each, existence margin and contour kinds.
inline ValidationReport h_check(const HFunctionSpec& h) {
    ValidationReport rep;
    auto fail = [&](ErrorCode code, std::string msg) {
        rep.valid = false;
        if (!rep.error) {
            rep.error = code;
            rep.message = std::move(msg);
        }
    };
    if (h.m < 0 || h.m > h.q() || h.n < 0 || h.n > h.p())
        fail(ErrorCode::invalid_parameter, "require 0 <= m <= q and 0 <= n <= p");
    for (const auto& a : h.upper)
        if (!(a.scale > 0.0) || !std::isfinite(a.shift))
            fail(ErrorCode::invalid_parameter, "upper-row scales must be positive");
    for (const auto& b : h.lower)
        if (!(b.scale > 0.0) || !std::isfinite(b.shift))
            fail(ErrorCode::invalid_parameter, "lower-row scales must be positive");
    if (!rep.valid) return rep;

    for (const auto& b : h.lower) rep.delta += b.scale;
    for (const auto& a : h.upper) rep.delta -= a.scale;
    rep.decay_rate = detail::decay_rate(h);

    const int depth = detail::separation_depth;
    for (int j = 0; j < h.m; ++j) {
        for (int i = 0; i < h.n; ++i) {
            const auto& b = h.lower[j];
            const auto& a = h.upper[i];
            for (int l = 0; l <= depth; ++l) {
                const double left = (-b.shift - l) / b.scale;
                for (int k = 0; k <= depth; ++k) {
                    const double right = (1.0 - a.shift + k) / a.scale;
                    if (std::abs(left - right) <=
                        detail::separation_tol * std::max(1.0, std::abs(left))) {
                        rep.poles_separated = false;
                        if (rep.clashes.size() < 8) rep.clashes.push_back({j, l, i, k, left});
                    }
                }
            }
        }
    }
    if (!rep.poles_separated) {
        fail(ErrorCode::invalid_parameter, "pole-clash: left and right pole families intersect");
        return rep;
    }

    const auto fs = detail::factors_of(h);
    for (long double s0 : detail::left_pole_points(h, depth + 1)) {
        if (detail::pole_order_at(fs, s0) >= 2) {
            rep.simple_left_poles = false;
            break;
        }
    }
    if (rep.delta >= 0.0 && h.m > 0) rep.contours.emplace_back("left-loop");
    if (rep.decay_rate > 0.0) {
        auto [lo, hi] = detail::separating_window(h, fs);
        if (lo < hi) rep.contours.emplace_back("vertical-line");
    }
    if (rep.delta < 0.0)
        rep.message = "existence margin negative; only the vertical line may apply";
    return rep;
}

/// H^{mn}_{pq}(z) for z > 0 with an error estimate. The residue route needs simple left
/// poles and falls back to the vertical line otherwise; `automatic` takes the residue
/// series when its estimated error meets the tolerance.
/// Same as h_eval(h, z, ...) with the validation report of h supplied by the caller.
inline HValue h_eval(const HFunctionSpec& h, const ValidationReport& rep, double z,
                     HMethod method = HMethod::automatic, double rel_tol = 1e-10) {
    if (!rep.valid) throw Error(rep.error.value_or(ErrorCode::invalid_parameter), rep.message);
    require(z > 0.0 && std::isfinite(z), ErrorCode::invalid_parameter, "z must be positive");
    require(rel_tol > 0.0, ErrorCode::invalid_parameter, "tolerance must be positive");

    std::optional<HValue> series;
    if (method != HMethod::contour) {
        const auto r = detail::residue_sum(h, z, rel_tol);
        if (r.status == detail::ResidueStatus::ok) {
            if (method == HMethod::residue ||
                r.value.error <= rel_tol * std::abs(r.value.value))
                return r.value;
            series = r.value;
        } else if (r.status == detail::ResidueStatus::no_convergence &&
                   method == HMethod::residue) {
            throw Error(ErrorCode::non_convergence,
                        "residue terms not decreasing after 500 terms");
        }
    }
    try {
        auto c = detail::contour_integral(h, z, rel_tol);
        if (series && series->error < c.error) return *series;
        return c;
    } catch (const Error&) {
        if (series) return *series;
        throw;
    }
}

inline HValue h_eval(const HFunctionSpec& h, double z, HMethod method = HMethod::automatic,
                     double rel_tol = 1e-10) {
    return h_eval(h, h_check(h), z, method, rel_tol);
}

}  // namespace fracdiff::specfun
