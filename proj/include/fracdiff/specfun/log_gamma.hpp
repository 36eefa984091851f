#pragma once

// Complex log-gamma on the principal branch.
//
// Re z >= 1/2 uses the g = 7, n = 9 Lanczos sum; the left half-plane goes
// through the reflection formula with the 2*pi*i bookkeeping that keeps the
// result on the branch continuous with the positive real axis. Near the zeros
// of log-gamma (z = 1, 2) a zeta-function Taylor series keeps the error
// relative rather than absolute.

#include <array>
#include <cmath>
#include <complex>
#include <numbers>

#include "fracdiff/error.hpp"

namespace fracdiff::specfun {

using cplx = std::complex<double>;

namespace detail {

inline constexpr std::array<double, 9> lanczos_coef = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};

inline constexpr double lanczos_g = 7.0;

// zeta(2) .. zeta(30)
inline constexpr std::array<double, 29> zeta_values = {
    1.644934066848226436472, 1.2020569031595942854,  1.082323233711138191516,
    1.036927755143369926331, 1.017343061984449139715, 1.00834927738192282684,
    1.004077356197944339379, 1.002008392826082214418, 1.000994575127818085337,
    1.000494188604119464559, 1.000246086553308048299, 1.000122713347578489147,
    1.000061248135058704829, 1.000030588236307020494, 1.000015282259408651872,
    1.000007637197637899762, 1.00000381729326499984,  1.000001908212716553939,
    1.000000953962033872796, 1.000000476932986787806, 1.000000238450502727733,
    1.000000119219925965311, 1.000000059608189051259, 1.000000029803503514652,
    1.000000014901554828365, 1.000000007450711789835, 1.000000003725334024788,
    1.000000001862659723513, 1.00000000093132743242};

inline constexpr double euler_gamma = 0.5772156649015328606065120900824024310422;
inline constexpr double taylor_radius = 0.2;

// log(1 + w) accurate for small w.
inline cplx log1p(cplx w) {
    const double re = std::log1p(2.0 * w.real() + std::norm(w)) * 0.5;
    const double im = std::atan2(w.imag(), 1.0 + w.real());
    return {re, im};
}

// log Gamma(1 + w), |w| <= taylor_radius.
inline cplx taylor_at_one(cplx w) {
    cplx power = -w;  // (-w)^k after the k-th update
    cplx sum = -euler_gamma * w;
    for (std::size_t k = 0; k < zeta_values.size(); ++k) {
        power *= -w;
        const double order = static_cast<double>(k + 2);
        sum += zeta_values[k] / order * power;
    }
    return sum;
}

inline cplx lanczos_log_gamma(cplx z) {
    const cplx zm = z - 1.0;
    cplx series = lanczos_coef[0];
    for (std::size_t k = 1; k < lanczos_coef.size(); ++k)
        series += lanczos_coef[k] / (zm + static_cast<double>(k));
    const cplx t = zm + lanczos_g + 0.5;
    return 0.5 * std::log(2.0 * std::numbers::pi) + (zm + 0.5) * std::log(t) - t +
           std::log(series);
}

// Principal log sin(pi z), evaluated without forming cosh/sinh of large arguments.
inline cplx log_sin_pi(cplx z) {
    const double pi = std::numbers::pi;
    const double r = z.real() - 2.0 * std::round(0.5 * z.real());  // reduced mod 2 into [-1, 1]
    const double s = std::sin(pi * r);
    const double c = std::cos(pi * r);
    const double y = pi * z.imag();
    const double ay = std::abs(y);
    double log_mod;
    if (ay < 20.0) {
        log_mod = 0.5 * std::log(s * s + std::sinh(y) * std::sinh(y));
    } else {
        const double e = std::exp(-2.0 * ay);
        log_mod = ay - std::log(2.0) + 0.5 * std::log1p(4.0 * s * s * e - 2.0 * e + e * e);
    }
    const double arg = std::atan2(c * std::tanh(y), s);
    return {log_mod, arg};
}

}  // namespace detail

/// Principal-branch log Gamma(z). Throws pole_of_gamma at nonpositive integers.
inline cplx log_gamma(cplx z) {
    if (z.imag() == 0.0 && z.real() <= 0.0 && z.real() == std::floor(z.real()))
        throw Error(ErrorCode::pole_of_gamma, "log_gamma evaluated at a nonpositive integer");
    if (std::abs(z - 1.0) <= detail::taylor_radius) return detail::taylor_at_one(z - 1.0);
    if (std::abs(z - 2.0) <= detail::taylor_radius)
        return detail::log1p(z - 2.0) + detail::taylor_at_one(z - 2.0);
    if (z.real() < 0.5) {
        const double branch =
            std::copysign(2.0 * std::numbers::pi, z.imag()) * std::floor(0.5 * z.real() + 0.25);
        return cplx(std::log(std::numbers::pi), branch) - detail::log_sin_pi(z) -
               log_gamma(1.0 - z);
    }
    return detail::lanczos_log_gamma(z);
}

/// Gamma(z) for complex z, through log_gamma.
inline cplx gamma(cplx z) { return std::exp(log_gamma(z)); }

/// Real log|Gamma(x)| and sign, in extended precision; used where residue terms need
/// more than double accuracy. Throws pole_of_gamma at nonpositive integers.
inline long double log_abs_gamma(long double x, int& sign) {
    if (x <= 0.0L && x == std::floor(x))
        throw Error(ErrorCode::pole_of_gamma, "gamma evaluated at a nonpositive integer");
    if (x > 0.0L) {
        sign = 1;
    } else {
        const long double f = std::floor(x);
        sign = (static_cast<long long>(f) % 2 == 0) ? 1 : -1;
    }
#if defined(__GLIBC__)
    int unused = 0;
    return ::lgammal_r(x, &unused);
#else
    return std::lgamma(x);
#endif
}

}  // namespace fracdiff::specfun
