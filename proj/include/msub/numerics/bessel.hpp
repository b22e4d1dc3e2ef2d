#pragma once

#include <cmath>
#include <limits>
#include <utility>

#include "msub/core.hpp"

namespace msub {

namespace detail {

inline constexpr double euler_gamma = 0.57721566490153286060651209008240243;

/// K0 and K1 by their ascending series, for 0 < x <= 2.
inline std::pair<double, double> bessel_k01_series(double x) {
    const double y = 0.25 * x * x;
    const double lh = std::log(0.5 * x);
    // I0, I1 and the digamma-weighted companion sums.
    double t0 = 1.0;     // y^k / (k!)^2
    double t1 = 1.0;     // y^k / (k!(k+1)!)
    double h = 0.0;      // harmonic number H_k
    double i0 = 0.0, i1 = 0.0, s0 = 0.0, s1 = 0.0;
    for (int k = 0; k < 60; ++k) {
        if (k > 0) {
            t0 *= y / (static_cast<double>(k) * k);
            t1 *= y / (static_cast<double>(k) * (k + 1));
            h += 1.0 / k;
        }
        i0 += t0;
        i1 += t1;
        s0 += h * t0;
        // psi(k+1) + psi(k+2) = 2 H_k + 1/(k+1) - 2 gamma
        s1 += (2.0 * h + 1.0 / (k + 1) - 2.0 * euler_gamma) * t1;
        if (t0 < 1e-18 * i0 && t1 < 1e-18 * i1) break;
    }
    i1 *= 0.5 * x;
    const double k0 = -(lh + euler_gamma) * i0 + s0;
    const double k1 = 1.0 / x + lh * i1 - 0.25 * x * s1;
    return {k0, k1};
}

/// e^x K0(x) and e^x K1(x) by Steed's continued fraction (Temme), for x > 2; Hankel expansion beyond 1e6.
inline std::pair<double, double> bessel_k01_scaled_cf(double x) {
    if (x > 1e6) {
        const double lead = std::sqrt(pi / (2.0 * x)), r = 1.0 / x;
        return {lead * (1.0 - 0.125 * r + 9.0 / 128.0 * r * r), lead * (1.0 + 0.375 * r - 15.0 / 128.0 * r * r)};
    }
    double b = 2.0 * (1.0 + x);
    double d = 1.0 / b;
    double h = d, delh = d;
    double q1 = 0.0, q2 = 1.0;
    const double a1 = 0.25;
    double q = a1, c = a1, a = -a1;
    double s = 1.0 + q * delh;
    for (int i = 1; i < 10000; ++i) {
        a -= 2 * i;
        c = -a * c / (i + 1.0);
        const double qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        const double dels = q * delh;
        s += dels;
        if (std::abs(dels / s) < 1e-17) break;
    }
    h = a1 * h;
    const double k0 = std::sqrt(pi / (2.0 * x)) / s;
    const double k1 = k0 * (x + 0.5 - h) / x;
    return {k0, k1};
}

}  // namespace detail

/// Modified Bessel function of the second kind, order 1.
inline double bessel_k1(double x) {
    require(x > 0.0, "bessel_k1: x must be positive");
    if (x < 1e-300) throw numerical_error("bessel_k1: argument too small, K1(x) ~ 1/x overflows");
    if (x <= 2.0) return detail::bessel_k01_series(x).second;
    return detail::bessel_k01_scaled_cf(x).second * std::exp(-x);
}

/// e^x K1(x), finite for large x.
inline double bessel_k1_scaled(double x) {
    require(x > 0.0, "bessel_k1_scaled: x must be positive");
    if (x < 1e-300) throw numerical_error("bessel_k1_scaled: argument too small");
    if (x <= 2.0) return detail::bessel_k01_series(x).second * std::exp(x);
    return detail::bessel_k01_scaled_cf(x).second;
}

inline double log_bessel_k1(double x) {
    return std::log(bessel_k1_scaled(x)) - x;
}

inline double bessel_k0(double x) {
    require(x > 0.0, "bessel_k0: x must be positive");
    if (x <= 2.0) return detail::bessel_k01_series(x).first;
    return detail::bessel_k01_scaled_cf(x).first * std::exp(-x);
}

}  // namespace msub
