#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "msub/core.hpp"
#include "msub/numerics/normal.hpp"

namespace msub {

struct TestResult {
    double statistic = nan;
    double p_value = nan;
    std::size_t n = 0;
    std::string method;
};

inline constexpr double pit_clamp = 1e-12;

/// u_i = F(x_i), clamped to [1e-12, 1 - 1e-12].
inline std::vector<double> pit(const std::function<double(double)>& cdf, std::span<const double> data) {
    require(!data.empty(), "pit: empty data");
    std::vector<double> u(data.size());
    double lo = inf, hi = -inf, xlo = inf, xhi = -inf;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double f = cdf(data[i]);
        if (!std::isfinite(f)) throw numerical_error("pit: cdf returned a non-finite value");
        u[i] = std::clamp(f, pit_clamp, 1.0 - pit_clamp);
        lo = std::min(lo, u[i]);
        hi = std::max(hi, u[i]);
        xlo = std::min(xlo, data[i]);
        xhi = std::max(xhi, data[i]);
    }
    if (data.size() > 1 && xhi > xlo && hi == lo) throw numerical_error("pit: cdf is constant over the data range");
    return u;
}

/// Asymptotic Kolmogorov tail P(K > lambda).
inline double kolmogorov_q(double lambda) {
    if (lambda < 0.2) return 1.0;
    double s = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        s += (k % 2 == 1 ? term : -term);
        if (term < 1e-16) break;
    }
    return std::clamp(2.0 * s, 0.0, 1.0);
}

/// Asymptotic Kuiper tail with the 1/sqrt(n) correction term.
inline double kuiper_q(double lambda, double n) {
    if (lambda < 0.4) return 1.0;
    double a = 0.0, b = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double k2l2 = static_cast<double>(k * k) * lambda * lambda;
        const double e = std::exp(-2.0 * k2l2);
        a += (4.0 * k2l2 - 1.0) * e;
        b += static_cast<double>(k * k) * (4.0 * k2l2 - 3.0) * e;
        if (e < 1e-18) break;
    }
    return std::clamp(2.0 * a - 8.0 * lambda / (3.0 * std::sqrt(n)) * b, 0.0, 1.0);
}

namespace detail {
/// (D+, D-) of a sample against the uniform law.
inline std::pair<double, double> uniform_deviations(std::span<const double> u) {
    std::vector<double> s(u.begin(), u.end());
    std::sort(s.begin(), s.end());
    const auto n = static_cast<double>(s.size());
    double dp = 0.0, dm = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        require(s[i] >= 0.0 && s[i] <= 1.0, "uniformity test: values must lie in [0,1]");
        dp = std::max(dp, static_cast<double>(i + 1) / n - s[i]);
        dm = std::max(dm, s[i] - static_cast<double>(i) / n);
    }
    return {dp, dm};
}
}  // namespace detail

inline TestResult ks_uniform_test(std::span<const double> u) {
    require(u.size() >= 5, "ks_uniform_test: need at least 5 values");
    const auto [dp, dm] = detail::uniform_deviations(u);
    const double d = std::max(dp, dm);
    const auto n = static_cast<double>(u.size());
    return {d, kolmogorov_q(std::sqrt(n) * d), u.size(), "ks"};
}

inline TestResult kuiper_test(std::span<const double> u) {
    require(u.size() >= 5, "kuiper_test: need at least 5 values");
    const auto [dp, dm] = detail::uniform_deviations(u);
    const double v = dp + dm;
    const auto n = static_cast<double>(u.size());
    return {v, kuiper_q(std::sqrt(n) * v, n), u.size(), "kuiper"};
}

/// z_i = Phi^-1(u_i); values at or beyond the clamp are moved inside and counted.
inline std::vector<double> inverse_normal_transform(std::span<const double> u, std::size_t* clamped = nullptr) {
    std::vector<double> z(u.size());
    std::size_t c = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        require(u[i] >= 0.0 && u[i] <= 1.0, "inverse_normal_transform: values must lie in [0,1]");
        double v = u[i];
        if (v < pit_clamp || v > 1.0 - pit_clamp) {
            v = std::clamp(v, pit_clamp, 1.0 - pit_clamp);
            ++c;
        }
        z[i] = normal_quantile(v);
    }
    if (clamped) *clamped = c;
    return z;
}

/// Jarque-Bera statistic with the exact finite-sample mean and variances of sample skewness
/// and kurtosis under normality; chi-square(2) p-value.
inline TestResult adjusted_jarque_bera(std::span<const double> z) {
    require(z.size() >= 8, "adjusted_jarque_bera: need at least 8 values");
    const auto n = static_cast<double>(z.size());
    double m = 0.0;
    for (double v : z) m += v;
    m /= n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : z) {
        const double d = v - m, d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    require(m2 > 0.0, "adjusted_jarque_bera: zero variance");
    const double skew = m3 / std::pow(m2, 1.5);
    const double kurt = m4 / (m2 * m2);
    const double e_kurt = 3.0 * (n - 1.0) / (n + 1.0);
    const double v_skew = 6.0 * (n - 2.0) / ((n + 1.0) * (n + 3.0));
    const double v_kurt = 24.0 * n * (n - 2.0) * (n - 3.0) / ((n + 1.0) * (n + 1.0) * (n + 3.0) * (n + 5.0));
    const double stat = skew * skew / v_skew + (kurt - e_kurt) * (kurt - e_kurt) / v_kurt;
    return {stat, std::exp(-0.5 * stat), z.size(), "adjusted_jarque_bera"};
}

}  // namespace msub
