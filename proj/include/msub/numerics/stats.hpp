#pragma once

#include <cmath>
#include <span>

#include "msub/core.hpp"

namespace msub {

/// Mean, unbiased variance, and plug-in skewness and excess kurtosis of a sample.
inline MomentSet sample_moments(std::span<const double> x) {
    require(x.size() >= 4, "sample_moments: need at least four observations");
    const auto n = static_cast<double>(x.size());
    double m = 0.0;
    for (double v : x) m += v;
    m /= n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : x) {
        const double d = v - m, d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    return {Moment::finite(m), Moment::finite(m2 * n / (n - 1.0)), Moment::finite(m3 / std::pow(m2, 1.5)),
            Moment::finite(m4 / (m2 * m2) - 3.0)};
}

}  // namespace msub
