#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "msub/core.hpp"

namespace msub {

/// Normal-reference bandwidth 1.06 * sd * n^(-1/5).
inline double kde_bandwidth(std::span<const double> data) {
    require(data.size() >= 2, "kde_bandwidth: need at least two points");
    double m = 0.0;
    for (double x : data) m += x;
    m /= static_cast<double>(data.size());
    double ss = 0.0;
    for (double x : data) ss += (x - m) * (x - m);
    const double sd = std::sqrt(ss / static_cast<double>(data.size() - 1));
    require(sd > 0.0, "kde_bandwidth: data have zero spread");
    return 1.06 * sd * std::pow(static_cast<double>(data.size()), -0.2);
}

/// Gaussian kernel density estimate at x.
inline double kde(std::span<const double> data, double h, double x) {
    require(!data.empty(), "kde: empty data");
    require(h > 0.0, "kde: bandwidth must be positive");
    const double c = 1.0 / (std::sqrt(2.0 * pi) * h * static_cast<double>(data.size()));
    double s = 0.0;
    for (double xi : data) {
        const double z = (xi - x) / h;
        s += std::exp(-0.5 * z * z);
    }
    return c * s;
}

inline std::vector<double> kde_on_grid(std::span<const double> data, double h, std::span<const double> xs) {
    std::vector<double> out;
    out.reserve(xs.size());
    for (double x : xs) out.push_back(kde(data, h, x));
    return out;
}

}  // namespace msub
