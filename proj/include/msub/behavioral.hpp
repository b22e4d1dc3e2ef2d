#pragma once

#include <cmath>
#include <functional>
#include <memory>

#include "msub/core.hpp"
#include "msub/numerics/density.hpp"

namespace msub {

inline double tk_pwf(double gamma, double u) {
    require(gamma > 0.0 && gamma <= 1.0, "tk_pwf: gamma must lie in (0,1]");
    require(u >= 0.0 && u <= 1.0, "tk_pwf: u must lie in [0,1]");
    if (u == 0.0 || u == 1.0) return u;
    const double a = std::pow(u, gamma);
    return a / std::pow(a + std::pow(1.0 - u, gamma), 1.0 / gamma);
}

/// exp(-delta (-ln u)^rho).
inline double prelec_pwf(double delta, double rho, double u) {
    require(delta > 0.0, "prelec_pwf: delta must be positive");
    require(rho > 0.0 && rho <= 1.0, "prelec_pwf: rho must lie in (0,1]");
    require(u >= 0.0 && u <= 1.0, "prelec_pwf: u must lie in [0,1]");
    if (u == 0.0) return 0.0;
    return std::exp(-delta * std::pow(-std::log(u), rho));
}

inline double gumbel_cdf(double mu, double beta, double x) {
    require(beta > 0.0, "gumbel_cdf: beta must be positive");
    return std::exp(-std::exp(-(x - mu) / beta));
}

/// A CDF with a bracket on which it is invertible.
struct CdfHandle {
    std::function<double(double)> cdf;
    double lo;
    double hi;

    static CdfHandle from_grid(DensityGrid grid) {
        const double lo = grid.x0 - grid.dx, hi = grid.x_max() + grid.dx;
        auto shared = std::make_shared<DensityGrid>(std::move(grid));
        return {[shared](double x) { return cdf_interp(*shared, x); }, lo, hi};
    }
};

/// Generalised inverse min{x : F(x) > u} by bisection to 1e-10 in x.
inline double cdf_quantile(const CdfHandle& f, double u) {
    require(u > 0.0 && u < 1.0, "cdf_quantile: u must lie in (0,1)");
    double lo = f.lo, hi = f.hi;
    if (!(f.cdf(lo) <= u && f.cdf(hi) > u)) throw numerical_error("cdf_quantile: bracket does not confine the quantile");
    while (hi - lo > 1e-10) {
        const double m = 0.5 * (lo + hi);
        if (m <= lo || m >= hi) break;
        (f.cdf(m) > u ? hi : lo) = m;
    }
    return hi;
}

/// w(u) = F_S(F_R^-1(u)).
inline double general_pwf(const CdfHandle& reference, const CdfHandle& target, double u) {
    require(u > 0.0 && u < 1.0, "general_pwf: u must lie in (0,1)");
    return target.cdf(cdf_quantile(reference, u));
}

}  // namespace msub
