#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "msub/core.hpp"
#include "msub/numerics/fft.hpp"

namespace msub {

enum class TransformKind { chf, laplace, mgf };

/// Complex-valued transform of a law together with the real interval on which it is valid.
struct TransformHandle {
    std::function<cplx(double)> fn;
    TransformKind kind = TransformKind::chf;
    double lo = -inf, hi = inf;

    cplx operator()(double v) const {
        if (!(v >= lo && v <= hi)) throw domain_error("transform evaluated outside its validity domain");
        return fn(v);
    }
};

inline TransformHandle make_chf(std::function<cplx(double)> f) {
    return {std::move(f), TransformKind::chf, -inf, inf};
}

struct FFTConfig {
    std::size_t grid_size = std::size_t{1} << 14;
    /// Support half-width; NaN selects mean +- 12 sd estimated from the chf.
    double x_span = nan;
    /// Grid centre; NaN selects the chf-estimated mean.
    double x_center = nan;
    double damping = 0.0;

    void validate() const {
        const bool pow2 = grid_size >= 256 && (grid_size & (grid_size - 1)) == 0;
        require(pow2, "FFTConfig: grid_size must be a power of two >= 256");
        require(std::isnan(x_span) || x_span > 0.0, "FFTConfig: x_span must be positive");
        require(damping >= 0.0, "FFTConfig: damping must be nonnegative");
    }
};

struct DensityGrid {
    double x0 = 0.0;
    double dx = 1.0;
    std::vector<double> values;
    std::vector<double> cdf;
    /// Factor applied after clipping negative ripple; 1 means no correction.
    double renorm_factor = 1.0;
    double clipped_mass = 0.0;

    std::size_t size() const { return values.size(); }
    double x(std::size_t k) const { return x0 + dx * static_cast<double>(k); }
    double x_max() const { return x(values.size() - 1); }

    double pdf(double xv) const {
        if (values.empty()) return 0.0;
        const double t = (xv - x0) / dx;
        if (t < 0.0 || t > static_cast<double>(values.size() - 1)) return 0.0;
        const auto k = std::min(static_cast<std::size_t>(t), values.size() - 2);
        const double w = t - static_cast<double>(k);
        return values[k] * (1.0 - w) + values[k + 1] * w;
    }

    /// Running cumulative values, midpoint rule.
    void build_cdf() {
        cdf.resize(values.size());
        double acc = 0.0;
        for (std::size_t k = 0; k < values.size(); ++k) {
            cdf[k] = (acc + 0.5 * values[k]) * dx;
            acc += values[k];
        }
    }

    double mass() const {
        double s = 0.0;
        for (double v : values) s += v;
        return s * dx;
    }
};

/// Mean and standard deviation of a law read off the curvature of log chf at 0.
inline std::pair<double, double> chf_location_scale(const std::function<cplx(double)>& chf) {
    double h = 1e-3;
    double m = 0.0, sd = 1.0;
    for (int pass = 0; pass < 3; ++pass) {
        const cplx lp = std::log(chf(h)), lm = std::log(chf(-h));
        m = (lp.imag() - lm.imag()) / (2.0 * h);
        const double var = -(lp.real() + lm.real()) / (h * h);
        if (!(var > 0.0) || !std::isfinite(var))
            throw numerical_error("chf_location_scale: no usable curvature at 0; set x_span explicitly");
        sd = std::sqrt(var);
        const double next = 1e-2 / sd;
        if (std::abs(next - h) < 1e-3 * h) break;
        h = next;
    }
    return {m, sd};
}

/// Density of a law from its chf by discrete Fourier inversion on a uniform grid.
inline DensityGrid chf_to_pdf_fft(const TransformHandle& chf, FFTConfig cfg = {}) {
    cfg.validate();
    require(chf.kind == TransformKind::chf, "chf_to_pdf_fft: handle is not a chf");
    const std::size_t n = cfg.grid_size;
    double centre = cfg.x_center, span = cfg.x_span;
    if (std::isnan(centre) || std::isnan(span)) {
        const auto [m, sd] = chf_location_scale(chf.fn);
        if (std::isnan(centre)) centre = m;
        if (std::isnan(span)) span = 12.0 * sd;
    }
    const cplx c0 = chf(0.0);
    if (std::abs(c0 - 1.0) > 1e-10) throw domain_error("chf_to_pdf_fft: chf(0) != 1");

    const double dx = 2.0 * span / static_cast<double>(n);
    const double x0 = centre - span;
    const double dv = 2.0 * pi / (static_cast<double>(n) * dx);
    const std::size_t half = n / 2;

    std::vector<cplx> a(n);
    for (std::size_t j = half; j < n; ++j) {
        const double v = (static_cast<double>(j) - static_cast<double>(half)) * dv;
        cplx phi = chf(v);
        if (!std::isfinite(phi.real()) || !std::isfinite(phi.imag()))
            throw numerical_error("chf_to_pdf_fft: non-finite chf value");
        if (cfg.damping > 0.0) phi *= std::exp(-cfg.damping * v);
        a[j] = phi * std::polar(1.0, -v * x0);
        if (j > half) a[2 * half - j] = std::conj(a[j]);
    }
    {
        const double v = -static_cast<double>(half) * dv;
        cplx phi = std::conj(chf(-v));
        if (cfg.damping > 0.0) phi *= std::exp(cfg.damping * v);
        a[0] = 0.5 * phi * std::polar(1.0, -v * x0);
    }
    dft_inplace(a, -1);

    DensityGrid g;
    g.x0 = x0;
    g.dx = dx;
    g.values.resize(n);
    const double scale = dv / (2.0 * pi);
    double clipped = 0.0, total = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        double f = scale * ((k % 2 == 0) ? a[k].real() : -a[k].real());
        if (f < 0.0) {
            clipped -= f;
            f = 0.0;
        }
        g.values[k] = f;
        total += f;
    }
    g.clipped_mass = clipped * dx;
    const double mass = total * dx;
    if (g.clipped_mass > 1e-3)
        throw numerical_error("chf_to_pdf_fft: clipped negative mass " + std::to_string(g.clipped_mass) +
                              " exceeds 1e-3; refine grid or span");
    if (std::abs(mass - 1.0) > 1e-2)
        throw numerical_error("chf_to_pdf_fft: grid mass " + std::to_string(mass) + " deviates from 1");
    g.renorm_factor = 1.0 / mass;
    for (double& f : g.values) f *= g.renorm_factor;
    g.build_cdf();
    return g;
}

inline double cdf_interp(const DensityGrid& g, double x) {
    require(!g.cdf.empty(), "cdf_interp: empty grid");
    const double t = (x - g.x0) / g.dx;
    if (t <= 0.0) return std::clamp(g.cdf.front() * std::max(0.0, 1.0 + t), 0.0, 1.0);
    const double last = static_cast<double>(g.cdf.size() - 1);
    if (t >= last) return std::min(1.0, g.cdf.back() + (1.0 - g.cdf.back()) * std::min(1.0, t - last));
    const auto k = static_cast<std::size_t>(t);
    const double w = t - static_cast<double>(k);
    return std::clamp(g.cdf[k] * (1.0 - w) + g.cdf[k + 1] * w, 0.0, 1.0);
}

/// Generalized inverse of cdf_interp: smallest x with cdf_interp(x) >= u, by bisection.
inline double cdf_inv(const DensityGrid& g, double u) {
    require(u > 0.0 && u < 1.0, "cdf_inv: u must lie in (0,1)");
    require(!g.cdf.empty(), "cdf_inv: empty grid");
    double lo = g.x0 - g.dx, hi = g.x_max() + g.dx;
    if (cdf_interp(g, lo) >= u) return lo;
    if (cdf_interp(g, hi) < u) return hi;
    for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, std::abs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (cdf_interp(g, mid) >= u)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

}  // namespace msub
