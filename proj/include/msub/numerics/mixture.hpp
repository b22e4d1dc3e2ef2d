#pragma once

#include <cmath>
#include <limits>

#include "msub/core.hpp"
#include "msub/numerics/quadrature.hpp"

namespace msub {

/// log of int_lo^hi exp(g(w)) dw for a unimodal-ish log-integrand g. The peak is located
/// by a scan plus golden-section refinement, the support is trimmed where g falls 60 below
/// the peak, and the rescaled integrand is handed to adaptive quadrature.
template <class G>
double log_integrate_exp(G&& g, double lo, double hi, double rel_tol = 1e-10, int scan = 256) {
    auto safe = [&](double w) {
        const double y = g(w);
        return std::isnan(y) ? -inf : y;
    };
    double best_w = lo, best = -inf;
    const double h = (hi - lo) / scan;
    for (int k = 0; k <= scan; ++k) {
        const double w = lo + h * k;
        const double y = safe(w);
        if (y > best) {
            best = y;
            best_w = w;
        }
    }
    if (best == -inf) return -inf;
    {
        double a = std::max(lo, best_w - h), b = std::min(hi, best_w + h);
        constexpr double r = 0.6180339887498949;
        double c = b - r * (b - a), d = a + r * (b - a);
        double fc = safe(c), fd = safe(d);
        for (int it = 0; it < 80 && b - a > 1e-14 * (1.0 + std::abs(a)); ++it) {
            if (fc > fd) {
                b = d;
                d = c;
                fd = fc;
                c = b - r * (b - a);
                fc = safe(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + r * (b - a);
                fd = safe(d);
            }
        }
        const double w = 0.5 * (a + b);
        const double y = safe(w);
        if (y > best) {
            best = y;
            best_w = w;
        }
    }
    const double cut = best - 60.0;
    double wl = best_w, step = 1e-4 * std::max(1.0, h);
    while (wl > lo && safe(wl) > cut) {
        wl -= step;
        step *= 1.5;
    }
    wl = std::max(wl, lo);
    double wr = best_w;
    step = 1e-4 * std::max(1.0, h);
    while (wr < hi && safe(wr) > cut) {
        wr += step;
        step *= 1.5;
    }
    wr = std::min(wr, hi);
    auto f = [&](double w) { return std::exp(safe(w) - best); };
    QuadOptions opt;
    opt.abs_tol = 1e-14;
    opt.rel_tol = std::max(rel_tol, 1e3 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(best)));
    opt.initial_pieces = 8;
    QuadResult r = adaptive_quad(f, wl, wr, opt);
    if (!r.ok) throw quadrature_error("log_integrate_exp: tolerance not met", r.worst_a, r.worst_b, r.error);
    return best + std::log(r.value);
}

}  // namespace msub
