#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include "msub/core.hpp"

namespace msub {

/// Integrable endpoint singularities removed by a polynomial change of variable.
enum class Singular { none, left, right, both };

struct QuadOptions {
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    int max_intervals = 4000;
    Singular singular = Singular::none;
    /// Number of equal pieces the (transformed) interval is cut into before refinement.
    int initial_pieces = 1;
};

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    bool ok = false;
    double worst_a = 0.0, worst_b = 0.0;
    long evaluations = 0;
};

namespace detail {

inline constexpr std::array<double, 8> gk15_x = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> gk15_wk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> gk15_wg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a, b, value, error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment gk15(F& f, double a, double b, long& evals) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double resk = fc * gk15_wk[7];
    double resg = fc * gk15_wg[3];
    double resabs = std::abs(resk);
    std::array<double, 7> f1{}, f2{};
    for (int j = 0; j < 7; ++j) {
        const double dx = h * gk15_x[j];
        f1[j] = f(c - dx);
        f2[j] = f(c + dx);
        resk += gk15_wk[j] * (f1[j] + f2[j]);
        resabs += gk15_wk[j] * (std::abs(f1[j]) + std::abs(f2[j]));
        if (j % 2 == 1) resg += gk15_wg[j / 2] * (f1[j] + f2[j]);
    }
    evals += 15;
    const double mean = resk * 0.5;
    double resasc = gk15_wk[7] * std::abs(fc - mean);
    for (int j = 0; j < 7; ++j)
        resasc += gk15_wk[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));
    resasc *= std::abs(h);
    resabs *= std::abs(h);
    double err = std::abs((resk - resg) * h);
    if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) err = std::max(eps * 50.0 * resabs, err);
    return {a, b, resk * h, err};
}

template <class F>
QuadResult adapt_finite(F& f, double a, double b, const QuadOptions& opt) {
    QuadResult out;
    std::priority_queue<Segment> heap;
    std::vector<Segment> frozen;
    const int pieces = std::max(1, opt.initial_pieces);
    for (int k = 0; k < pieces; ++k) {
        const double lo = a + (b - a) * k / pieces;
        const double hi = (k + 1 == pieces) ? b : a + (b - a) * (k + 1) / pieces;
        heap.push(gk15(f, lo, hi, out.evaluations));
    }
    auto totals = [&](double& val, double& err) {
        val = 0.0;
        err = 0.0;
        auto copy = heap;
        while (!copy.empty()) {
            val += copy.top().value;
            err += copy.top().error;
            copy.pop();
        }
        for (const auto& s : frozen) {
            val += s.value;
            err += s.error;
        }
    };
    double val = 0.0, err = 0.0;
    totals(val, err);
    int count = pieces;
    while (!heap.empty()) {
        if (!std::isfinite(val) || !std::isfinite(err)) break;
        if (err <= std::max(opt.abs_tol, opt.rel_tol * std::abs(val))) break;
        if (count >= opt.max_intervals) break;
        Segment s = heap.top();
        heap.pop();
        const double m = 0.5 * (s.a + s.b);
        if (!(m > s.a && m < s.b)) {
            frozen.push_back(s);
            continue;
        }
        Segment l = gk15(f, s.a, m, out.evaluations);
        Segment r = gk15(f, m, s.b, out.evaluations);
        val += l.value + r.value - s.value;
        err += l.error + r.error - s.error;
        heap.push(l);
        heap.push(r);
        ++count;
        if (count % 64 == 0) totals(val, err);
    }
    totals(val, err);
    out.value = val;
    out.error = err;
    out.ok = std::isfinite(val) && std::isfinite(err) &&
             err <= std::max(opt.abs_tol, opt.rel_tol * std::abs(val));
    Segment worst{a, b, 0.0, -1.0};
    if (!heap.empty()) worst = heap.top();
    for (const auto& s : frozen)
        if (s.error > worst.error) worst = s;
    out.worst_a = worst.a;
    out.worst_b = worst.b;
    return out;
}

}  // namespace detail

/// Adaptive Gauss-Kronrod (7/15) quadrature on [a, b]; either limit may be infinite.
/// Failure is reported through `ok` together with the worst remaining subinterval
/// expressed in the original variable.
template <class F>
QuadResult adaptive_quad(F&& f, double a, double b, QuadOptions opt = {}) {
    require(!(std::isnan(a) || std::isnan(b)), "adaptive_quad: NaN limit");
    if (a == b) return {0.0, 0.0, true, a, b, 0};
    if (a > b) {
        QuadResult r = adaptive_quad(f, b, a, opt);
        r.value = -r.value;
        return r;
    }
    auto check = [](double y) {
        if (!std::isfinite(y)) throw numerical_error("adaptive_quad: non-finite integrand value");
        return y;
    };
    const bool ia = std::isinf(a), ib = std::isinf(b);
    if (ia && ib) {
        auto g = [&](double t) {
            const double d = 1.0 - t * t;
            if (!(d > 0.0)) return 0.0;
            const double x = t / d;
            return check(check(f(x)) * (1.0 + t * t) / (d * d));
        };
        QuadResult r = detail::adapt_finite(g, -1.0, 1.0, opt);
        auto map = [](double t) { return t / (1.0 - t * t); };
        r.worst_a = map(r.worst_a);
        r.worst_b = map(r.worst_b);
        return r;
    }
    if (ib) {
        auto g = [&](double t) {
            const double d = 1.0 - t;
            if (!(d > 0.0)) return 0.0;
            return check(check(f(a + t / d)) / (d * d));
        };
        QuadResult r = detail::adapt_finite(g, 0.0, 1.0, opt);
        r.worst_a = a + r.worst_a / (1.0 - r.worst_a);
        r.worst_b = r.worst_b >= 1.0 ? inf : a + r.worst_b / (1.0 - r.worst_b);
        return r;
    }
    if (ia) {
        auto g = [&](double t) {
            if (!(t > 0.0)) return 0.0;
            return check(check(f(b - (1.0 - t) / t)) / (t * t));
        };
        QuadResult r = detail::adapt_finite(g, 0.0, 1.0, opt);
        r.worst_a = r.worst_a <= 0.0 ? -inf : b - (1.0 - r.worst_a) / r.worst_a;
        r.worst_b = b - (1.0 - r.worst_b) / r.worst_b;
        return r;
    }
    const double w = b - a;
    switch (opt.singular) {
    case Singular::none: {
        auto g = [&](double x) { return check(f(x)); };
        return detail::adapt_finite(g, a, b, opt);
    }
    case Singular::left: {
        auto g = [&](double t) { return check(f(a + w * t * t)) * 2.0 * w * t; };
        QuadResult r = detail::adapt_finite(g, 0.0, 1.0, opt);
        r.worst_a = a + w * r.worst_a * r.worst_a;
        r.worst_b = a + w * r.worst_b * r.worst_b;
        return r;
    }
    case Singular::right: {
        auto g = [&](double t) { return check(f(b - w * t * t)) * 2.0 * w * t; };
        QuadResult r = detail::adapt_finite(g, 0.0, 1.0, opt);
        const double lo = b - w * r.worst_b * r.worst_b, hi = b - w * r.worst_a * r.worst_a;
        r.worst_a = lo;
        r.worst_b = hi;
        return r;
    }
    case Singular::both: {
        auto g = [&](double t) {
            const double x = a + w * t * t * (3.0 - 2.0 * t);
            return check(f(x)) * 6.0 * w * t * (1.0 - t);
        };
        QuadResult r = detail::adapt_finite(g, 0.0, 1.0, opt);
        auto map = [&](double t) { return a + w * t * t * (3.0 - 2.0 * t); };
        r.worst_a = map(r.worst_a);
        r.worst_b = map(r.worst_b);
        return r;
    }
    }
    return {};
}

/// As adaptive_quad, but throws quadrature_error when the tolerance is not met.
template <class F>
double integrate(F&& f, double a, double b, QuadOptions opt = {}) {
    QuadResult r = adaptive_quad(f, a, b, opt);
    if (!r.ok) throw quadrature_error("quadrature tolerance not met", r.worst_a, r.worst_b, r.error);
    return r.value;
}

/// Integral over (0, inf) after the substitution x = exp(w); suited to integrands
/// spread over many decades, such as mixing densities in the clock variable.
template <class F>
QuadResult quad_log_scale(F&& f, double lo_w, double hi_w, QuadOptions opt = {}) {
    auto g = [&](double w) {
        const double x = std::exp(w);
        return f(x) * x;
    };
    return adaptive_quad(g, lo_w, hi_w, opt);
}

}  // namespace msub
