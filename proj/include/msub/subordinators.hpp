#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "msub/core.hpp"
#include "msub/numerics/normal.hpp"
#include "msub/numerics/quadrature.hpp"

namespace msub {

/// One-sided stable subordinator with Laplace transform exp(-(delta s)^alpha_half).
/// alpha_half = 1 is admitted as the boundary case of a pure drift delta.
struct StableSubParams {
    double alpha_half;
    double delta;
    StableSubParams(double a, double d) : alpha_half(a), delta(d) {
        require(a > 0.0 && a <= 1.0, "StableSubParams: alpha_half must lie in (0,1]");
        require(d > 0.0 && std::isfinite(d), "StableSubParams: delta must be positive");
    }
};

/// One-sided 1/2-stable (Levy) law with density sqrt(b/2pi) x^-3/2 exp(-b/2x).
/// Same law as StableSubParams{0.5, 2b}.
struct LevyStableParams {
    double b;
    explicit LevyStableParams(double b_) : b(b_) {
        require(b_ > 0.0 && std::isfinite(b_), "LevyStableParams: b must be positive");
    }
    StableSubParams as_stable() const { return {0.5, 2.0 * b}; }
};

struct GammaParams {
    double alpha;   ///< shape
    double lambda;  ///< rate
    GammaParams(double a, double l) : alpha(a), lambda(l) {
        require(a > 0.0 && std::isfinite(a), "GammaParams: alpha must be positive");
        require(l > 0.0 && std::isfinite(l), "GammaParams: lambda must be positive");
    }
};

struct IGParams {
    double mu;      ///< mean
    double lambda;  ///< shape
    IGParams(double m, double l) : mu(m), lambda(l) {
        require(m > 0.0 && std::isfinite(m), "IGParams: mu must be positive");
        require(l > 0.0 && std::isfinite(l), "IGParams: lambda must be positive");
    }
};

// ---------------------------------------------------------------- stable

inline double stable_laplace(const StableSubParams& p, double s) {
    require(s > 0.0, "stable_laplace: s must be positive");
    return std::exp(-std::pow(p.delta * s, p.alpha_half));
}

/// E[T(1)^order] = order/Gamma(1-order) * int_0^inf (1 - L(s)) s^(-order-1) ds.
inline double stable_fractional_moment(const StableSubParams& p, double order, QuadOptions opt = {}) {
    require(order > 0.0 && order < p.alpha_half, "stable_fractional_moment: order must lie in (0, alpha_half)");
    const double a = p.alpha_half, d = p.delta;
    opt.singular = Singular::none;
    // (0,1] in w = -ln s: integrand (1 - L(e^-w)) e^(order w).
    auto head = [&](double w) {
        const double s = std::exp(-w);
        const double y = std::pow(d * s, a);
        return -std::expm1(-y) * std::exp(-order * std::log(s));
    };
    // Tail: int_1^inf s^(-order-1) ds = 1/order exactly; subtract the decaying L(s) part,
    // integrated in w = ln s.
    auto tail = [&](double w) { return std::exp(-std::pow(d, a) * std::exp(a * w) - order * w); };
    double w_hi = 1.0;
    while (head(w_hi) > 1e-14 && w_hi < 1e4) w_hi *= 2.0;
    double t_hi = 1.0;
    while (tail(t_hi) > 1e-14 && t_hi < 1e4) t_hi *= 2.0;
    QuadResult r1 = adaptive_quad(head, 0.0, w_hi, opt);
    QuadResult r2 = adaptive_quad(tail, 0.0, t_hi, opt);
    if (!r1.ok) throw quadrature_error("stable_fractional_moment", std::exp(-r1.worst_b), std::exp(-r1.worst_a), r1.error);
    if (!r2.ok) throw quadrature_error("stable_fractional_moment", std::exp(r2.worst_a), std::exp(r2.worst_b), r2.error);
    const double integral = r1.value + 1.0 / order - r2.value;
    return order / std::tgamma(1.0 - order) * integral;
}

// ---------------------------------------------------------------- Levy 1/2-stable

inline double levy_stable_log_pdf(const LevyStableParams& p, double x) {
    require(x > 0.0, "levy_stable_pdf: x must be positive");
    return 0.5 * std::log(p.b / (2.0 * pi)) - 1.5 * std::log(x) - p.b / (2.0 * x);
}

inline double levy_stable_pdf(const LevyStableParams& p, double x) { return std::exp(levy_stable_log_pdf(p, x)); }

inline double levy_stable_cdf(const LevyStableParams& p, double x) {
    if (x <= 0.0) return 0.0;
    return std::erfc(std::sqrt(p.b / (2.0 * x)));
}

inline double levy_stable_laplace(const LevyStableParams& p, double s) {
    require(s > 0.0, "levy_stable_laplace: s must be positive");
    return std::exp(-std::sqrt(2.0 * p.b * s));
}

// ---------------------------------------------------------------- gamma

inline double gamma_log_pdf(const GammaParams& p, double x) {
    require(x > 0.0, "gamma_pdf: x must be positive");
    return p.alpha * std::log(p.lambda) - std::lgamma(p.alpha) + (p.alpha - 1.0) * std::log(x) - p.lambda * x;
}

inline double gamma_pdf(const GammaParams& p, double x) { return std::exp(gamma_log_pdf(p, x)); }

inline double gamma_mgf(const GammaParams& p, double v) {
    require(v < p.lambda, "gamma_mgf: v must be below lambda");
    return std::exp(-p.alpha * std::log1p(-v / p.lambda));
}

// ---------------------------------------------------------------- inverse Gaussian

inline double ig_log_pdf(const IGParams& p, double x) {
    require(x > 0.0, "ig_pdf: x must be positive");
    const double d = x - p.mu;
    return 0.5 * std::log(p.lambda / (2.0 * pi * x * x * x)) - p.lambda * d * d / (2.0 * p.mu * p.mu * x);
}

inline double ig_pdf(const IGParams& p, double x) { return std::exp(ig_log_pdf(p, x)); }

inline double ig_cdf(const IGParams& p, double x) {
    if (x <= 0.0) return 0.0;
    const double r = std::sqrt(p.lambda / x);
    const double first = normal_cdf(r * (x / p.mu - 1.0));
    const double second = std::exp(2.0 * p.lambda / p.mu + normal_log_cdf(-r * (x / p.mu + 1.0)));
    return std::min(1.0, first + second);
}

inline double ig_mgf(const IGParams& p, double v) {
    const double lim = p.lambda / (2.0 * p.mu * p.mu);
    require(v <= lim, "ig_mgf: v exceeds lambda/(2 mu^2)");
    return std::exp(p.lambda / p.mu * (1.0 - std::sqrt(1.0 - v / lim)));
}

inline cplx ig_chf(const IGParams& p, double v) {
    const cplx z = 1.0 - cplx(0.0, 2.0 * p.mu * p.mu * v / p.lambda);
    return std::exp(p.lambda / p.mu * (1.0 - std::sqrt(z)));
}

inline MomentSet ig_moments(const IGParams& p) {
    const double r = p.mu / p.lambda;
    return {Moment::finite(p.mu), Moment::finite(p.mu * p.mu * p.mu / p.lambda),
            Moment::finite(3.0 * std::sqrt(r)), Moment::finite(15.0 * r)};
}

inline MomentSet gamma_moments(const GammaParams& p) {
    return {Moment::finite(p.alpha / p.lambda), Moment::finite(p.alpha / (p.lambda * p.lambda)),
            Moment::finite(2.0 / std::sqrt(p.alpha)), Moment::finite(6.0 / p.alpha)};
}

// ---------------------------------------------------------------- samplers

inline double draw_stable(const StableSubParams& p, Rng& rng) {
    const double a = p.alpha_half;
    if (a == 1.0) return p.delta;
    if (a == 0.5) {
        const double z = rng.normal();
        return p.delta / (2.0 * z * z);
    }
    const double u = pi * rng.uniform();
    const double e = rng.exponential();
    const double lx = std::log(std::sin(a * u)) - std::log(std::sin(u)) / a +
                      (1.0 - a) / a * (std::log(std::sin((1.0 - a) * u)) - std::log(e));
    return p.delta * std::exp(lx);
}

inline double draw_levy_stable(const LevyStableParams& p, Rng& rng) {
    const double z = rng.normal();
    return p.b / (z * z);
}

inline double draw_gamma(const GammaParams& p, Rng& rng) { return rng.gamma(p.alpha) / p.lambda; }

/// Transformation with roots plus one uniform acceptance step.
inline double draw_ig(const IGParams& p, Rng& rng) {
    const double z = rng.normal();
    const double w = p.mu * z * z / (2.0 * p.lambda);
    const double x = p.mu / (1.0 + w + std::sqrt(w * (w + 2.0)));
    if (rng.uniform() * (p.mu + x) <= p.mu) return x;
    return p.mu * p.mu / x;
}

template <class P, class Draw>
std::vector<double> sample_n(const P& p, std::size_t n, std::uint64_t seed, Draw draw) {
    require(n >= 1, "sampler: n must be at least 1");
    Rng rng(seed);
    std::vector<double> out(n);
    for (auto& x : out) x = draw(p, rng);
    return out;
}

inline std::vector<double> sample_stable_sub(const StableSubParams& p, std::size_t n, std::uint64_t seed) {
    return sample_n(p, n, seed, [](const StableSubParams& q, Rng& r) { return draw_stable(q, r); });
}
inline std::vector<double> sample_levy_stable(const LevyStableParams& p, std::size_t n, std::uint64_t seed) {
    return sample_n(p, n, seed, [](const LevyStableParams& q, Rng& r) { return draw_levy_stable(q, r); });
}
inline std::vector<double> sample_gamma(const GammaParams& p, std::size_t n, std::uint64_t seed) {
    return sample_n(p, n, seed, [](const GammaParams& q, Rng& r) { return draw_gamma(q, r); });
}
inline std::vector<double> sample_ig(const IGParams& p, std::size_t n, std::uint64_t seed) {
    return sample_n(p, n, seed, [](const IGParams& q, Rng& r) { return draw_ig(q, r); });
}

// ---------------------------------------------------------------- base-law dispatch

using BaseLaw = std::variant<StableSubParams, LevyStableParams, GammaParams, IGParams>;

inline std::string law_name(const BaseLaw& law) {
    switch (law.index()) {
    case 0: return "stable";
    case 1: return "levy-stable";
    case 2: return "gamma";
    default: return "ig";
    }
}

/// Laplace exponent Phi(s) = -ln E exp(-s X(1)) on the closed right half-plane,
/// principal branches throughout (each Phi maps Re s >= 0 into Re >= 0).
inline cplx laplace_exponent(const BaseLaw& law, cplx s) {
    return std::visit(
        [&](const auto& p) -> cplx {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, StableSubParams>) {
                if (s == 0.0) return 0.0;
                return std::pow(p.delta * s, p.alpha_half);
            } else if constexpr (std::is_same_v<P, LevyStableParams>) {
                return std::sqrt(2.0 * p.b * s);
            } else if constexpr (std::is_same_v<P, GammaParams>) {
                return p.alpha * std::log(1.0 + s / p.lambda);
            } else {
                const double k = p.lambda / p.mu;
                return k * (std::sqrt(1.0 + 2.0 * p.mu * p.mu * s / p.lambda) - 1.0);
            }
        },
        law);
}

inline double laplace_exponent(const BaseLaw& law, double s) { return laplace_exponent(law, cplx(s, 0.0)).real(); }

/// Draw X(t) using each law's time scaling: stable t^(1/alpha_half), gamma shape alpha t,
/// IG(mu t, lambda t^2).
inline double draw_at_time(const BaseLaw& law, double t, Rng& rng) {
    if (t <= 0.0) return 0.0;
    return std::visit(
        [&](const auto& p) -> double {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, StableSubParams>) {
                return std::pow(t, 1.0 / p.alpha_half) * draw_stable(p, rng);
            } else if constexpr (std::is_same_v<P, LevyStableParams>) {
                return t * t * draw_levy_stable(p, rng);
            } else if constexpr (std::is_same_v<P, GammaParams>) {
                return rng.gamma(p.alpha * t) / p.lambda;
            } else {
                return draw_ig(IGParams(p.mu * t, p.lambda * t * t), rng);
            }
        },
        law);
}

/// First four cumulants of X(1); empty for stable laws.
inline std::vector<double> unit_cumulants(const BaseLaw& law) {
    if (const auto* g = std::get_if<GammaParams>(&law)) {
        const double a = g->alpha, l = g->lambda;
        return {a / l, a / (l * l), 2.0 * a / (l * l * l), 6.0 * a / (l * l * l * l)};
    }
    if (const auto* p = std::get_if<IGParams>(&law)) {
        const double m = p->mu, l = p->lambda;
        return {m, m * m * m / l, 3.0 * std::pow(m, 5) / (l * l), 15.0 * std::pow(m, 7) / (l * l * l)};
    }
    return {};
}

}  // namespace msub
