#pragma once

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "msub/compound.hpp"
#include "msub/core.hpp"
#include "msub/numerics/bessel.hpp"
#include "msub/numerics/density.hpp"
#include "msub/numerics/mixture.hpp"
#include "msub/subordinators.hpp"

namespace msub {

/// Unit-time log-return mu + sum_j loadings[j] X_j + sigma B(X_0), where X_j is the partial
/// composition of the chain from level j inward (X_0 is the full intrinsic time).
/// For two levels [T, U]: loadings = {rho, gamma}.
struct LogPriceParams {
    double mu = 0.0;
    double sigma = 1.0;
    CompoundChain chain;
    std::vector<double> loadings;

    LogPriceParams(double mu_, double sigma_, CompoundChain chain_, std::vector<double> loadings_)
        : mu(mu_), sigma(sigma_), chain(std::move(chain_)), loadings(std::move(loadings_)) {
        require(std::isfinite(mu), "LogPriceParams: mu must be finite");
        require(sigma > 0.0 && std::isfinite(sigma), "LogPriceParams: sigma must be positive");
        require(loadings.size() == chain.depth(), "LogPriceParams: one loading per chain level required");
        for (double l : loadings) require(std::isfinite(l), "LogPriceParams: loadings must be finite");
    }

    /// Two-level model on [outer, inner] with rho on V(1) and gamma on the inner clock.
    static LogPriceParams two_level(double mu, double gamma, double rho, double sigma, BaseLaw outer, BaseLaw inner) {
        return {mu, sigma, CompoundChain{std::move(outer), std::move(inner)}, {rho, gamma}};
    }

    double rho() const { return loadings[0]; }
    double gamma_coef() const { return loadings.size() > 1 ? loadings[1] : 0.0; }
};

/// Chf of the generic model by recursion from the Brownian level outward.
inline cplx return_log_chf(const LogPriceParams& p, double v) {
    cplx z = laplace_exponent(p.chain.level(0), cplx(0.5 * v * v * p.sigma * p.sigma, -v * p.loadings[0]));
    for (std::size_t j = 1; j < p.chain.depth(); ++j)
        z = laplace_exponent(p.chain.level(j), cplx(0.0, -v * p.loadings[j]) + z);
    return cplx(0.0, v * p.mu) - z;
}

inline cplx return_chf(const LogPriceParams& p, double v) { return std::exp(return_log_chf(p, v)); }

/// Draws one unit-time return.
inline double draw_return(const LogPriceParams& p, Rng& rng, std::vector<double>& clocks) {
    p.chain.draw_levels(rng, clocks);
    double x = p.mu + p.sigma * std::sqrt(clocks[0]) * rng.normal();
    for (std::size_t j = 0; j < clocks.size(); ++j) x += p.loadings[j] * clocks[j];
    return x;
}

/// First four cumulants of the return for chains made of gamma and IG levels.
inline CumulantSet return_cumulants(const LogPriceParams& p) {
    std::array<double, 4> h{p.loadings[0], p.sigma * p.sigma, 0.0, 0.0};
    CumulantSet c;
    for (std::size_t j = 0; j < p.chain.depth(); ++j) {
        c = compose_cumulants(cumulant_array(p.chain.level(j)), h);
        const double next = j + 1 < p.chain.depth() ? p.loadings[j + 1] : 0.0;
        h = {c.kappa1 + next, c.kappa2, c.kappa3, c.kappa4};
    }
    c.kappa1 += p.mu;
    return c;
}

// ---------------------------------------------------------------- branch-tracked sweeps

/// Evaluates a chf along an ordered v-grid, carrying every square root and logarithm of the
/// nested exponent continuously from v = 0. Returns the log-chf at each grid point.
class ChfSweep {
public:
    explicit ChfSweep(const LogPriceParams& p) : p_(p), prev_(p.chain.depth(), cplx(0.0, 0.0)) { reset(); }

    void reset() {
        for (std::size_t j = 0; j < prev_.size(); ++j) prev_[j] = initial(p_.chain.level(j));
        flips_ = 0;
    }

    /// Must be called with v moving in small steps away from the last call (starting at 0).
    cplx log_chf(double v) {
        cplx z = level(0, cplx(0.5 * v * v * p_.sigma * p_.sigma, -v * p_.loadings[0]));
        for (std::size_t j = 1; j < prev_.size(); ++j) z = level(j, cplx(0.0, -v * p_.loadings[j]) + z);
        return cplx(0.0, v * p_.mu) - z;
    }

    /// Number of times the principal branch disagreed with the continuous one.
    int flips() const { return flips_; }

    /// Log-chf on an ascending grid; sweeps outward from the point closest to 0 in both directions.
    static std::vector<cplx> evaluate(const LogPriceParams& p, std::span<const double> grid, int* flips = nullptr) {
        std::vector<cplx> out(grid.size());
        if (grid.empty()) return out;
        std::size_t start = 0;
        for (std::size_t k = 1; k < grid.size(); ++k)
            if (std::abs(grid[k]) < std::abs(grid[start])) start = k;
        ChfSweep up(p);
        const double v0 = grid[start];
        constexpr int ramp = 64;
        for (int r = 1; r <= ramp; ++r) up.log_chf(v0 * r / ramp);
        ChfSweep down = up;
        out[start] = up.log_chf(v0);
        for (std::size_t k = start + 1; k < grid.size(); ++k) out[k] = up.log_chf(grid[k]);
        for (std::size_t k = start; k-- > 0;) out[k] = down.log_chf(grid[k]);
        if (flips) *flips = up.flips() + down.flips();
        return out;
    }

private:
    static cplx initial(const BaseLaw& law) {
        return std::holds_alternative<IGParams>(law) ? cplx(1.0, 0.0) : cplx(0.0, 0.0);
    }

    cplx track_root(std::size_t j, cplx w) {
        if (std::abs(-w - prev_[j]) < std::abs(w - prev_[j])) {
            w = -w;
            ++flips_;
        }
        prev_[j] = w;
        return w;
    }

    cplx track_log(std::size_t j, cplx w) {
        const double k = std::round((prev_[j].imag() - w.imag()) / (2.0 * pi));
        if (k != 0.0) {
            w += cplx(0.0, 2.0 * pi * k);
            ++flips_;
        }
        prev_[j] = w;
        return w;
    }

    cplx level(std::size_t j, cplx s) {
        const BaseLaw& law = p_.chain.level(j);
        if (const auto* g = std::get_if<GammaParams>(&law)) return g->alpha * track_log(j, std::log(1.0 + s / g->lambda));
        if (const auto* q = std::get_if<IGParams>(&law))
            return q->lambda / q->mu * (track_root(j, std::sqrt(1.0 + 2.0 * q->mu * q->mu * s / q->lambda)) - 1.0);
        if (const auto* l = std::get_if<LevyStableParams>(&law)) return track_root(j, std::sqrt(2.0 * l->b * s));
        if (s == cplx(0.0, 0.0)) return s;
        const auto& st = std::get<StableSubParams>(law);
        return std::exp(st.alpha_half * track_log(j, std::log(st.delta * s)));
    }

    const LogPriceParams& p_;
    std::vector<cplx> prev_;
    int flips_ = 0;
};

// ---------------------------------------------------------------- normal-compound-Levy-stable

inline void require_levels(const LogPriceParams& p, std::size_t index, std::size_t min_depth, const char* what) {
    require(p.chain.depth() >= min_depth, std::string(what) + ": chain too short");
    for (const auto& law : p.chain.levels())
        require(law.index() == index, std::string(what) + ": chain has the wrong base law");
}

inline cplx ncls_chf(const LogPriceParams& p, double v) {
    require(p.chain.depth() == 2, "ncls_chf: two-level chain required");
    require_levels(p, 1, 2, "ncls_chf");
    const double bt = std::get<LevyStableParams>(p.chain.level(0)).b;
    const double bu = std::get<LevyStableParams>(p.chain.level(1)).b;
    const cplx i(0.0, 1.0);
    const cplx in = std::sqrt(-2.0 * bt * (i * v * p.rho() - 0.5 * v * v * p.sigma * p.sigma));
    const cplx out = std::sqrt(-2.0 * bu * (i * v * p.gamma_coef() - in));
    return std::exp(i * v * p.mu - out);
}

/// Psi_k = sqrt(-2 b_k (i v g_k - Psi_{k-1})), starting from Psi = v^2 sigma^2 / 2.
inline cplx ncns_chf(const LogPriceParams& p, double v) {
    require_levels(p, 1, 2, "ncns_chf");
    const cplx i(0.0, 1.0);
    cplx psi = 0.5 * v * v * p.sigma * p.sigma;
    for (std::size_t j = 0; j < p.chain.depth(); ++j) {
        const double b = std::get<LevyStableParams>(p.chain.level(j)).b;
        psi = std::sqrt(-2.0 * b * (i * v * p.loadings[j] - psi));
    }
    return std::exp(i * v * p.mu - psi);
}

/// Direct pdf: Levy-stable mixture over the inner clock of the closed-form normal / Levy-stable
/// variance-mean mixture, which involves K1.
inline double ncls_pdf_direct(const LogPriceParams& p, double x) {
    require(p.chain.depth() == 2, "ncls_pdf_direct: two-level chain required");
    require_levels(p, 1, 2, "ncls_pdf_direct");
    require(p.rho() != 0.0, "ncls_pdf_direct: rho must be nonzero; use the FFT route");
    const double bt = std::get<LevyStableParams>(p.chain.level(0)).b;
    const LevyStableParams inner = std::get<LevyStableParams>(p.chain.level(1));
    const double rho = p.rho(), ar = std::abs(rho), s2 = p.sigma * p.sigma;
    auto log_conditional = [&](double y, double u) {
        const double b = bt * u * u;
        const double r = std::hypot(std::sqrt(b * s2), y);
        const double expo = y * rho >= 0.0 ? -ar * b / (std::abs(y) + r) : -ar * (std::abs(y) + r) / s2;
        return 0.5 * std::log(b) + std::log(ar / (pi * p.sigma)) + expo + std::log(bessel_k1_scaled(ar * r / s2)) - std::log(r);
    };
    auto g = [&](double w) {
        const double u = std::exp(w);
        return levy_stable_log_pdf(inner, u) + w + log_conditional(x - p.mu - p.gamma_coef() * u, u);
    };
    return std::exp(log_integrate_exp(g, -60.0, 60.0, 1e-10, 512));
}

// ---------------------------------------------------------------- variance-gamma-gamma

struct ValidityInterval {
    double lo;
    double hi;
    bool contains(double v) const { return v > lo && v < hi; }
};

namespace detail {
inline std::array<double, 4> vgg_unpack(const LogPriceParams& p) {
    require(p.chain.depth() == 2, "VGG: two-level gamma chain required");
    const auto& t = std::get<GammaParams>(p.chain.level(0));
    const auto& u = std::get<GammaParams>(p.chain.level(1));
    return {t.alpha, t.lambda, u.alpha, u.lambda};
}

/// Base of the VGG MGF power, or NaN when the inner logarithm has a nonpositive argument.
inline double vgg_mgf_base(const LogPriceParams& p, double v) {
    const auto [at, lt, au, lu] = vgg_unpack(p);
    const double in = 1.0 - p.rho() * v / lt - p.sigma * p.sigma * v * v / (2.0 * lt);
    if (!(in > 0.0)) return nan;
    return 1.0 - p.gamma_coef() * v / lu + at / lu * std::log(in);
}
}  // namespace detail

/// Interval around 0 on which the VGG MGF is finite: both the inner logarithm argument and
/// the outer base stay positive.
inline ValidityInterval vgg_mgf_bound(const LogPriceParams& p) {
    require_levels(p, 2, 2, "vgg_mgf_bound");
    const double s2 = p.sigma * p.sigma, rho = p.rho();
    const auto [at, lt, au, lu] = detail::vgg_unpack(p);
    const double root = std::sqrt(rho * rho + 2.0 * lt * s2);
    auto edge = [&](double limit) {
        auto ok = [&](double v) { return detail::vgg_mgf_base(p, v) > 0.0; };
        constexpr int steps = 4096;
        double prev = 0.0;
        for (int k = 1; k <= steps; ++k) {
            const double v = limit * k / steps;
            if (!ok(v)) {
                double a = prev, b = v;
                for (int it = 0; it < 200; ++it) {
                    const double m = 0.5 * (a + b);
                    (ok(m) ? a : b) = m;
                }
                return a;
            }
            prev = v;
        }
        return limit;
    };
    return {edge((-root - rho) / s2), edge((root - rho) / s2)};
}

inline double vgg_mgf(const LogPriceParams& p, double v) {
    require(vgg_mgf_bound(p).contains(v) || v == 0.0, "vgg_mgf: v outside validity interval");
    const auto [at, lt, au, lu] = detail::vgg_unpack(p);
    return std::exp(p.mu * v - au * std::log(detail::vgg_mgf_base(p, v)));
}

inline cplx vgg_chf(const LogPriceParams& p, double v) {
    require_levels(p, 2, 2, "vgg_chf");
    const auto [at, lt, au, lu] = detail::vgg_unpack(p);
    const cplx i(0.0, 1.0);
    const cplx in = std::log(1.0 - i * v * p.rho() / lt + p.sigma * p.sigma * v * v / (2.0 * lt));
    const cplx base = 1.0 - i * v * p.gamma_coef() / lu + at / lu * in;
    return std::exp(i * v * p.mu - au * std::log(base));
}

/// Nested logarithms evaluated from the Brownian level outward.
inline cplx multi_vgg_chf(const LogPriceParams& p, double v) {
    require_levels(p, 2, 2, "multi_vgg_chf");
    const cplx i(0.0, 1.0);
    cplx k = 0.5 * v * v * p.sigma * p.sigma;
    for (std::size_t j = 0; j < p.chain.depth(); ++j) {
        const auto& g = std::get<GammaParams>(p.chain.level(j));
        k = g.alpha * std::log(1.0 + (k - i * v * p.loadings[j]) / g.lambda);
    }
    return std::exp(i * v * p.mu - k);
}

/// Conditional-normal mixture over both gamma clocks. With gamma != 0 and u0 = (x - mu)/gamma > 0
/// the mixing integrand behaves like |u - u0|^(2 alpha_T u0 - 1); the neighbourhood of u0 is
/// integrated in log|c|, c = x - mu - gamma u, and the innermost part is added in closed form
/// from the small-c limit of the variance-gamma kernel.
inline double vgg_pdf_direct(const LogPriceParams& p, double x) {
    require_levels(p, 2, 2, "vgg_pdf_direct");
    const auto& outer = std::get<GammaParams>(p.chain.level(0));
    const GammaParams inner = std::get<GammaParams>(p.chain.level(1));
    const double s2 = p.sigma * p.sigma, rho = p.rho(), gam = p.gamma_coef(), d = x - p.mu;
    // log density of rho T + sigma B(T) at c, T ~ Gamma(alpha_T u, lambda_T)
    auto kernel_log = [&](double u, double c) {
        const double shape = outer.alpha * u;
        const double lead = shape * std::log(outer.lambda) - std::lgamma(shape) - 0.5 * std::log(2.0 * pi * s2);
        auto h = [&](double z) {
            const double t = std::exp(z);
            const double r = c - rho * t;
            return (shape - 0.5) * z - outer.lambda * t - r * r / (2.0 * s2 * t);
        };
        double centre = std::log(std::max(shape / outer.lambda, 1e-300));
        if (c != 0.0) centre = std::min(centre, 2.0 * std::log(std::abs(c)) - std::log(s2));
        return lead + log_integrate_exp(h, std::max(centre - 150.0, -700.0), std::max(centre, 0.0) + 40.0, 1e-10, 512);
    };
    auto over_u = [&](double w) {
        const double u = std::exp(w);
        return gamma_log_pdf(inner, u) + w + kernel_log(u, d - gam * u);
    };
    const double centre = std::log(inner.alpha / inner.lambda);
    const double u0 = gam != 0.0 ? d / gam : -1.0;
    if (!(u0 > 0.0)) return std::exp(log_integrate_exp(over_u, centre - 60.0, centre + 12.0, 1e-9, 256));

    const double w0 = std::log(u0);
    std::vector<double> parts;
    parts.push_back(log_integrate_exp(over_u, std::min(centre, w0) - 60.0, w0 - std::log(2.0), 1e-9, 256));
    parts.push_back(log_integrate_exp(over_u, w0 + std::log(1.5), std::max(centre, w0) + 12.0, 1e-9, 256));
    const double ag = std::abs(gam);
    double eps = 0.5 * std::abs(d);
    if (rho != 0.0) eps = std::min(eps, s2 / std::abs(rho));
    eps = 1e-10 * std::min(eps, p.sigma / std::sqrt(outer.lambda));
    for (double side : {1.0, -1.0}) {
        auto over_c = [&](double r) {
            const double c = side * std::exp(r);
            const double u = u0 - c / gam;
            return r - std::log(ag) + gamma_log_pdf(inner, u) + kernel_log(u, c);
        };
        parts.push_back(log_integrate_exp(over_c, std::log(eps), std::log(0.5 * std::abs(d)), 1e-9, 256));
    }
    const double a0 = outer.alpha * u0;
    if (a0 < 0.45)
        parts.push_back(gamma_log_pdf(inner, u0) - std::log(ag) + a0 * std::log(outer.lambda) + std::lgamma(0.5 - a0) +
                        (0.5 - a0) * std::log(2.0 * s2) + 2.0 * a0 * std::log(eps) - std::lgamma(a0 + 1.0) -
                        0.5 * std::log(2.0 * pi * s2));
    double top = -inf;
    for (double v : parts) top = std::max(top, v);
    if (top == -inf) return 0.0;
    double sum = 0.0;
    for (double v : parts) sum += std::exp(v - top);
    return std::exp(top) * sum;
}

/// Closed-form VGG moments with A = alpha_T rho + lambda_T gamma and
/// D = A^2 + lambda_U alpha_T (rho^2 + sigma^2 lambda_T).
inline MomentSet vgg_moments(const LogPriceParams& p) {
    require_levels(p, 2, 2, "vgg_moments");
    const auto [at, lt, au, lu] = detail::vgg_unpack(p);
    const double rho = p.rho(), gam = p.gamma_coef(), s2 = p.sigma * p.sigma;
    const double A = at * rho + lt * gam;
    const double E = rho * rho + s2 * lt;
    const double D = A * A + lu * at * E;
    const double mean = p.mu + au * A / (lu * lt);
    const double var = au * D / (lu * lu * lt * lt);
    const double skew_num = 2.0 * A * A * A + 3.0 * lu * at * E * A + lu * lu * at * rho * (2.0 * rho * rho + 3.0 * s2 * lt);
    const double skew = skew_num / (std::sqrt(au) * std::pow(D, 1.5));
    const double kurt_num = 6.0 * std::pow(A, 4) + 12.0 * lu * at * E * A * A +
                            4.0 * lu * lu * at * rho * (2.0 * rho * rho + 3.0 * s2 * lt) * A +
                            3.0 * lu * lu * at * at * E * E +
                            3.0 * lu * lu * lu * at * (2.0 * std::pow(rho, 4) + 4.0 * rho * rho * s2 * lt + s2 * s2 * lt * lt);
    const double kurt = kurt_num / (au * D * D);
    return {Moment::finite(mean), Moment::finite(var), Moment::finite(skew), Moment::finite(kurt)};
}

// ---------------------------------------------------------------- normal-compound-inverse-Gaussian

inline cplx ncig_chf(const LogPriceParams& p, double v) {
    require(p.chain.depth() == 2, "ncig_chf: two-level chain required");
    require_levels(p, 3, 2, "ncig_chf");
    const auto& t = std::get<IGParams>(p.chain.level(0));
    const auto& u = std::get<IGParams>(p.chain.level(1));
    const cplx i(0.0, 1.0);
    const cplx in = 1.0 - std::sqrt(1.0 - 2.0 * t.mu * t.mu / t.lambda * (i * v * p.rho() - 0.5 * v * v * p.sigma * p.sigma));
    const cplx arg = t.lambda / t.mu * in + i * v * p.gamma_coef();
    return std::exp(i * v * p.mu + u.lambda / u.mu * (1.0 - std::sqrt(1.0 - 2.0 * u.mu * u.mu / u.lambda * arg)));
}

/// ln phi_k = (lambda_k/mu_k)(1 - sqrt(1 - (2 mu_k^2/lambda_k)(i v g_k + ln phi_{k-1}))).
inline cplx multi_ncig_chf(const LogPriceParams& p, double v) {
    require_levels(p, 3, 2, "multi_ncig_chf");
    const cplx i(0.0, 1.0);
    cplx l = -0.5 * v * v * p.sigma * p.sigma;
    for (std::size_t j = 0; j < p.chain.depth(); ++j) {
        const auto& q = std::get<IGParams>(p.chain.level(j));
        l = q.lambda / q.mu * (1.0 - std::sqrt(1.0 - 2.0 * q.mu * q.mu / q.lambda * (i * v * p.loadings[j] + l)));
    }
    return std::exp(i * v * p.mu + l);
}

inline double ncig_pdf_direct(const LogPriceParams& p, double x) {
    require(p.chain.depth() == 2, "ncig_pdf_direct: two-level chain required");
    require_levels(p, 3, 2, "ncig_pdf_direct");
    const auto& outer = std::get<IGParams>(p.chain.level(0));
    const IGParams inner = std::get<IGParams>(p.chain.level(1));
    const double s2 = p.sigma * p.sigma;
    auto inner_log = [&](double u) {
        const double m = outer.mu * u, l = outer.lambda * u * u;
        const double c = x - p.mu - p.gamma_coef() * u;
        const double lead = 0.5 * std::log(l / (2.0 * pi)) - 0.5 * std::log(2.0 * pi * s2);
        auto h = [&](double z) {
            const double t = std::exp(z);
            const double r = c - p.rho() * t;
            return -2.0 * z - l * (t - m) * (t - m) / (2.0 * m * m * t) - r * r / (2.0 * s2 * t) + z;
        };
        const double centre = std::log(m);
        return lead + log_integrate_exp(h, centre - 60.0, centre + 20.0, 1e-10, 512);
    };
    auto g = [&](double w) {
        const double u = std::exp(w);
        return ig_log_pdf(inner, u) + w + inner_log(u);
    };
    const double centre = std::log(inner.mu);
    return std::exp(log_integrate_exp(g, centre - 40.0, centre + 20.0, 1e-9, 256));
}

/// Mean and variance in closed form; skewness and kurtosis from the cumulants of the
/// per-unit inner increment composed with the inner IG law.
inline MomentSet ncig_moments(const LogPriceParams& p) {
    require(p.chain.depth() == 2, "ncig_moments: two-level chain required");
    require_levels(p, 3, 2, "ncig_moments");
    const auto& t = std::get<IGParams>(p.chain.level(0));
    const auto& u = std::get<IGParams>(p.chain.level(1));
    const double rho = p.rho(), gam = p.gamma_coef(), s2 = p.sigma * p.sigma;
    const double mt = t.mu, lt = t.lambda, mu = u.mu, lu = u.lambda;
    const double mean = p.mu + mu * gam + mu * mt * rho;
    const double a = gam + rho * mt;
    const double b = mt * mt * mt * rho * rho / lt + mt * s2;
    const double c = 3.0 * std::pow(mt, 5) * rho * rho * rho / (lt * lt) + 3.0 * mt * mt * mt * rho * s2 / lt;
    const double d = 15.0 * std::pow(mt, 7) * std::pow(rho, 4) / (lt * lt * lt) +
                     18.0 * std::pow(mt, 5) * rho * rho * s2 / (lt * lt) + 3.0 * mt * mt * mt * s2 * s2 / lt;
    const double var = mu * mu * mu / lu * a * a + mu * b;
    const CumulantSet k = compose_cumulants(cumulant_array(u), {a, b, c, d});
    return {Moment::finite(mean), Moment::finite(var), Moment::finite(k.skewness()),
            Moment::numeric(k.excess_kurtosis())};
}

// ---------------------------------------------------------------- return laws

enum class Family { ncls, ncns, vgg, vggn, ncig, ncign, single };

inline const char* to_string(Family f) {
    switch (f) {
        case Family::ncls: return "ncls";
        case Family::ncns: return "ncns";
        case Family::vgg: return "vgg";
        case Family::vggn: return "vggn";
        case Family::ncig: return "ncig";
        case Family::ncign: return "ncign";
        case Family::single: return "single";
    }
    return "?";
}

struct ReturnLaw {
    Family family;
    LogPriceParams params;

    ReturnLaw(Family f, LogPriceParams p) : family(f), params(std::move(p)) {
        const auto depth = params.chain.depth();
        switch (family) {
            case Family::ncls: require_levels(params, 1, 2, "ReturnLaw"); require(depth == 2, "ReturnLaw: ncls is two-level"); break;
            case Family::ncns: require_levels(params, 1, 2, "ReturnLaw"); break;
            case Family::vgg: require_levels(params, 2, 2, "ReturnLaw"); require(depth == 2, "ReturnLaw: vgg is two-level"); break;
            case Family::vggn: require_levels(params, 2, 2, "ReturnLaw"); break;
            case Family::ncig: require_levels(params, 3, 2, "ReturnLaw"); require(depth == 2, "ReturnLaw: ncig is two-level"); break;
            case Family::ncign: require_levels(params, 3, 2, "ReturnLaw"); break;
            case Family::single: require(depth == 1, "ReturnLaw: single-clock law has one level"); break;
        }
    }

    cplx chf(double v) const {
        switch (family) {
            case Family::ncls: return ncls_chf(params, v);
            case Family::ncns: return ncns_chf(params, v);
            case Family::vgg: return vgg_chf(params, v);
            case Family::vggn: return multi_vgg_chf(params, v);
            case Family::ncig: return ncig_chf(params, v);
            case Family::ncign: return multi_ncig_chf(params, v);
            case Family::single: return return_chf(params, v);
        }
        return {};
    }

    TransformHandle handle() const {
        auto self = *this;
        return make_chf([self](double v) { return self.chf(v); });
    }

    bool heavy_tailed() const {
        for (const auto& law : params.chain.levels())
            if (std::holds_alternative<LevyStableParams>(law) || std::holds_alternative<StableSubParams>(law)) return true;
        return false;
    }

    MomentSet moments() const {
        if (heavy_tailed()) return {Moment::undefined(), Moment::undefined(), Moment::undefined(), Moment::undefined()};
        if (family == Family::vgg) return vgg_moments(params);
        if (family == Family::ncig) return ncig_moments(params);
        return return_cumulants(params).moments();
    }

    DensityGrid density(FFTConfig cfg = {}) const {
        if (heavy_tailed())
            require(!std::isnan(cfg.x_span), "ReturnLaw::density: heavy-tailed laws need an explicit x_span");
        return chf_to_pdf_fft(handle(), cfg);
    }
};

inline std::vector<double> sample_return(const ReturnLaw& law, std::size_t n, std::uint64_t seed) {
    require(n >= 1, "sample_return: n must be at least 1");
    Rng rng(seed);
    std::vector<double> out(n), clocks;
    for (auto& x : out) x = draw_return(law.params, rng, clocks);
    return out;
}

}  // namespace msub
