#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "msub/core.hpp"
#include "msub/numerics/mixture.hpp"
#include "msub/subordinators.hpp"

namespace msub {

/// Composition of subordinators, listed outer to inner: levels[0] is the clock that is
/// evaluated last, levels[n-1] runs on calendar time. V(t) = L0(L1(...L{n-1}(t))).
class CompoundChain {
public:
    explicit CompoundChain(std::vector<BaseLaw> levels) : levels_(std::move(levels)) {
        require(!levels_.empty(), "CompoundChain: at least one level required");
    }
    CompoundChain(std::initializer_list<BaseLaw> levels) : CompoundChain(std::vector<BaseLaw>(levels)) {}

    std::size_t depth() const { return levels_.size(); }
    const BaseLaw& level(std::size_t i) const { return levels_.at(i); }
    const std::vector<BaseLaw>& levels() const { return levels_; }

    /// Phi_V = Phi_inner o ... o Phi_outer.
    cplx laplace_exponent(cplx s) const {
        cplx z = s;
        for (const auto& law : levels_) z = msub::laplace_exponent(law, z);
        return z;
    }
    double laplace_exponent(double s) const { return laplace_exponent(cplx(s, 0.0)).real(); }

    /// Draws every partial composition at unit calendar time: out[j] = Lj(L{j+1}(...(1))).
    void draw_levels(Rng& rng, std::vector<double>& out) const {
        out.resize(levels_.size());
        double t = 1.0;
        for (std::size_t j = levels_.size(); j-- > 0;) {
            t = draw_at_time(levels_[j], t, rng);
            out[j] = t;
        }
    }

    double draw(Rng& rng) const {
        double t = 1.0;
        for (std::size_t j = levels_.size(); j-- > 0;) t = draw_at_time(levels_[j], t, rng);
        return t;
    }

private:
    std::vector<BaseLaw> levels_;
};

inline std::vector<double> sample_compound(const CompoundChain& chain, std::size_t n, std::uint64_t seed) {
    require(n >= 1, "sample_compound: n must be at least 1");
    Rng rng(seed);
    std::vector<double> out(n);
    for (auto& x : out) x = chain.draw(rng);
    return out;
}

struct TauStableParams {
    double tau;
    double B;
    TauStableParams(double t, double b) : tau(t), B(b) {
        require(t >= 0.0 && std::isfinite(t), "TauStableParams: tau must be nonnegative");
        require(b > 0.0 && std::isfinite(b), "TauStableParams: B must be positive");
    }
};

struct CumulantSet {
    double kappa1 = 0.0, kappa2 = 0.0, kappa3 = 0.0, kappa4 = 0.0;

    double mean() const { return kappa1; }
    double variance() const { return kappa2; }
    double skewness() const { return kappa3 / std::pow(kappa2, 1.5); }
    double excess_kurtosis() const { return kappa4 / (kappa2 * kappa2); }
    MomentSet moments() const {
        return {Moment::finite(mean()), Moment::finite(variance()), Moment::finite(skewness()),
                Moment::finite(excess_kurtosis())};
    }
};

/// Cumulants of K_inner(h(v)) from the first four derivatives of h at 0 (h(0) = 0) and the
/// cumulants of the inner law (Faa di Bruno to fourth order).
inline CumulantSet compose_cumulants(const std::array<double, 4>& inner, const std::array<double, 4>& h) {
    const auto [u1, u2, u3, u4] = inner;
    const auto [h1, h2, h3, h4] = h;
    CumulantSet c;
    c.kappa1 = u1 * h1;
    c.kappa2 = u2 * h1 * h1 + u1 * h2;
    c.kappa3 = u3 * h1 * h1 * h1 + 3.0 * u2 * h1 * h2 + u1 * h3;
    c.kappa4 = u4 * h1 * h1 * h1 * h1 + 6.0 * u3 * h1 * h1 * h2 + u2 * (3.0 * h2 * h2 + 4.0 * h1 * h3) + u1 * h4;
    return c;
}

inline std::array<double, 4> cumulant_array(const BaseLaw& law) {
    const auto c = unit_cumulants(law);
    require(c.size() == 4, "cumulants are undefined for stable laws");
    return {c[0], c[1], c[2], c[3]};
}

/// Cumulants of V(1) for a chain of gamma / IG levels.
inline CumulantSet chain_cumulants(const CompoundChain& chain) {
    auto h = cumulant_array(chain.level(0));
    CumulantSet c{h[0], h[1], h[2], h[3]};
    for (std::size_t j = 1; j < chain.depth(); ++j) {
        c = compose_cumulants(cumulant_array(chain.level(j)), h);
        h = {c.kappa1, c.kappa2, c.kappa3, c.kappa4};
    }
    return c;
}

// ---------------------------------------------------------------- stable chains

inline double double_stable_laplace_exponent(const StableSubParams& outer, const LevyStableParams& inner, double s) {
    require(s > 0.0, "double_stable_laplace_exponent: s must be positive");
    return std::sqrt(2.0 * inner.b) * std::pow(outer.delta * s, 0.5 * outer.alpha_half);
}

/// Laplace exponent of an n-fold Levy-stable composition; chain given outer to inner, so the
/// innermost scale enters with exponent 1/2 and the outermost with 2^-n.
inline double n_stable_laplace_exponent(std::span<const LevyStableParams> chain, double s) {
    require(s > 0.0, "n_stable_laplace_exponent: s must be positive");
    require(!chain.empty(), "n_stable_laplace_exponent: empty chain");
    const auto n = static_cast<int>(chain.size());
    double log_val = std::ldexp(std::log(s), -n);
    for (int j = 0; j < n; ++j) log_val += std::ldexp(std::log(2.0 * chain[j].b), -(n - j));
    return std::exp(log_val);
}

inline double tau_stable_laplace_exponent(const TauStableParams& p, double s) {
    require(s > 0.0, "tau_stable_laplace_exponent: s must be positive");
    const double e = std::exp2(-p.tau);
    return std::exp(e * std::log(s) + (1.0 - e) * std::log(2.0 * p.B));
}

// ---------------------------------------------------------------- gamma chains

inline double double_gamma_mgf_bound(const GammaParams& outer, const GammaParams& inner) {
    return outer.lambda * -std::expm1(-inner.lambda / outer.alpha);
}

inline double double_gamma_mgf(const GammaParams& outer, const GammaParams& inner, double v) {
    require(v < double_gamma_mgf_bound(outer, inner), "double_gamma_mgf: v outside validity interval");
    const double base = 1.0 + outer.alpha / inner.lambda * std::log1p(-v / outer.lambda);
    return std::exp(-inner.alpha * std::log(base));
}

inline double double_gamma_log_pdf(const GammaParams& outer, const GammaParams& inner, double x) {
    require(x > 0.0, "double_gamma_pdf: x must be positive");
    const double at = outer.alpha, lt = outer.lambda, au = inner.alpha, lu = inner.lambda;
    const double lx = std::log(x), llt = std::log(lt);
    auto g = [&](double w) {
        const double u = std::exp(w);
        const double s = at * u;
        return s * llt - std::lgamma(s) + (s - 1.0) * lx + (au - 1.0) * w - lu * u + w;
    };
    const double li = log_integrate_exp(g, -60.0, std::log(1e4 + 100.0 * au / lu));
    return -lt * x + au * std::log(lu) - std::lgamma(au) + li;
}

inline double double_gamma_pdf(const GammaParams& outer, const GammaParams& inner, double x) {
    return std::exp(double_gamma_log_pdf(outer, inner, x));
}

inline MomentSet double_gamma_moments(const GammaParams& outer, const GammaParams& inner) {
    const double at = outer.alpha, lt = outer.lambda, au = inner.alpha, lu = inner.lambda;
    const double r = lu / at;
    const double mean = (at / lt) * (au / lu);
    const double var = (at / (lt * lt)) * (au / (lu * lu)) * (at + lu);
    const double skew = 2.0 / std::sqrt(au) * (1.0 + 1.5 * r + r * r) / std::pow(1.0 + r, 1.5);
    const double kurt = 6.0 / au * (1.0 + 2.0 * r + 11.0 / 6.0 * r * r + r * r * r) / ((1.0 + r) * (1.0 + r));
    return {Moment::finite(mean), Moment::finite(var), Moment::finite(skew), Moment::finite(kurt)};
}

/// Largest v for which every nested logarithm of the multi-gamma MGF has a positive argument.
inline double multi_gamma_mgf_bound(std::span<const GammaParams> chain) {
    require(!chain.empty(), "multi_gamma_mgf_bound: empty chain");
    // c bounds the cumulant generating function of the partial composition.
    double c = inf;
    for (std::size_t k = chain.size(); k-- > 1;) {
        const double lim = std::isinf(c) ? chain[k].lambda : chain[k].lambda * -std::expm1(-c / chain[k].alpha);
        c = lim;
    }
    const auto& g0 = chain[0];
    return std::isinf(c) ? g0.lambda : g0.lambda * -std::expm1(-c / g0.alpha);
}

inline double multi_gamma_mgf(std::span<const GammaParams> chain, double v) {
    require(v < multi_gamma_mgf_bound(chain), "multi_gamma_mgf: v outside validity interval");
    double k = -chain[0].alpha * std::log1p(-v / chain[0].lambda);
    for (std::size_t j = 1; j < chain.size(); ++j) k = -chain[j].alpha * std::log1p(-k / chain[j].lambda);
    return std::exp(k);
}

/// Cumulant recursion for the multi-gamma composition; the level-n cumulants follow from
/// K_n(v) = -alpha_n ln(1 - K_{n-1}(v)/lambda_n).
inline CumulantSet multi_gamma_cumulants(std::span<const GammaParams> chain) {
    require(!chain.empty(), "multi_gamma_cumulants: empty chain");
    const double a1 = chain[0].alpha, l1 = chain[0].lambda;
    double k1 = a1 / l1, k2 = a1 / (l1 * l1), k3 = 2.0 * a1 / std::pow(l1, 3), k4 = 6.0 * a1 / std::pow(l1, 4);
    for (std::size_t j = 1; j < chain.size(); ++j) {
        const double a = chain[j].alpha, l = chain[j].lambda, f = a / l;
        const double n1 = f * k1;
        const double n2 = f * (k1 * k1 / l + k2);
        const double n3 = f * (2.0 * k1 * k1 * k1 / (l * l) + 3.0 * k1 * k2 / l + k3);
        const double n4 = f * (6.0 * std::pow(k1, 4) / std::pow(l, 3) + 12.0 * k1 * k1 * k2 / (l * l) +
                               (3.0 * k2 * k2 + 4.0 * k1 * k3) / l + k4);
        k1 = n1;
        k2 = n2;
        k3 = n3;
        k4 = n4;
    }
    return {k1, k2, k3, k4};
}

// ---------------------------------------------------------------- inverse Gaussian chains

/// Upper end of the interval on which both nested radicands of the double-IG MGF are positive.
inline double double_ig_mgf_bound(const IGParams& outer, const IGParams& inner) {
    const double mt = outer.mu, lt = outer.lambda, mu = inner.mu, lu = inner.lambda;
    const double first = lt / (2.0 * mt * mt);
    const double c = lu * mt / (2.0 * mu * mu * lt);
    if (c >= 1.0) return first;
    return first * c * (2.0 - c);
}

inline double double_ig_mgf(const IGParams& outer, const IGParams& inner, double v) {
    require(v < double_ig_mgf_bound(outer, inner), "double_ig_mgf: v outside validity interval");
    const double mt = outer.mu, lt = outer.lambda, mu = inner.mu, lu = inner.lambda;
    const double in = 1.0 - std::sqrt(1.0 - 2.0 * mt * mt * v / lt);
    return std::exp(lu / mu * (1.0 - std::sqrt(1.0 - 2.0 * (mu * mu / lu) * (lt / mt) * in)));
}

inline cplx double_ig_chf(const IGParams& outer, const IGParams& inner, double v) {
    const double mt = outer.mu, lt = outer.lambda, mu = inner.mu, lu = inner.lambda;
    const cplx in = 1.0 - std::sqrt(1.0 - cplx(0.0, 2.0 * mt * mt * v / lt));
    return std::exp(lu / mu * (1.0 - std::sqrt(1.0 - 2.0 * (mu * mu / lu) * (lt / mt) * in)));
}

inline double double_ig_log_pdf(const IGParams& outer, const IGParams& inner, double x) {
    require(x > 0.0, "double_ig_pdf: x must be positive");
    const double mt = outer.mu, lt = outer.lambda, mu = inner.mu, lu = inner.lambda;
    auto g = [&](double w) {
        const double u = std::exp(w);
        const double a = x - mt * u, b = u - mu;
        return -0.5 * w - lt * a * a / (2.0 * mt * mt * x) - lu * b * b / (2.0 * mu * mu * u) + w;
    };
    const double centre = std::log(x / mt);
    const double li = log_integrate_exp(g, std::min(centre, std::log(mu)) - 40.0, std::max(centre, std::log(mu)) + 40.0);
    return -std::log(2.0 * pi) + 0.5 * std::log(lt * lu / (x * x * x)) + li;
}

inline double double_ig_pdf(const IGParams& outer, const IGParams& inner, double x) {
    return std::exp(double_ig_log_pdf(outer, inner, x));
}

inline MomentSet double_ig_moments(const IGParams& outer, const IGParams& inner) {
    const double mt = outer.mu, lt = outer.lambda, mu = inner.mu, lu = inner.lambda;
    const double mean = mt * mu;
    const double var = mu * mu * mu * mt * mt / lu + mt * mt * mt * mu / lt;
    const double p = mu * mu / lu, q = mt / lt;
    const double skew = 3.0 * (p * p + p * q + q * q) / (std::sqrt(mu) * std::pow(p + q, 1.5));
    const double kurt = 3.0 * (5.0 * p * p * p + 6.0 * p * p * q + 5.0 * p * q * q + 5.0 * q * q * q) /
                        (mu * (p + q) * (p + q));
    return {Moment::finite(mean), Moment::finite(var), Moment::finite(skew), Moment::finite(kurt)};
}

/// n-fold IG chf, chain outer to inner, built from the innermost exponent outward:
/// ln phi_k = (lambda_k/mu_k)(1 - sqrt(1 - (2 mu_k^2/lambda_k) ln phi_{k-1})).
inline cplx multi_ig_chf(std::span<const IGParams> chain, double v) {
    require(!chain.empty(), "multi_ig_chf: empty chain");
    cplx z(0.0, v);
    for (const auto& p : chain) z = p.lambda / p.mu * (1.0 - std::sqrt(1.0 - 2.0 * p.mu * p.mu / p.lambda * z));
    return std::exp(z);
}

}  // namespace msub
