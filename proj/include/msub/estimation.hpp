#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "msub/behavioral.hpp"
#include "msub/compound.hpp"
#include "msub/core.hpp"
#include "msub/diagnostics.hpp"
#include "msub/logprice.hpp"
#include "msub/numerics/density.hpp"
#include "msub/numerics/normal.hpp"
#include "msub/numerics/stats.hpp"
#include "msub/subordinators.hpp"

namespace msub {

enum class Model { normal, ig, cig, ncig, vgg };

inline const char* to_string(Model m) {
    switch (m) {
        case Model::normal: return "normal";
        case Model::ig: return "ig";
        case Model::cig: return "cig";
        case Model::ncig: return "ncig";
        case Model::vgg: return "vgg";
    }
    return "?";
}

inline Model model_from_string(std::string_view s) {
    for (Model m : {Model::normal, Model::ig, Model::cig, Model::ncig, Model::vgg})
        if (s == to_string(m)) return m;
    throw config_error("unknown model '" + std::string(s) + "' (expected normal, ig, cig, ncig or vgg)");
}

enum class ParamKind { positive, loading, location };

struct ParamSpec {
    const char* name;
    ParamKind kind;
};

inline std::span<const ParamSpec> param_specs(Model m) {
    using K = ParamKind;
    static constexpr ParamSpec normal[] = {{"mu", K::location}, {"sigma", K::positive}};
    static constexpr ParamSpec ig[] = {{"mu", K::positive}, {"lambda", K::positive}};
    static constexpr ParamSpec cig[] = {
        {"mu_t", K::positive}, {"lambda_t", K::positive}, {"mu_u", K::positive}, {"lambda_u", K::positive}};
    static constexpr ParamSpec ncig[] = {{"mu_t", K::positive}, {"lambda_t", K::positive}, {"mu_u", K::positive},
                                         {"lambda_u", K::positive}, {"mu", K::location},     {"gamma", K::loading},
                                         {"rho", K::loading},       {"sigma", K::positive}};
    static constexpr ParamSpec vgg[] = {{"alpha_t", K::positive}, {"lambda_t", K::positive}, {"alpha_u", K::positive},
                                        {"lambda_u", K::positive}, {"mu", K::location},       {"gamma", K::loading},
                                        {"rho", K::loading},       {"sigma", K::positive}};
    switch (m) {
        case Model::normal: return normal;
        case Model::ig: return ig;
        case Model::cig: return cig;
        case Model::ncig: return ncig;
        case Model::vgg: return vgg;
    }
    return {};
}

inline constexpr double positive_min = 1e-8, positive_max = 1e8, loading_bound = 10.0;

struct ModelParams {
    Model model;
    std::vector<double> values;

    ModelParams(Model m, std::vector<double> v) : model(m), values(std::move(v)) {
        const auto specs = param_specs(model);
        require(values.size() == specs.size(), std::string("ModelParams: ") + to_string(model) + " expects " +
                                                   std::to_string(specs.size()) + " parameters");
        for (std::size_t i = 0; i < specs.size(); ++i) {
            const double x = values[i];
            require(std::isfinite(x), std::string("ModelParams: ") + specs[i].name + " must be finite");
            if (specs[i].kind == ParamKind::positive)
                require(x > 0.0, std::string("ModelParams: ") + specs[i].name + " must be positive");
        }
    }

    static ModelParams from_named(Model m, const std::map<std::string, double>& named) {
        std::vector<double> v;
        for (const auto& s : param_specs(m)) {
            auto it = named.find(s.name);
            if (it == named.end()) throw config_error(std::string("missing parameter '") + s.name + "'");
            v.push_back(it->second);
        }
        for (const auto& [k, x] : named) {
            (void)x;
            if (!index_of(m, k)) throw config_error("unknown parameter '" + k + "' for model " + to_string(m));
        }
        return {m, std::move(v)};
    }

    static std::optional<std::size_t> index_of(Model m, std::string_view name) {
        const auto specs = param_specs(m);
        for (std::size_t i = 0; i < specs.size(); ++i)
            if (name == specs[i].name) return i;
        return std::nullopt;
    }

    double operator[](std::string_view name) const {
        const auto i = index_of(model, name);
        require(i.has_value(), "ModelParams: unknown parameter " + std::string(name));
        return values[*i];
    }

    std::map<std::string, double> named() const {
        std::map<std::string, double> out;
        const auto specs = param_specs(model);
        for (std::size_t i = 0; i < specs.size(); ++i) out[specs[i].name] = values[i];
        return out;
    }
};

inline LogPriceParams model_logprice(const ModelParams& p) {
    if (p.model == Model::ncig)
        return LogPriceParams::two_level(p["mu"], p["gamma"], p["rho"], p["sigma"], IGParams(p["mu_t"], p["lambda_t"]),
                                         IGParams(p["mu_u"], p["lambda_u"]));
    if (p.model == Model::vgg)
        return LogPriceParams::two_level(p["mu"], p["gamma"], p["rho"], p["sigma"],
                                         GammaParams(p["alpha_t"], p["lambda_t"]), GammaParams(p["alpha_u"], p["lambda_u"]));
    throw domain_error(std::string("model_logprice: ") + to_string(p.model) + " is not a log-price model");
}

inline std::function<cplx(double)> model_chf_fn(const ModelParams& p) {
    switch (p.model) {
        case Model::normal: {
            const double m = p["mu"], s = p["sigma"];
            return [m, s](double v) { return std::exp(cplx(-0.5 * v * v * s * s, v * m)); };
        }
        case Model::ig: {
            const IGParams q(p["mu"], p["lambda"]);
            return [q](double v) { return ig_chf(q, v); };
        }
        case Model::cig: {
            const IGParams t(p["mu_t"], p["lambda_t"]), u(p["mu_u"], p["lambda_u"]);
            return [t, u](double v) { return double_ig_chf(t, u, v); };
        }
        case Model::ncig: {
            auto lp = model_logprice(p);
            return [lp](double v) { return ncig_chf(lp, v); };
        }
        case Model::vgg: {
            auto lp = model_logprice(p);
            return [lp](double v) { return vgg_chf(lp, v); };
        }
    }
    return {};
}

inline TransformHandle model_chf(const ModelParams& p) { return make_chf(model_chf_fn(p)); }

inline MomentSet model_moments(const ModelParams& p) {
    switch (p.model) {
        case Model::normal: {
            const double s = p["sigma"];
            return {Moment::finite(p["mu"]), Moment::finite(s * s), Moment::finite(0.0), Moment::finite(0.0)};
        }
        case Model::ig: return ig_moments(IGParams(p["mu"], p["lambda"]));
        case Model::cig: return double_ig_moments(IGParams(p["mu_t"], p["lambda_t"]), IGParams(p["mu_u"], p["lambda_u"]));
        case Model::ncig: return ncig_moments(model_logprice(p));
        case Model::vgg: return vgg_moments(model_logprice(p));
    }
    return {};
}

inline std::vector<double> model_sample(const ModelParams& p, std::size_t n, std::uint64_t seed) {
    require(n >= 1, "model_sample: n must be at least 1");
    switch (p.model) {
        case Model::normal: {
            Rng rng(seed);
            std::vector<double> out(n);
            for (auto& x : out) x = p["mu"] + p["sigma"] * rng.normal();
            return out;
        }
        case Model::ig: return sample_ig(IGParams(p["mu"], p["lambda"]), n, seed);
        case Model::cig:
            return sample_compound(CompoundChain{IGParams(p["mu_t"], p["lambda_t"]), IGParams(p["mu_u"], p["lambda_u"])},
                                   n, seed);
        case Model::ncig: return sample_return(ReturnLaw(Family::ncig, model_logprice(p)), n, seed);
        case Model::vgg: return sample_return(ReturnLaw(Family::vgg, model_logprice(p)), n, seed);
    }
    return {};
}

/// FFT settings whose grid covers the data with a margin, at a resolution tied to the
/// law's standard deviation.
inline FFTConfig covering_fft_config(const ModelParams& p, std::span<const double> data, FFTConfig cfg = {}) {
    if (!std::isnan(cfg.x_span) && !std::isnan(cfg.x_center)) return cfg;
    const auto [m, sd] = chf_location_scale(model_chf_fn(p));
    double lo = m - 12.0 * sd, hi = m + 12.0 * sd;
    for (double x : data) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
    if (std::isnan(cfg.x_center)) cfg.x_center = 0.5 * (lo + hi);
    if (std::isnan(cfg.x_span)) cfg.x_span = std::max(0.5 * (hi - lo), std::max(cfg.x_center - lo, hi - cfg.x_center));
    while (2.0 * cfg.x_span / static_cast<double>(cfg.grid_size) > sd / 400.0 && cfg.grid_size < (std::size_t{1} << 22))
        cfg.grid_size *= 2;
    return cfg;
}

/// CDF of a fitted model: closed form for normal and IG, FFT tabulation otherwise.
inline CdfHandle model_cdf(const ModelParams& p, std::span<const double> data, FFTConfig cfg = {}) {
    if (p.model == Model::normal) {
        const double m = p["mu"], s = p["sigma"];
        return {[m, s](double x) { return normal_cdf((x - m) / s); }, m - 40.0 * s, m + 40.0 * s};
    }
    if (p.model == Model::ig) {
        const IGParams q(p["mu"], p["lambda"]);
        const double sd = std::sqrt(q.mu * q.mu * q.mu / q.lambda);
        return {[q](double x) { return x <= 0.0 ? 0.0 : ig_cdf(q, x); }, 0.0, q.mu + 200.0 * sd};
    }
    return CdfHandle::from_grid(chf_to_pdf_fft(model_chf(p), covering_fft_config(p, data, cfg)));
}

// ---------------------------------------------------------------- closed-form estimators

inline IGParams ig_mle(std::span<const double> data) {
    require(data.size() >= 2, "ig_mle: need at least two observations");
    double s = 0.0;
    for (double x : data) {
        if (!(x > 0.0)) throw data_error("ig_mle: data must be positive");
        s += x;
    }
    const auto n = static_cast<double>(data.size());
    const double mean = s / n;
    double r = 0.0;
    for (double x : data) r += 1.0 / x - 1.0 / mean;
    if (!(r > 1e-14 * n / mean)) throw data_error("ig_mle: degenerate sample (no spread)");
    return {mean, n / r};
}

inline ModelParams normal_mle(std::span<const double> data) {
    const MomentSet m = sample_moments(data);
    const auto n = static_cast<double>(data.size());
    const double var = m.variance.value * (n - 1.0) / n;
    if (!(var > 0.0)) throw data_error("normal_mle: degenerate sample (no spread)");
    return {Model::normal, {m.mean.value, std::sqrt(var)}};
}

// ---------------------------------------------------------------- empirical chf objective

enum class EcfWeight { gaussian, uniform };

struct ECFConfig {
    /// Frequency nodes on [0, span] in units of 1/sd of the data.
    std::size_t points = 64;
    double span = 4.0;
    EcfWeight weight = EcfWeight::gaussian;
    int max_evals = 4000;
    int restarts = 16;
    double tol = 1e-10;
    std::uint64_t seed = 1;

    void validate() const {
        require(points >= 2, "ECFConfig: points must be at least 2");
        require(span >= 0.0 && std::isfinite(span), "ECFConfig: span must be nonnegative");
        require(max_evals > 0, "ECFConfig: max_evals must be positive");
        require(restarts >= 1, "ECFConfig: restarts must be at least 1");
        require(tol > 0.0, "ECFConfig: tol must be positive");
    }
};

/// Empirical chf on a fixed frequency grid with trapezoid weights; the objective doubles the
/// half-line integral since both chfs are conjugate-symmetric.
class EmpiricalChf {
public:
    EmpiricalChf(std::span<const double> data, const ECFConfig& cfg) {
        cfg.validate();
        require(data.size() >= 2, "EmpiricalChf: need at least two observations");
        const MomentSet m = sample_moments_or_spread(data);
        scale_ = m.variance.value > 0.0 ? std::sqrt(m.variance.value) : 1.0;
        const std::size_t k = cfg.points;
        const double dt = cfg.span / static_cast<double>(k - 1);
        freq_.resize(k);
        weight_.resize(k);
        ecf_.resize(k);
        for (std::size_t j = 0; j < k; ++j) {
            const double t = dt * static_cast<double>(j);
            freq_[j] = t / scale_;
            const double w = cfg.weight == EcfWeight::gaussian ? std::exp(-0.5 * t * t) : 1.0;
            weight_[j] = 2.0 * w * dt * ((j == 0 || j + 1 == k) ? 0.5 : 1.0);
            double c = 0.0, s = 0.0;
            for (double x : data) {
                c += std::cos(freq_[j] * x);
                s += std::sin(freq_[j] * x);
            }
            const auto n = static_cast<double>(data.size());
            ecf_[j] = cplx(c / n, s / n);
        }
    }

    double objective(const std::function<cplx(double)>& chf) const {
        double h = 0.0;
        for (std::size_t j = 0; j < freq_.size(); ++j) {
            if (weight_[j] == 0.0) continue;
            const cplx d = ecf_[j] - chf(freq_[j]);
            h += weight_[j] * std::norm(d);
        }
        return std::isfinite(h) ? h : inf;
    }

    double objective(const ModelParams& theta) const { return objective(model_chf_fn(theta)); }

    std::span<const double> frequencies() const { return freq_; }
    std::span<const cplx> values() const { return ecf_; }
    double scale() const { return scale_; }

private:
    static MomentSet sample_moments_or_spread(std::span<const double> data) {
        if (data.size() >= 4) return sample_moments(data);
        const double d = data[1] - data[0];
        return {Moment::finite(0.5 * (data[0] + data[1])), Moment::finite(0.5 * d * d), Moment::finite(0.0),
                Moment::finite(0.0)};
    }

    double scale_ = 1.0;
    std::vector<double> freq_, weight_;
    std::vector<cplx> ecf_;
};

inline double ecf_objective(const ModelParams& theta, std::span<const double> data, const ECFConfig& cfg) {
    return EmpiricalChf(data, cfg).objective(theta);
}

// ---------------------------------------------------------------- method of moments

namespace detail {
/// Root of f on [a, b] by bisection; returns the better endpoint when there is no sign change.
template <class F>
double bisect_or_edge(F&& f, double a, double b, int iters = 200) {
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0.0) == (fb > 0.0)) return std::abs(fa) < std::abs(fb) ? a : b;
    for (int it = 0; it < iters; ++it) {
        const double m = 0.5 * (a + b);
        const double fm = f(m);
        if (fm == 0.0) return m;
        if ((fm > 0.0) == (fa > 0.0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

/// Moment matching for a two-level log-price model with the scale of both clocks pinned:
/// tail_param sets the kurtosis, rho the skewness, sigma the variance and mu the mean.
template <class Build>
ModelParams match_logprice_moments(const MomentSet& target, Build&& build, double tail_lo, double tail_hi) {
    const double var = target.variance.value;
    auto sigma_for = [&](double tail, double rho) {
        const auto base = return_cumulants(model_logprice(build(tail, rho, 1e-9, 0.0))).kappa2;
        const auto one = return_cumulants(model_logprice(build(tail, rho, 1.0, 0.0))).kappa2;
        const double slope = one - base;
        const double s2 = (var - base) / slope;
        return s2 > 0.0 ? std::sqrt(s2) : 0.0;
    };
    auto rho_max = [&](double tail) {
        double hi = std::sqrt(var);
        for (int k = 0; k < 200 && sigma_for(tail, hi) > 0.0; ++k) hi *= 2.0;
        return bisect_or_edge([&](double r) { return sigma_for(tail, r) > 0.0 ? -1.0 : 1.0; }, 0.0, hi, 100);
    };
    auto cumulants = [&](double tail, double rho) {
        const double s = std::max(sigma_for(tail, rho), 1e-12 * std::sqrt(var));
        return return_cumulants(model_logprice(build(tail, rho, s, 0.0)));
    };
    double tail = 0.5 * (tail_lo + tail_hi), rho = 0.0;
    for (int round = 0; round < 30; ++round) {
        const double kurt = target.excess_kurtosis.value;
        tail = bisect_or_edge([&](double t) { return cumulants(t, rho).excess_kurtosis() - kurt; }, tail_lo, tail_hi, 100);
        const double rmax = 0.999 * rho_max(tail);
        const double skew = target.skewness.value;
        rho = bisect_or_edge([&](double r) { return cumulants(tail, r).skewness() - skew; }, -rmax, rmax, 100);
    }
    const double sigma = std::max(sigma_for(tail, rho), 1e-6 * std::sqrt(var));
    const double mean0 = return_cumulants(model_logprice(build(tail, rho, sigma, 0.0))).kappa1;
    return build(tail, rho, sigma, target.mean.value - mean0);
}
}  // namespace detail

/// Moment-based starting values. Scale parameters that the data cannot pin down are fixed at
/// unit values; the remaining parameters are matched to sample moments by one-dimensional solves.
inline ModelParams mom_init(Model model, std::span<const double> data) {
    const MomentSet s = sample_moments(data);
    const double mean = s.mean.value, var = s.variance.value;
    if (!(var > 0.0)) throw data_error("mom_init: data have zero spread");
    switch (model) {
        case Model::normal: return {Model::normal, {mean, std::sqrt(var)}};
        case Model::ig:
            if (!(mean > 0.0)) throw data_error("mom_init: ig requires a positive sample mean");
            return {Model::ig, {mean, mean * mean * mean / var}};
        case Model::cig: {
            if (!(mean > 0.0)) throw data_error("mom_init: cig requires a positive sample mean");
            // With mu_t = 1: mu_u = mean, p + q = var / mean where p = mu_u^2/lambda_u, q = 1/lambda_t,
            // and the skewness fixes p q.
            const double mu_u = mean, S = var / mean;
            const double skew = std::max(s.skewness.value, 1e-6);
            double P = S * S - skew * std::sqrt(mu_u) * std::pow(S, 1.5) / 3.0;
            P = std::clamp(P, 1e-12 * S * S, 0.25 * S * S);
            const double disc = std::sqrt(std::max(0.0, S * S - 4.0 * P));
            const double r1 = 0.5 * (S + disc), r2 = std::max(0.5 * (S - disc), 1e-12 * S);
            auto make = [&](double p, double q) {
                return ModelParams(Model::cig, {1.0, 1.0 / q, mu_u, mu_u * mu_u / p});
            };
            const ModelParams a = make(r1, r2), b = make(r2, r1);
            const double ka = model_moments(a).excess_kurtosis.value, kb = model_moments(b).excess_kurtosis.value;
            const double k = s.excess_kurtosis.value;
            return std::abs(ka - k) <= std::abs(kb - k) ? a : b;
        }
        case Model::ncig: {
            auto build = [](double log_lt, double rho, double sigma, double mu) {
                return ModelParams(Model::ncig, {1.0, std::exp(log_lt), 1.0, 100.0, mu, 0.0, rho, sigma});
            };
            return detail::match_logprice_moments(s, build, std::log(1e-6), std::log(1e6));
        }
        case Model::vgg: {
            auto build = [](double log_au, double rho, double sigma, double mu) {
                const double au = std::exp(log_au);
                return ModelParams(Model::vgg, {1.0, 1.0, au, au, mu, 0.0, rho, sigma});
            };
            return detail::match_logprice_moments(s, build, std::log(1e-4), std::log(1e6));
        }
    }
    throw domain_error("mom_init: unknown model");
}

// ---------------------------------------------------------------- optimisation

struct NelderMeadResult {
    std::vector<double> x;
    double f = inf;
    int evaluations = 0;
    bool converged = false;
};

/// Box-constrained Nelder-Mead: trial points are clamped into [lo, hi].
inline NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f, std::vector<double> x0,
                                    std::span<const double> step, std::span<const double> lo,
                                    std::span<const double> hi, int max_evals, double tol) {
    const std::size_t d = x0.size();
    require(step.size() == d && lo.size() == d && hi.size() == d, "nelder_mead: dimension mismatch");
    NelderMeadResult res;
    auto clamp = [&](std::vector<double>& x) {
        for (std::size_t i = 0; i < d; ++i) x[i] = std::clamp(x[i], lo[i], hi[i]);
    };
    auto eval = [&](std::vector<double>& x) {
        clamp(x);
        ++res.evaluations;
        const double y = f(x);
        return std::isnan(y) ? inf : y;
    };
    if (d == 0) {
        res.x = x0;
        res.f = eval(res.x);
        res.converged = true;
        return res;
    }
    const double dd = static_cast<double>(d);
    const double alpha = 1.0, beta = 1.0 + 2.0 / dd, gam = 0.75 - 1.0 / (2.0 * dd), delta = 1.0 - 1.0 / dd;
    std::vector<std::vector<double>> simplex(d + 1, x0);
    std::vector<double> fv(d + 1);
    clamp(simplex[0]);
    fv[0] = eval(simplex[0]);
    for (std::size_t i = 0; i < d; ++i) {
        simplex[i + 1][i] += step[i];
        if (simplex[i + 1][i] > hi[i]) simplex[i + 1][i] = x0[i] - step[i];
        fv[i + 1] = eval(simplex[i + 1]);
    }
    std::vector<std::size_t> order(d + 1);
    std::vector<double> centroid(d), xr(d), xe(d), xc(d);
    while (res.evaluations < max_evals) {
        for (std::size_t i = 0; i <= d; ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
        const std::size_t best = order[0], worst = order[d], second = order[d - 1];
        double size = 0.0;
        for (std::size_t i = 0; i <= d; ++i)
            for (std::size_t k = 0; k < d; ++k) size = std::max(size, std::abs(simplex[i][k] - simplex[best][k]));
        const double spread = fv[worst] - fv[best];
        if (std::isfinite(spread) && spread <= tol * (std::abs(fv[best]) + 1e-300) && size < 1e-6) {
            res.converged = true;
            break;
        }
        if (size < 1e-12) {
            res.converged = std::isfinite(fv[best]);
            break;
        }
        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i <= d; ++i)
            if (i != worst)
                for (std::size_t k = 0; k < d; ++k) centroid[k] += simplex[i][k] / dd;
        for (std::size_t k = 0; k < d; ++k) xr[k] = centroid[k] + alpha * (centroid[k] - simplex[worst][k]);
        const double fr = eval(xr);
        if (fr < fv[best]) {
            for (std::size_t k = 0; k < d; ++k) xe[k] = centroid[k] + beta * (xr[k] - centroid[k]);
            const double fe = eval(xe);
            if (fe < fr) {
                simplex[worst] = xe;
                fv[worst] = fe;
            } else {
                simplex[worst] = xr;
                fv[worst] = fr;
            }
            continue;
        }
        if (fr < fv[second]) {
            simplex[worst] = xr;
            fv[worst] = fr;
            continue;
        }
        const bool outside = fr < fv[worst];
        for (std::size_t k = 0; k < d; ++k)
            xc[k] = outside ? centroid[k] + gam * (xr[k] - centroid[k]) : centroid[k] - gam * (centroid[k] - simplex[worst][k]);
        const double fc = eval(xc);
        if (fc < std::min(fr, fv[worst])) {
            simplex[worst] = xc;
            fv[worst] = fc;
            continue;
        }
        for (std::size_t i = 0; i <= d; ++i) {
            if (i == best) continue;
            for (std::size_t k = 0; k < d; ++k) simplex[i][k] = simplex[best][k] + delta * (simplex[i][k] - simplex[best][k]);
            fv[i] = eval(simplex[i]);
        }
    }
    const auto it = std::min_element(fv.begin(), fv.end());
    res.x = simplex[static_cast<std::size_t>(it - fv.begin())];
    res.f = *it;
    return res;
}

enum class FitStatus { converged, budget_exhausted, failed };

inline const char* to_string(FitStatus s) {
    switch (s) {
        case FitStatus::converged: return "converged";
        case FitStatus::budget_exhausted: return "budget-exhausted";
        case FitStatus::failed: return "failed";
    }
    return "?";
}

struct FitResult {
    ModelParams params;
    double objective = inf;
    double loglik = nan;
    ModelParams init;
    std::string init_source = "method-of-moments";
    int best_start = 0;
    int evaluations = 0;
    FitStatus status = FitStatus::failed;
    std::string message{};
    std::vector<TestResult> diagnostics{};
};

// ---------------------------------------------------------------- likelihood

struct LoglikResult {
    double value = nan;
    std::size_t outside = 0;
};

inline constexpr double density_floor = 1e-300;

inline LoglikResult loglik_detail(const ModelParams& p, std::span<const double> data, FFTConfig cfg = {}) {
    require(!data.empty(), "loglik: empty data");
    LoglikResult r{0.0, 0};
    if (p.model == Model::normal) {
        for (double x : data) r.value += std::log(normal_pdf((x - p["mu"]) / p["sigma"]) / p["sigma"]);
        return r;
    }
    if (p.model == Model::ig) {
        const IGParams q(p["mu"], p["lambda"]);
        for (double x : data) {
            if (x > 0.0) {
                r.value += ig_log_pdf(q, x);
            } else {
                r.value += std::log(density_floor);
                ++r.outside;
            }
        }
    } else {
        const DensityGrid g = chf_to_pdf_fft(model_chf(p), covering_fft_config(p, data, cfg));
        const double margin = 6.0 * g.dx;
        for (double x : data) {
            const bool in = x >= g.x0 + margin && x <= g.x_max() - margin;
            if (!in) ++r.outside;
            r.value += std::log(std::max(in ? g.pdf(x) : 0.0, density_floor));
        }
    }
    if (static_cast<double>(r.outside) > 1e-3 * static_cast<double>(data.size()))
        throw numerical_error("loglik: more than 0.1% of the data fall outside the density grid");
    return r;
}

/// Sum of log densities, with the density from FFT inversion of the model chf.
inline double loglik_fft(const ModelParams& p, std::span<const double> data, FFTConfig cfg = {}) {
    return loglik_detail(p, data, cfg).value;
}

// ---------------------------------------------------------------- ECF fit

namespace detail {
struct Coordinates {
    std::vector<std::size_t> free;
    std::vector<double> lo, hi, step;
    std::vector<ParamKind> kind;
};

inline double to_internal(ParamKind k, double x) { return k == ParamKind::positive ? std::log(x) : x; }
inline double from_internal(ParamKind k, double y) { return k == ParamKind::positive ? std::exp(y) : y; }
}  // namespace detail

/// Multi-start ECF minimisation. Start 0 is the moment-based initial value; later starts
/// perturb it with per-start seeds derived from cfg.seed. Parameters named in `fixed` are held.
inline FitResult ecf_fit(Model model, std::span<const double> data, const ECFConfig& cfg,
                         const std::map<std::string, double>& fixed = {},
                         std::optional<ModelParams> start = std::nullopt) {
    cfg.validate();
    require(data.size() >= 8, "ecf_fit: need at least eight observations");
    ModelParams init = start ? *start : mom_init(model, data);
    for (const auto& [name, value] : fixed) {
        const auto i = ModelParams::index_of(model, name);
        if (!i) throw config_error("unknown fixed parameter '" + name + "' for model " + to_string(model));
        init.values[*i] = value;
    }
    init = ModelParams(model, init.values);
    const auto specs = param_specs(model);
    const double sd = std::sqrt(sample_moments(data).variance.value);

    detail::Coordinates c;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        if (fixed.count(specs[i].name)) continue;
        c.free.push_back(i);
        c.kind.push_back(specs[i].kind);
        switch (specs[i].kind) {
            case ParamKind::positive:
                c.lo.push_back(std::log(positive_min));
                c.hi.push_back(std::log(positive_max));
                c.step.push_back(0.3);
                break;
            case ParamKind::loading:
                c.lo.push_back(-loading_bound);
                c.hi.push_back(loading_bound);
                c.step.push_back(std::max(0.1 * std::abs(init.values[i]), 1e-3));
                break;
            case ParamKind::location:
                c.lo.push_back(-1e8);
                c.hi.push_back(1e8);
                c.step.push_back(0.1 * sd);
                break;
        }
    }
    const EmpiricalChf ecf(data, cfg);
    auto unpack = [&](std::span<const double> y) {
        std::vector<double> v = init.values;
        for (std::size_t k = 0; k < c.free.size(); ++k) v[c.free[k]] = detail::from_internal(c.kind[k], y[k]);
        return v;
    };
    auto objective = [&](std::span<const double> y) {
        try {
            return ecf.objective(ModelParams(model, unpack(y)));
        } catch (const error&) {
            return inf;
        }
    };
    std::vector<double> y0(c.free.size());
    for (std::size_t k = 0; k < c.free.size(); ++k) {
        y0[k] = std::clamp(detail::to_internal(c.kind[k], init.values[c.free[k]]), c.lo[k], c.hi[k]);
    }

    FitResult best{.params = init, .init = init};
    const int per_start = std::max(1, cfg.max_evals);
    for (int s = 0; s < cfg.restarts; ++s) {
        std::vector<double> y = y0;
        if (s > 0) {
            Rng rng(splitmix64(cfg.seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(s)));
            for (std::size_t k = 0; k < y.size(); ++k) {
                const double jitter = rng.normal();
                switch (c.kind[k]) {
                    case ParamKind::positive: y[k] += 0.5 * jitter; break;
                    case ParamKind::loading: y[k] += 0.5 * std::max(std::abs(y[k]), 0.05) * jitter; break;
                    case ParamKind::location: y[k] += 0.1 * sd * jitter; break;
                }
                y[k] = std::clamp(y[k], c.lo[k], c.hi[k]);
            }
        }
        NelderMeadResult r = nelder_mead(objective, y, c.step, c.lo, c.hi, per_start, cfg.tol);
        // One restart from the converged point guards against a collapsed simplex.
        NelderMeadResult again = nelder_mead(objective, r.x, c.step, c.lo, c.hi, per_start, cfg.tol);
        again.evaluations += r.evaluations;
        if (!(again.f <= r.f)) {
            again.x = r.x;
            again.f = r.f;
        }
        best.evaluations += again.evaluations;
        if (again.f < best.objective) {
            best.objective = again.f;
            best.params = ModelParams(model, unpack(again.x));
            best.best_start = s;
            best.status = again.converged ? FitStatus::converged : FitStatus::budget_exhausted;
        }
    }
    if (!std::isfinite(best.objective)) {
        best.status = FitStatus::failed;
        best.message = "all starts failed";
        return best;
    }
    try {
        best.loglik = loglik_fft(best.params, data);
    } catch (const error& e) {
        best.loglik = nan;
        best.status = FitStatus::failed;
        best.message = std::string("likelihood: ") + e.what();
    }
    return best;
}

}  // namespace msub
