#include <cmath>
#include <map>
#include <vector>

#include "catch_amalgamated.hpp"
#include "msub/msub.hpp"

using namespace msub;
using Catch::Approx;

namespace {

ModelParams reference_ncig() { return {Model::ncig, {0.122, 12.54, 0.0035, 17.66, 0.0, 0.0, -0.281, 0.252}}; }

ModelParams moderate_ncig() { return {Model::ncig, {1.0, 2.0, 1.0, 3.0, 0.1, 0.2, -0.3, 0.5}}; }

double normal_loglik(std::span<const double> x, double m, double s) {
    double l = 0.0;
    for (double v : x) l += -0.5 * std::log(2.0 * pi * s * s) - (v - m) * (v - m) / (2.0 * s * s);
    return l;
}

}  // namespace

TEST_CASE("inverse Gaussian maximum likelihood") {
    const IGParams truth(2.0, 5.0);
    const auto x = sample_ig(truth, 100000, 17);
    const IGParams fit = ig_mle(x);
    CHECK(fit.mu == Approx(2.0).epsilon(0.02));
    CHECK(fit.lambda == Approx(5.0).epsilon(0.02));
    std::vector<double> scaled(x);
    for (double& v : scaled) v *= 3.7;
    const IGParams s = ig_mle(scaled);
    CHECK(s.mu == Approx(3.7 * fit.mu).epsilon(1e-12));
    CHECK(s.lambda == Approx(3.7 * fit.lambda).epsilon(1e-9));
    const std::vector<double> constant(50, 2.5);
    CHECK_THROWS_AS(ig_mle(constant), data_error);
    CHECK_THROWS_AS(ig_mle(std::vector<double>{1.0, -1.0, 2.0}), data_error);
    CHECK_THROWS_AS(ig_mle(std::vector<double>{1.0}), domain_error);
    const auto t1 = sample_ig(IGParams(8096.84, 90189.7), 100000, 18);
    const IGParams big = ig_mle(t1);
    CHECK(big.mu == Approx(8096.84).epsilon(0.02));
    CHECK(big.lambda == Approx(90189.7).epsilon(0.02));
}

TEST_CASE("ECF objective") {
    const ModelParams theta = moderate_ncig();
    const auto x = model_sample(theta, 100000, 5);
    const ECFConfig cfg;
    const double at_truth = ecf_objective(theta, x, cfg);
    CHECK(at_truth >= 0.0);
    CHECK(at_truth < 1e-3);
    const auto x_small = model_sample(theta, 10000, 5);
    CHECK(ecf_objective(theta, x_small, cfg) > at_truth);

    ECFConfig empty = cfg;
    empty.span = 0.0;
    CHECK(ecf_objective(theta, x, empty) == 0.0);
    CHECK(ecf_objective(reference_ncig(), x, empty) == 0.0);

    const EmpiricalChf ecf(x, cfg);
    const auto f = ecf.frequencies();
    const auto v = ecf.values();
    auto lookup = [&](double r) {
        for (std::size_t k = 0; k < f.size(); ++k)
            if (f[k] == r) return v[k];
        return cplx(msub::nan, msub::nan);
    };
    CHECK(ecf.objective(lookup) == 0.0);
    CHECK(ecf.objective(model_chf_fn(reference_ncig())) > 0.0);
}

TEST_CASE("ECF objective increases away from the truth") {
    // The clock shape parameters lambda_t and lambda_u are left out: a 10% move along either
    // stays within sampling noise of the objective in several seeds even at n = 1e5.
    const ModelParams theta = moderate_ncig();
    const ECFConfig cfg;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto x = model_sample(theta, 100000, 100 + seed);
        const EmpiricalChf ecf(x, cfg);
        const double base = ecf.objective(theta);
        for (const char* name : {"mu_t", "mu_u", "mu", "gamma", "rho", "sigma"}) {
            std::vector<double> v = theta.values;
            v[*ModelParams::index_of(Model::ncig, name)] *= 1.1;
            INFO("seed " << seed << " coordinate " << name);
            CHECK(ecf.objective(ModelParams(Model::ncig, v)) > base);
        }
    }
}

TEST_CASE("method-of-moments starting values") {
    const auto ig = sample_ig(IGParams(2.0, 5.0), 100000, 21);
    const ModelParams i0 = mom_init(Model::ig, ig);
    CHECK(i0["mu"] == Approx(2.0).epsilon(0.2));
    CHECK(i0["lambda"] == Approx(5.0).epsilon(0.2));

    const auto x = model_sample(reference_ncig(), 100000, 22);
    const ECFConfig cfg;
    const EmpiricalChf ecf(x, cfg);
    const ModelParams n0 = mom_init(Model::ncig, x);
    CHECK(ecf.objective(n0) <= 10.0 * ecf.objective(reference_ncig()));

    std::vector<double> sym;
    for (double v : model_sample(ModelParams(Model::ncig, {1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.5, 1.0}), 5000, 23)) {
        sym.push_back(v);
        sym.push_back(-v);
    }
    CHECK(std::abs(mom_init(Model::ncig, sym)["rho"]) < 1e-9);
    CHECK(std::abs(mom_init(Model::vgg, sym)["rho"]) < 1e-9);
    CHECK(mom_init(Model::ncig, sym)["gamma"] == 0.0);

    const ModelParams c0 = mom_init(Model::cig, model_sample(ModelParams(Model::cig, {2.05, 20.1, 172.7, 323.6}), 100000, 24));
    const MomentSet target = sample_moments(model_sample(ModelParams(Model::cig, {2.05, 20.1, 172.7, 323.6}), 100000, 24));
    CHECK(model_moments(c0).mean.value == Approx(target.mean.value).epsilon(1e-9));
    CHECK(model_moments(c0).variance.value == Approx(target.variance.value).epsilon(1e-6));
    CHECK_THROWS_AS(mom_init(Model::ig, std::vector<double>(10, 1.0)), data_error);
}

TEST_CASE("ECF fit descends from its start and is deterministic") {
    const ModelParams start = moderate_ncig();
    const auto x = model_sample(start, 20000, 31);
    ECFConfig cfg;
    cfg.restarts = 3;
    const FitResult fit = ecf_fit(Model::ncig, x, cfg, {}, start);
    CHECK(fit.status == FitStatus::converged);
    CHECK(fit.objective <= ecf_objective(start, x, cfg));
    CHECK(std::isfinite(fit.loglik));
    const FitResult again = ecf_fit(Model::ncig, x, cfg, {}, start);
    CHECK(again.params.values == fit.params.values);
    CHECK(again.objective == fit.objective);
    cfg.seed = 2;
    const FitResult other = ecf_fit(Model::ncig, x, cfg, {}, start);
    CHECK(other.objective <= ecf_objective(start, x, cfg));
}

TEST_CASE("ECF fit honours fixed parameters") {
    const auto x = model_sample(reference_ncig(), 20000, 32);
    ECFConfig cfg;
    cfg.restarts = 2;
    const FitResult fit = ecf_fit(Model::ncig, x, cfg, {{"mu", 0.0}, {"gamma", 0.0}});
    CHECK(fit.params["mu"] == 0.0);
    CHECK(fit.params["gamma"] == 0.0);
    CHECK(fit.status != FitStatus::failed);
    CHECK_THROWS_AS(ecf_fit(Model::ncig, x, cfg, {{"delta", 0.0}}), config_error);
}

TEST_CASE("normal FFT likelihood matches the closed form") {
    Rng rng(41);
    std::vector<double> x(10000);
    for (double& v : x) v = 0.3 + 1.7 * rng.normal();
    const double exact = normal_loglik(x, 0.3, 1.7);
    const ModelParams p(Model::normal, {0.3, 1.7});
    CHECK(loglik_fft(p, x) == Approx(exact).epsilon(1e-12));
    FFTConfig cfg;
    cfg.x_center = 0.3;
    cfg.x_span = 20.0 * 1.7;
    const DensityGrid g = chf_to_pdf_fft(make_chf([](double v) { return std::exp(cplx(-0.5 * 1.7 * 1.7 * v * v, 0.3 * v)); }), cfg);
    double l = 0.0;
    for (double v : x) l += std::log(g.pdf(v));
    CHECK(l == Approx(exact).epsilon(1e-3));
}

TEST_CASE("FFT likelihood is grid independent and ranks models") {
    const ModelParams truth = reference_ncig();
    const auto x = model_sample(truth, 100000, 43);
    const double base = loglik_fft(truth, x);
    FFTConfig wide;
    const auto c = covering_fft_config(truth, x);
    wide.x_center = c.x_center;
    wide.x_span = 2.0 * c.x_span;
    wide.grid_size = 2 * c.grid_size;
    CHECK(loglik_fft(truth, x, wide) == Approx(base).epsilon(1e-4));
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto y = model_sample(truth, 100000, 50 + seed);
        CHECK(loglik_fft(truth, y) > loglik_fft(normal_mle(y), y));
    }
    const ModelParams cig(Model::cig, {1.0, 1.0, 1.0, 1.0});
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto y = model_sample(cig, 100000, 60 + seed);
        const IGParams q = ig_mle(y);
        CHECK(loglik_fft(cig, y) > loglik_fft(ModelParams(Model::ig, {q.mu, q.lambda}), y));
    }
}

TEST_CASE("compound IG at the reference fit is close to a single IG") {
    // The IG with the same mean and variance nearly reproduces the higher moments, which is why
    // the likelihood cannot separate the two laws there and a refitted IG can come out ahead.
    const IGParams t(2.05, 20.1), u(172.7, 323.6);
    const MomentSet c = double_ig_moments(t, u);
    const double m = c.mean.value, lambda = m * m * m / c.variance.value;
    const MomentSet single = ig_moments(IGParams(m, lambda));
    CHECK(single.skewness.value == Approx(c.skewness.value).epsilon(5e-3));
    CHECK(single.excess_kurtosis.value == Approx(c.excess_kurtosis.value).epsilon(1e-2));
}

TEST_CASE("FFT likelihood coverage") {
    const ModelParams truth = reference_ncig();
    auto x = model_sample(truth, 2000, 44);
    FFTConfig narrow;
    narrow.x_center = 0.0;
    narrow.x_span = 0.02;
    CHECK_THROWS_AS(loglik_fft(truth, x, narrow), numerical_error);
    const LoglikResult ok = loglik_detail(truth, x);
    CHECK(ok.outside == 0);
}

TEST_CASE("model parameter plumbing") {
    CHECK(model_from_string("ncig") == Model::ncig);
    CHECK_THROWS_AS(model_from_string("nig"), config_error);
    const ModelParams p = ModelParams::from_named(Model::cig, {{"mu_t", 2.05}, {"lambda_t", 20.1}, {"mu_u", 172.7}, {"lambda_u", 323.6}});
    CHECK(p["lambda_u"] == 323.6);
    CHECK(p.named().at("mu_t") == 2.05);
    CHECK_THROWS_AS(ModelParams::from_named(Model::cig, {{"mu_t", 2.05}}), config_error);
    CHECK_THROWS_AS(ModelParams(Model::ig, {1.0, -1.0}), domain_error);
    const MomentSet m = model_moments(p);
    CHECK(m.mean.value == Approx(2.05 * 172.7).epsilon(1e-14));
    const auto cdf = model_cdf(ModelParams(Model::ig, {2.0, 3.0}), std::vector<double>{});
    CHECK(cdf.cdf(2.0) == Approx(ig_cdf(IGParams(2.0, 3.0), 2.0)).epsilon(1e-14));
}
