#include <algorithm>
#include <cmath>
#include <vector>

#include "catch_amalgamated.hpp"
#include "msub/msub.hpp"
#include "oracles.hpp"

using namespace msub;
using Catch::Approx;

namespace {

constexpr std::size_t big = 1000000;

/// Mean of f(x_i) with its standard error.
template <class F>
std::pair<double, double> mc_mean(const std::vector<double>& x, F f) {
    double s = 0.0, q = 0.0;
    for (double v : x) {
        const double y = f(v);
        s += y;
        q += y * y;
    }
    const auto n = static_cast<double>(x.size());
    const double m = s / n;
    return {m, std::sqrt((q / n - m * m) / n)};
}

}  // namespace

TEST_CASE("stable Laplace transform") {
    CHECK(stable_laplace({0.5, 1.0}, 1.0) == Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK(stable_laplace({0.7, 3.0}, 1e-12) == Approx(1.0).epsilon(1e-6));
    CHECK(stable_laplace({0.25, 2.0}, 3.0) == Approx(std::exp(-std::pow(6.0, 0.25))).epsilon(1e-14));
    CHECK(std::abs(stable_laplace({0.25, 2.0}, 3.0) - 0.209) < 1e-3);
    CHECK_THROWS_AS(stable_laplace({0.5, 1.0}, 0.0), domain_error);
    CHECK_THROWS_AS(StableSubParams(1.2, 1.0), domain_error);
    CHECK_THROWS_AS(StableSubParams(0.5, -1.0), domain_error);
}

TEST_CASE("stable Laplace transform is decreasing and log-convex") {
    for (const StableSubParams p : {StableSubParams{0.3, 1.0}, StableSubParams{0.5, 2.0}, StableSubParams{0.9, 0.4}}) {
        double prev = 1.0;
        std::vector<double> logs;
        for (int k = 1; k <= 200; ++k) {
            const double l = stable_laplace(p, 0.05 * k);
            CHECK(l < prev);
            prev = l;
            logs.push_back(std::log(l));
        }
        for (std::size_t k = 1; k + 1 < logs.size(); ++k) CHECK(logs[k - 1] + logs[k + 1] - 2.0 * logs[k] >= 0.0);
    }
}

TEST_CASE("stable sampler matches the Laplace transform") {
    const StableSubParams p(0.6, 1.5);
    const auto x = sample_stable_sub(p, big, 21);
    for (double s : {0.5, 1.0, 2.0}) {
        const auto [m, se] = mc_mean(x, [s](double v) { return std::exp(-s * v); });
        CHECK(std::abs(m - stable_laplace(p, s)) < 3.0 * se);
    }
    CHECK(sample_stable_sub(p, 100, 5) == sample_stable_sub(p, 100, 5));
}

TEST_CASE("1/2-stable sampler agrees with the Levy-stable law (delta = 2b)") {
    const LevyStableParams levy(0.8);
    const auto x = sample_stable_sub(levy.as_stable(), 100000, 3);
    std::vector<double> u;
    for (double v : x) u.push_back(levy_stable_cdf(levy, v));
    CHECK(ks_uniform_test(u).p_value > 0.01);
    CHECK(levy.as_stable().delta == 1.6);
}

TEST_CASE("fractional moments: closed form and Monte Carlo") {
    // E T^q = delta^q Gamma(1 - q/alpha) / Gamma(1 - q) for Laplace transform exp(-(delta s)^alpha).
    auto exact = [](const StableSubParams& p, double q) {
        return std::pow(p.delta, q) * std::tgamma(1.0 - q / p.alpha_half) / std::tgamma(1.0 - q);
    };
    const StableSubParams levy(0.5, 1.0);
    CHECK(stable_fractional_moment(levy, 0.25) == Approx(exact(levy, 0.25)).epsilon(1e-8));
    CHECK(stable_fractional_moment(levy, 1e-6) == Approx(1.0).epsilon(1e-5));
    CHECK(stable_fractional_moment({0.5, 2.0}, 0.25) == Approx(std::pow(2.0, 0.25) * exact(levy, 0.25)).epsilon(1e-8));
    for (const auto& [p, q] : {std::pair{StableSubParams{0.7, 1.0}, 0.3}, std::pair{StableSubParams{0.8, 2.0}, 0.2}}) {
        const double m = stable_fractional_moment(p, q);
        CHECK(m == Approx(exact(p, q)).epsilon(1e-8));
        const auto x = sample_stable_sub(p, big, 99);
        const auto [mc, se] = mc_mean(x, [q](double v) { return std::pow(v, q); });
        CHECK(std::abs(mc - m) < 3.0 * se);
    }
    CHECK_THROWS_AS(stable_fractional_moment(levy, 0.5), domain_error);
}

TEST_CASE("Levy-stable density") {
    CHECK(levy_stable_pdf(LevyStableParams(1.0), 1.0) == Approx(std::exp(-0.5) / std::sqrt(2 * pi)).epsilon(1e-14));
    CHECK(std::abs(levy_stable_pdf(LevyStableParams(1.0), 1.0) - 0.241971) < 1e-6);
    CHECK(std::abs(levy_stable_pdf(LevyStableParams(2.0), 0.5) - 0.2160) < 1e-3);
    QuadOptions opt;
    opt.abs_tol = 1e-12;
    const QuadResult r = adaptive_quad([](double x) { return levy_stable_pdf(LevyStableParams(1.0), x); }, 0.0, inf, opt);
    CHECK(std::abs(r.value - 1.0) < 1e-8);
}

TEST_CASE("Levy-stable sampler") {
    const LevyStableParams p(1.0);
    auto x = sample_levy_stable(p, big, 17);
    CHECK(x == sample_levy_stable(p, big, 17));
    // Median of b / Z^2 is b / q where q = 0.454936... is the chi-square(1) median.
    std::vector<double> s = x;
    std::nth_element(s.begin(), s.begin() + static_cast<long>(s.size() / 2), s.end());
    const double med = s[s.size() / 2];
    const double q = std::pow(normal_quantile(0.75), 2.0);
    // Binomial error of the median rank mapped through the density at the median.
    const double se = 0.5 / (std::sqrt(static_cast<double>(big)) * levy_stable_pdf(p, 1.0 / q));
    CHECK(std::abs(med - 1.0 / q) < 3.0 * se);
    const double w = 0.1;
    std::vector<double> counts(100, 0.0);
    for (double v : x)
        if (v >= 0.1 && v < 10.1) counts[static_cast<std::size_t>((v - 0.1) / w)] += 1.0;
    double worst = 0.0;
    for (std::size_t k = 0; k + 1 < counts.size(); ++k) {
        const double a = 0.1 + w * static_cast<double>(k), b = a + w;
        const double expected = (levy_stable_cdf(p, b) - levy_stable_cdf(p, a)) / w;
        worst = std::max(worst, std::abs(counts[k] / (static_cast<double>(big) * w) - expected));
    }
    CHECK(worst < 0.01);
}

TEST_CASE("gamma law") {
    CHECK(gamma_pdf({1.0, 1.0}, 1e-300) == Approx(1.0));
    CHECK(gamma_pdf({2.0, 1.0}, 1.0) == Approx(std::exp(-1.0)).epsilon(1e-14));
    QuadOptions opt;
    opt.abs_tol = 1e-12;
    opt.singular = Singular::left;
    CHECK(std::abs(adaptive_quad([](double x) { return gamma_pdf({3.5, 2.0}, x); }, 0.0, inf, opt).value - 1.0) < 1e-8);
    CHECK(std::abs(adaptive_quad([](double x) { return gamma_pdf({0.4, 2.0}, x); }, 0.0, inf, opt).value - 1.0) < 1e-6);
    CHECK(gamma_mgf({1.0, 2.0}, 1.0) == Approx(2.0).epsilon(1e-14));
    CHECK(gamma_mgf({2.0, 3.0}, 0.0) == 1.0);
    CHECK(gamma_mgf({2.0, 3.0}, 1.0) == Approx(2.25).epsilon(1e-14));
    const double h = 1e-6;
    const double d = (gamma_mgf({2.0, 3.0}, h) - gamma_mgf({2.0, 3.0}, -h)) / (2 * h);
    CHECK(d == Approx(2.0 / 3.0).epsilon(1e-6));
    CHECK_THROWS_AS(gamma_mgf({2.0, 3.0}, 3.0), domain_error);
    const auto x = sample_gamma({2.0, 1.0}, big, 8);
    const auto s = oracle::summarize(x);
    CHECK(std::abs(s.mean - 2.0) < 3.0 * s.se_mean);
    CHECK(std::abs(s.var - 2.0) < 3.0 * s.se_var);
    CHECK(std::abs(s.skew - 2.0 / std::sqrt(2.0)) < 3.0 * s.se_skew);
    CHECK(std::abs(s.kurt - 3.0) < 3.0 * s.se_kurt);
}

TEST_CASE("inverse Gaussian law") {
    CHECK(ig_pdf({1.0, 1.0}, 1.0) == Approx(1.0 / std::sqrt(2 * pi)).epsilon(1e-14));
    CHECK(std::abs(ig_pdf({2.0, 3.0}, 1.0) - std::sqrt(3.0 / (2 * pi)) * std::exp(-3.0 / 8.0)) < 1e-14);
    CHECK(std::abs(ig_pdf({2.0, 3.0}, 1.0) - 0.47491) < 1e-5);
    QuadOptions opt;
    opt.abs_tol = 1e-12;
    CHECK(std::abs(adaptive_quad([](double x) { return ig_pdf({1.0, 1.0}, x); }, 0.0, inf, opt).value - 1.0) < 1e-8);
    CHECK(std::abs(adaptive_quad([](double x) { return ig_pdf({5.0, 0.3}, x); }, 0.0, inf, opt).value - 1.0) < 1e-6);
    for (double x : {0.2, 1.0, 3.5}) {
        const double f = oracle::simpson([](double t) { return t <= 0 ? 0.0 : ig_pdf({1.5, 2.0}, t); }, 1e-12, x, 40000);
        CHECK(ig_cdf({1.5, 2.0}, x) == Approx(f).epsilon(1e-8));
    }
    CHECK(ig_chf({1.0, 1.0}, 0.0) == cplx(1.0, 0.0));
    CHECK(ig_mgf({1.0, 4.0}, 1.0) == Approx(std::exp(4.0 * (1.0 - std::sqrt(0.5)))).epsilon(1e-14));
}

TEST_CASE("inverse Gaussian sampler") {
    for (const IGParams p : {IGParams{1.0, 1.0}, IGParams{8096.84, 90189.7}, IGParams{2.0, 0.5}}) {
        const auto x = sample_ig(p, big, 31);
        const auto s = oracle::summarize(x);
        const MomentSet m = ig_moments(p);
        INFO("mu = " << p.mu << ", lambda = " << p.lambda);
        CHECK(std::abs(s.mean - m.mean.value) < 3.0 * s.se_mean);
        CHECK(std::abs(s.var - m.variance.value) < 3.0 * s.se_var);
        CHECK(std::abs(s.skew - m.skewness.value) < 3.0 * s.se_skew);
        CHECK(std::abs(s.kurt - m.excess_kurtosis.value) < 3.0 * s.se_kurt);
    }
    const IGParams p(1.5, 2.0);
    const auto x = sample_ig(p, 100000, 4);
    std::vector<double> u;
    for (double v : x) u.push_back(ig_cdf(p, v));
    CHECK(ks_uniform_test(u).p_value > 0.01);
    CHECK(sample_ig(p, 50, 9) == sample_ig(p, 50, 9));
    CHECK(std::abs(ig_moments({8096.84, 90189.7}).skewness.value - 0.8989) < 1e-3);
}

TEST_CASE("base-law dispatch and time scaling") {
    CHECK(laplace_exponent(BaseLaw(GammaParams(2.0, 3.0)), 1.0) == Approx(2.0 * std::log(4.0 / 3.0)).epsilon(1e-14));
    CHECK(laplace_exponent(BaseLaw(LevyStableParams(0.5)), 9.0) == Approx(3.0).epsilon(1e-14));
    CHECK(laplace_exponent(BaseLaw(StableSubParams(0.5, 1.0)), 9.0) == Approx(3.0).epsilon(1e-14));
    CHECK(laplace_exponent(BaseLaw(IGParams(1.0, 1.0)), 0.0) == 0.0);
    // Draws at time t have Laplace transform exp(-t Phi(s)).
    for (const BaseLaw& law : {BaseLaw(GammaParams(1.5, 2.0)), BaseLaw(IGParams(0.7, 1.3)), BaseLaw(StableSubParams(0.6, 1.0)),
                               BaseLaw(LevyStableParams(0.4))}) {
        Rng rng(77);
        std::vector<double> x(200000);
        for (double& v : x) v = draw_at_time(law, 2.5, rng);
        const auto [m, se] = mc_mean(x, [](double v) { return std::exp(-0.8 * v); });
        INFO(law_name(law));
        CHECK(std::abs(m - std::exp(-2.5 * laplace_exponent(law, 0.8))) < 3.0 * se);
    }
    CHECK(unit_cumulants(BaseLaw(StableSubParams(0.5, 1.0))).empty());
}
