#include <algorithm>
#include <cmath>
#include <vector>

#include "catch_amalgamated.hpp"
#include "msub/msub.hpp"

using namespace msub;
using Catch::Approx;

namespace {

std::vector<double> ladder(int n) {
    std::vector<double> u(static_cast<std::size_t>(n));
    for (int k = 1; k <= n; ++k) u[static_cast<std::size_t>(k - 1)] = static_cast<double>(k) / (n + 1);
    return u;
}

std::vector<double> uniforms(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> u(n);
    for (double& v : u) v = rng.uniform();
    return u;
}

std::vector<double> normals(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> z(n);
    for (double& v : z) v = rng.normal();
    return z;
}

// Brute-force sup-deviation against the empirical cdf evaluated on both sides of each point.
std::pair<double, double> brute_deviations(std::vector<double> u) {
    std::sort(u.begin(), u.end());
    const auto n = static_cast<double>(u.size());
    double dp = 0.0, dm = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const auto below = static_cast<double>(std::lower_bound(u.begin(), u.end(), u[i]) - u.begin());
        const auto upto = static_cast<double>(std::upper_bound(u.begin(), u.end(), u[i]) - u.begin());
        dp = std::max(dp, upto / n - u[i]);
        dm = std::max(dm, u[i] - below / n);
    }
    return {dp, dm};
}

double kolmogorov_series(double lambda) {
    double s = 0.0;
    for (int k = 1; k < 2000; ++k) s += 2.0 * std::pow(-1.0, k - 1) * std::exp(-2.0 * k * k * lambda * lambda);
    return s;
}

double quantile_by_bisection(double p) {
    if (p > 0.5) return -quantile_by_bisection(1.0 - p);
    double lo = -40.0, hi = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (0.5 * std::erfc(-mid / std::sqrt(2.0)) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double sample_kurtosis(const std::vector<double>& z) {
    double m2 = 0.0, m4 = 0.0;
    for (double v : z) {
        m2 += v * v;
        m4 += v * v * v * v;
    }
    const auto n = static_cast<double>(z.size());
    return (m4 / n) / ((m2 / n) * (m2 / n));
}

}  // namespace

TEST_CASE("probability integral transform") {
    const IGParams p(2.0, 5.0);
    auto cdf = [&](double x) { return ig_cdf(p, x); };
    const double median = cdf_quantile(CdfHandle{cdf, 1e-9, 100.0}, 0.5);
    CHECK(pit(cdf, std::vector<double>{median})[0] == Approx(0.5).epsilon(1e-9));
    const auto u = pit(cdf, std::vector<double>{1e-300, 1e6});
    CHECK(u[0] == pit_clamp);
    CHECK(u[1] == 1.0 - pit_clamp);
    CHECK_THROWS_AS(pit([](double) { return 0.3; }, std::vector<double>{1.0, 2.0}), numerical_error);
    CHECK_THROWS_AS(pit([](double) { return msub::nan; }, std::vector<double>{1.0}), numerical_error);
    CHECK_THROWS_AS(pit(cdf, std::vector<double>{}), domain_error);
}

TEST_CASE("Kolmogorov and Kuiper tail series") {
    for (double l : {0.5, 0.8, 1.0, 1.3581, 2.0}) CHECK(kolmogorov_q(l) == Approx(kolmogorov_series(l)).margin(1e-12));
    CHECK(kolmogorov_q(1.3581) == Approx(0.05).margin(1e-4));
    CHECK(kolmogorov_q(1.6276) == Approx(0.01).margin(1e-4));
    CHECK(kuiper_q(1.747, 1e12) == Approx(0.05).margin(1e-3));
    CHECK(kuiper_q(2.001, 1e12) == Approx(0.01).margin(1e-3));
    for (double l = 0.0; l < 4.0; l += 0.01) {
        CHECK(kolmogorov_q(l) >= 0.0);
        CHECK(kolmogorov_q(l) <= 1.0);
        CHECK(kuiper_q(l, 100.0) >= 0.0);
        CHECK(kuiper_q(l, 100.0) <= 1.0);
    }
}

TEST_CASE("uniformity tests on fixed inputs") {
    const auto u = ladder(100);
    const TestResult ks = ks_uniform_test(u);
    const TestResult kp = kuiper_test(u);
    CHECK(ks.statistic == Approx(1.0 / 101.0).epsilon(1e-12));
    CHECK(ks.p_value > 0.99);
    CHECK(kp.p_value > 0.99);
    CHECK(ks.n == 100);

    const std::vector<double> half(100, 0.5);
    CHECK(ks_uniform_test(half).statistic == Approx(0.5).epsilon(1e-15));
    CHECK(ks_uniform_test(half).p_value < 1e-12);
    CHECK(kuiper_test(half).p_value < 1e-12);

    CHECK_THROWS_AS(ks_uniform_test(std::vector<double>{0.1, 0.2, 0.3, 0.4}), domain_error);
    CHECK_THROWS_AS(kuiper_test(std::vector<double>{0.1, 0.2, 0.3, 0.4, 1.5}), domain_error);
}

TEST_CASE("uniformity statistics match a brute-force evaluation") {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        auto u = uniforms(5 + 17 * seed, seed);
        if (seed % 3 == 0)
            for (double& v : u) v = std::round(v * 20.0) / 20.0;
        const auto [dp, dm] = brute_deviations(u);
        const double d = ks_uniform_test(u).statistic, v = kuiper_test(u).statistic;
        CHECK(d == Approx(std::max(dp, dm)).margin(1e-15));
        CHECK(v == Approx(dp + dm).margin(1e-15));
        CHECK(d <= v);
        CHECK(v <= 2.0 * d);
    }
}

TEST_CASE("Kuiper statistic is invariant under rotation") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto u = uniforms(1000, seed);
        std::vector<double> r(u);
        for (double& v : r) v = std::fmod(v + 0.37, 1.0);
        CHECK(kuiper_test(r).statistic == Approx(kuiper_test(u).statistic).margin(1e-12));
    }
}

TEST_CASE("KS p-values are calibrated on uniform draws") {
    std::vector<double> p;
    int rejected = 0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        const auto u = uniforms(10000, 1000 + seed);
        p.push_back(ks_uniform_test(u).p_value);
        if (kuiper_test(u).p_value < 0.05) ++rejected;
    }
    std::nth_element(p.begin(), p.begin() + 25, p.end());
    CHECK(p[25] >= 0.25);
    CHECK(p[25] <= 0.75);
    CHECK(rejected <= 6);
}

TEST_CASE("PIT of the true model is uniform") {
    const IGParams truth(2.0, 5.0);
    int ks_reject = 0, kuiper_reject = 0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        const auto x = sample_ig(truth, 10000, 2000 + seed);
        const auto u = pit([&](double v) { return ig_cdf(truth, v); }, x);
        if (ks_uniform_test(u).p_value < 0.05) ++ks_reject;
        if (kuiper_test(u).p_value < 0.05) ++kuiper_reject;
    }
    const double ks_rate = ks_reject / 50.0, kuiper_rate = kuiper_reject / 50.0;
    CHECK(ks_rate >= 0.01);
    CHECK(ks_rate <= 0.12);
    CHECK(kuiper_rate <= 0.12);
}

TEST_CASE("inverse-normal transform") {
    CHECK(inverse_normal_transform(std::vector<double>{0.5})[0] == Approx(0.0).margin(1e-15));
    CHECK(inverse_normal_transform(std::vector<double>{0.975})[0] == Approx(1.959964).margin(1e-6));
    double worst = 0.0, worst_q = 0.0;
    for (int k = -12; k <= 12; ++k) {
        for (double m : {1.0, 2.5, 5.0, 7.5}) {
            const double u = k < 0 ? m * std::pow(10.0, k) : 1.0 - m * std::pow(10.0, -k - 1);
            if (u < pit_clamp || u > 1.0 - pit_clamp) continue;
            const double z = inverse_normal_transform(std::vector<double>{u})[0];
            worst_q = std::max(worst_q, std::abs(z - quantile_by_bisection(u)));
            if (u > 1e-3 && u < 1.0 - 1e-3) worst = std::max(worst, std::abs(normal_cdf(z) - u));
        }
    }
    for (double u : uniforms(10000, 3)) worst = std::max(worst, std::abs(normal_cdf(inverse_normal_transform(std::vector<double>{u})[0]) - u));
    CHECK(worst < 1e-9);
    CHECK(worst_q < 1e-9);
    std::size_t clamped = 0;
    const auto z = inverse_normal_transform(std::vector<double>{0.0, 0.5, 1.0}, &clamped);
    CHECK(clamped == 2);
    CHECK(std::isfinite(z[0]));
    CHECK(std::isfinite(z[2]));
    CHECK(z[0] == Approx(-z[2]).epsilon(1e-5));
    CHECK_THROWS_AS(inverse_normal_transform(std::vector<double>{-0.1}), domain_error);
}

TEST_CASE("adjusted Jarque-Bera") {
    const std::size_t n = 500;
    std::vector<double> half(n / 2);
    for (std::size_t k = 0; k < half.size(); ++k) half[k] = normal_quantile((k + 0.5) / static_cast<double>(n));
    const double target = 3.0 * (n - 1.0) / (n + 1.0);
    auto build = [&](double t) {
        std::vector<double> z;
        for (double v : half) {
            z.push_back(v);
            z.push_back(-v);
        }
        z[0] = -t;
        z[1] = t;
        return z;
    };
    double lo = std::abs(half[1]), hi = 20.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (sample_kurtosis(build(mid)) < target ? lo : hi) = mid;
    }
    const TestResult sym = adjusted_jarque_bera(build(0.5 * (lo + hi)));
    CHECK(sym.statistic < 1e-8);
    CHECK(sym.p_value > 0.999);

    Rng rng(71);
    std::vector<double> t3(10000);
    for (double& v : t3) {
        const double a = rng.normal(), b = rng.normal(), c = rng.normal();
        v = rng.normal() / std::sqrt((a * a + b * b + c * c) / 3.0);
    }
    CHECK(adjusted_jarque_bera(t3).p_value < 0.01);

    int pass = 0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed)
        if (adjusted_jarque_bera(normals(10000, 500 + seed)).p_value > 0.05) ++pass;
    CHECK(pass >= 45);

    int pass_u = 0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed)
        if (adjusted_jarque_bera(inverse_normal_transform(uniforms(10000, 800 + seed))).p_value > 0.05) ++pass_u;
    CHECK(pass_u >= 45);

    CHECK_THROWS_AS(adjusted_jarque_bera(std::vector<double>(7, 1.0)), domain_error);
    CHECK_THROWS_AS(adjusted_jarque_bera(std::vector<double>(10, 1.0)), domain_error);
}
