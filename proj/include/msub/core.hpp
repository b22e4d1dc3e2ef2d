#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace msub {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr double inf = std::numeric_limits<double>::infinity();
inline constexpr double nan = std::numeric_limits<double>::quiet_NaN();

inline constexpr const char* version = "0.1.0";

class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class domain_error : public error {
public:
    using error::error;
};

/// Numerical routine did not meet its tolerance or produced a non-finite value.
class numerical_error : public error {
public:
    using error::error;
};

class quadrature_error : public numerical_error {
public:
    quadrature_error(const std::string& what, double a, double b, double err)
        : numerical_error(what + " (worst subinterval [" + std::to_string(a) + ", " +
                          std::to_string(b) + "], error " + std::to_string(err) + ")"),
          worst_a(a), worst_b(b), error_estimate(err) {}
    double worst_a, worst_b, error_estimate;
};

/// Malformed or inconsistent input data.
class data_error : public error {
public:
    using error::error;
};

/// Invalid run configuration.
class config_error : public error {
public:
    using error::error;
};

inline void require(bool ok, const std::string& msg) {
    if (!ok) throw domain_error(msg);
}

inline bool is_finite(double x) { return std::isfinite(x); }

/// SplitMix64 step, used to derive independent seeds from a master seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Caller-owned random state. Variate transforms are written out here so a
/// given seed yields the same stream on every standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 1) : eng_(splitmix64(seed)) {}

    /// Uniform on the open interval (0, 1).
    double uniform() { return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53; }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        has_spare_ = true;
        return u * m;
    }

    double exponential() { return -std::log(uniform()); }

    /// Gamma(shape, 1) by Marsaglia-Tsang, with the power boost for shape < 1.
    double gamma(double shape) {
        if (shape < 1.0) {
            const double g = gamma(shape + 1.0);
            return g * std::exp(std::log(uniform()) / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    std::uint64_t next_u64() { return eng_(); }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Tagged moment value: finite closed form, undefined, or obtained numerically.
enum class MomentStatus { finite, undefined, numeric_only };

struct Moment {
    MomentStatus status = MomentStatus::undefined;
    double value = nan;

    static Moment finite(double v) { return {MomentStatus::finite, v}; }
    static Moment numeric(double v) { return {MomentStatus::numeric_only, v}; }
    static Moment undefined() { return {MomentStatus::undefined, nan}; }
    bool defined() const { return status != MomentStatus::undefined; }
};

struct MomentSet {
    Moment mean, variance, skewness, excess_kurtosis;
};

inline const char* to_string(MomentStatus s) {
    switch (s) {
    case MomentStatus::finite: return "finite";
    case MomentStatus::undefined: return "undefined";
    case MomentStatus::numeric_only: return "numeric-only";
    }
    return "?";
}

}  // namespace msub
