// Prints moments and a coarse density table for an NCIG return law.
#include <cstdio>

#include "msub/msub.hpp"

int main() {
    using namespace msub;
    const auto params = LogPriceParams::two_level(0.0, 0.0, -0.281, 0.252, IGParams(0.122, 12.54), IGParams(0.0035, 17.66));
    const ReturnLaw law(Family::ncig, params);

    const MomentSet m = law.moments();
    std::printf("mean %.6g  variance %.6g  skewness %.4f  excess kurtosis %.4f (%s)\n", m.mean.value, m.variance.value,
                m.skewness.value, m.excess_kurtosis.value, to_string(m.excess_kurtosis.status));

    const DensityGrid g = law.density();
    std::printf("grid mass %.8f, clipped %.2e\n", g.mass(), g.clipped_mass);
    const double sd = std::sqrt(m.variance.value);
    for (int k = -4; k <= 4; ++k) {
        const double x = m.mean.value + 0.5 * k * sd;
        std::printf("x % .5f  pdf %10.4f  cdf %.5f\n", x, g.pdf(x), cdf_interp(g, x));
    }
}
