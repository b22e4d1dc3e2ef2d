#pragma once

#include <fftw3.h>

#include <complex>
#include <mutex>
#include <vector>

#include "msub/core.hpp"

namespace msub {

namespace detail {
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace detail

/// In-place complex DFT, A_k = sum_j a_j exp(sign * 2 pi i j k / N) with sign = -1 (forward)
/// or +1 (backward); no normalization.
inline void dft_inplace(std::vector<cplx>& a, int sign = -1) {
    const int n = static_cast<int>(a.size());
    if (n == 0) return;
    auto* p = reinterpret_cast<fftw_complex*>(a.data());
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
        plan = fftw_plan_dft_1d(n, p, p, sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    if (!plan) throw numerical_error("dft_inplace: could not create plan");
    fftw_execute(plan);
    std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(plan);
}

}  // namespace msub
