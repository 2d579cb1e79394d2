#include "kdv/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <mutex>

#include "kdv/errors.hpp"

namespace kdv {

namespace {
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
} // namespace

RealFft::RealFft(std::size_t J) : J_(J) {
    if (J < 2) throw UsageError("RealFft: J must be at least 2");
    real_buf_ = fftw_alloc_real(J);
    fftw_complex* cb = fftw_alloc_complex(J / 2 + 1);
    cplx_buf_ = cb;
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan_fwd_ = fftw_plan_dft_r2c_1d(static_cast<int>(J), real_buf_, cb, FFTW_ESTIMATE);
    plan_inv_ = fftw_plan_dft_c2r_1d(static_cast<int>(J), cb, real_buf_, FFTW_ESTIMATE);
    if (!plan_fwd_ || !plan_inv_) throw NumericalError("RealFft: planner failed");
}

RealFft::~RealFft() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
    fftw_destroy_plan(static_cast<fftw_plan>(plan_inv_));
    fftw_free(real_buf_);
    fftw_free(static_cast<fftw_complex*>(cplx_buf_));
}

void RealFft::forward(std::span<const double> x, std::span<std::complex<double>> spec) const {
    std::memcpy(real_buf_, x.data(), J_ * sizeof(double));
    fftw_execute(static_cast<fftw_plan>(plan_fwd_));
    auto* cb = static_cast<fftw_complex*>(cplx_buf_);
    for (std::size_t k = 0; k < bins(); ++k) spec[k] = {cb[k][0], cb[k][1]};
}

void RealFft::inverse(std::span<const std::complex<double>> spec, std::span<double> x) const {
    auto* cb = static_cast<fftw_complex*>(cplx_buf_);
    for (std::size_t k = 0; k < bins(); ++k) {
        cb[k][0] = spec[k].real();
        cb[k][1] = spec[k].imag();
    }
    fftw_execute(static_cast<fftw_plan>(plan_inv_));
    const double inv = 1.0 / static_cast<double>(J_);
    for (std::size_t j = 0; j < J_; ++j) x[j] = real_buf_[j] * inv;
}

std::unique_ptr<RealFft> RealFft::make(std::size_t J) { return std::make_unique<RealFft>(J); }

} // namespace kdv
