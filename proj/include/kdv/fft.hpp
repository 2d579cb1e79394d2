#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace kdv {

// Thin wrapper over FFTW's 1-d real transforms. Forward fills bins
// k = 0..J/2 of X_k = sum_j x_j exp(-2 pi i j k / J); inverse applies the
// conjugate transform and divides by J. Plans use FFTW_ESTIMATE so results
// are reproducible run to run.
//
// Instances are not thread-safe (they own scratch buffers); use one per
// thread via shared(J), which hands out per-call instances from a cached
// plan under a global planner mutex (FFTW planning itself is not
// thread-safe).
class RealFft {
  public:
    explicit RealFft(std::size_t J);
    ~RealFft();
    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;

    std::size_t size() const { return J_; }
    std::size_t bins() const { return J_ / 2 + 1; }

    // x has length J; fills spec (length J/2+1).
    void forward(std::span<const double> x, std::span<std::complex<double>> spec) const;
    // spec has length J/2+1; fills x (length J), normalized by 1/J.
    void inverse(std::span<const std::complex<double>> spec, std::span<double> x) const;

    // New instance for grid size J (planner serialized internally).
    static std::unique_ptr<RealFft> make(std::size_t J);

  private:
    std::size_t J_;
    void* plan_fwd_;  // fftw_plan
    void* plan_inv_;
    double* real_buf_;
    void* cplx_buf_;  // fftw_complex*
};

} // namespace kdv
