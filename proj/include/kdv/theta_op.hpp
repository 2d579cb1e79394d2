#pragma once

#include <complex>
#include <memory>
#include <span>
#include <vector>

#include "kdv/banded.hpp"
#include "kdv/fft.hpp"
#include "kdv/grid.hpp"

namespace kdv {

enum class SolvePath { Spectral, Banded };

// The implicit dispersion operator
//
//   (A_theta a)_j = a_j + theta*dt * (a_{j+2} - 3 a_{j+1} + 3 a_j - a_{j-1}) / dx^3
//
// i.e. A_theta = I + theta*dt*D+D+D- on the periodic grid. Circulant, so it
// diagonalizes in Fourier space; symbol(k) at xi_k = k/J (with the
// a_hat(xi) = sum_j a_j exp(+2 i pi j xi) transform convention) is
//
//   1 + 8 i theta (dt/dx^3) exp(-i pi xi) sin^3(pi xi).
//
// solve() inverts A_theta by either route: Spectral divides by the symbol in
// Fourier space (the production path); Banded runs the cyclic banded
// elimination with the low-rank wrap correction (kept as an independent
// second route). theta may be any real for apply()/symbol(); the scheme
// restricts itself to [0,1].
class ThetaOperator {
  public:
    ThetaOperator(const PeriodicGrid& grid, double theta, double dt);

    const PeriodicGrid& grid() const { return grid_; }
    double theta() const { return theta_; }
    double dt() const { return dt_; }
    double r() const { return r_; } // dt/dx^3

    std::vector<double> apply(std::span<const double> a) const;
    std::complex<double> symbol(std::size_t k) const;
    std::vector<double> solve(std::span<const double> rhs, SolvePath path = SolvePath::Spectral) const;

    // Change dt in place, keeping the FFT plan (time steppers adapt dt every
    // step; replanning would dominate). Drops any banded factorization.
    void set_dt(double dt);

  private:
    PeriodicGrid grid_;
    double theta_;
    double dt_;
    double r_;
    mutable std::unique_ptr<RealFft> fft_;                // built on first spectral solve
    mutable std::unique_ptr<CyclicBandedSolver> banded_;  // built on first banded solve
};

// Slack/residual report for the operator norm relations
//   ||a||^2 <= ||A a||^2 <= (1 + 16 theta r (1 + 4 theta r)) ||a||^2
//   ||A a||^2 = ||a||^2 + theta dt dx ||D+D- a||^2 + theta^2 dt^2 ||D+D+D- a||^2
// All quantities are reported so tests can assert nonnegativity of the
// slacks (up to roundoff) and smallness of the decomposition residual.
struct NormBoundsReport {
    double norm_a_sq;
    double norm_Aa_sq;
    double lower_slack;      // ||A a||^2 - ||a||^2
    double upper_slack;      // bound - ||A a||^2
    double decomp_residual;  // |identity mismatch| / max(1, ||A a||^2)
};

NormBoundsReport verify_norm_bounds(const ThetaOperator& op, std::span<const double> a);

} // namespace kdv
