#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace kdv {

// Direct solver for the periodic quad-diagonal system produced by the
// implicit dispersion operator: row j couples a_{j-1}, a_j, a_{j+1}, a_{j+2}
// (indices mod J) with constant coefficients (cm1, c0, cp1, cp2).
//
// Strategy: LU-factor the band core (without the wrap entries) with partial
// pivoting, then fold the 4 wrap entries back in through a rank-3
// Sherman-Morrison-Woodbury correction. O(J) setup and solve. Requires
// J >= 4 so the wrap entries stay outside the band.
class CyclicBandedSolver {
  public:
    CyclicBandedSolver(std::size_t J, double cm1, double c0, double cp1, double cp2);

    // Solve A x = b. b and x have length J (may alias).
    void solve(std::span<const double> b, std::span<double> x) const;

  private:
    static constexpr std::size_t kl = 1; // subdiagonals
    static constexpr std::size_t ku = 2; // superdiagonals
    // band storage with pivoting fill: rows = kl + (kl+ku) + 1, column-major
    // per LAPACK dgbtrf layout: ab[ldab*j + (kl+ku+i-j)] holds A(i,j).
    std::size_t J_;
    std::size_t ldab_;
    std::vector<double> ab_;
    std::vector<int> piv_;
    // Woodbury data: A = B + sum_i u_i w_i^T with u_i unit vectors at rows_,
    // w_i sparse (wrap coefficients). Stored: capacitance^{-1} factors and
    // the three solved columns Y = B^{-1} U.
    std::array<std::size_t, 3> rows_;
    std::vector<double> Y_;              // J x 3, column-major
    std::array<double, 9> cap_lu_;       // 3x3 LU of (I + W^T Y), row-major
    std::array<int, 3> cap_piv_;
    double cm1_, c0_, cp1_, cp2_;

    void band_solve(std::span<double> x) const; // in-place B^{-1}
};

} // namespace kdv
