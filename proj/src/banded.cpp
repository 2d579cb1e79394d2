#include "kdv/banded.hpp"

#include <cmath>
#include <cstdlib>

#include "kdv/errors.hpp"

namespace kdv {

namespace {

// Dense 3x3 LU with partial pivoting (for the Woodbury capacitance).
void lu3_factor(std::array<double, 9>& a, std::array<int, 3>& piv) {
    for (int k = 0; k < 3; ++k) {
        int p = k;
        for (int i = k + 1; i < 3; ++i)
            if (std::abs(a[3 * i + k]) > std::abs(a[3 * p + k])) p = i;
        piv[k] = p;
        if (p != k)
            for (int j = 0; j < 3; ++j) std::swap(a[3 * k + j], a[3 * p + j]);
        if (a[3 * k + k] == 0.0) throw NumericalError("CyclicBandedSolver: singular capacitance");
        for (int i = k + 1; i < 3; ++i) {
            const double m = a[3 * i + k] / a[3 * k + k];
            a[3 * i + k] = m;
            for (int j = k + 1; j < 3; ++j) a[3 * i + j] -= m * a[3 * k + j];
        }
    }
}

void lu3_solve(const std::array<double, 9>& a, const std::array<int, 3>& piv, double* b) {
    for (int k = 0; k < 3; ++k) {
        if (piv[k] != k) std::swap(b[k], b[piv[k]]);
        for (int i = k + 1; i < 3; ++i) b[i] -= a[3 * i + k] * b[k];
    }
    for (int k = 2; k >= 0; --k) {
        for (int j = k + 1; j < 3; ++j) b[k] -= a[3 * k + j] * b[j];
        b[k] /= a[3 * k + k];
    }
}

} // namespace

CyclicBandedSolver::CyclicBandedSolver(std::size_t J, double cm1, double c0, double cp1, double cp2)
    : J_(J), ldab_(2 * kl + ku + 1), ab_(ldab_ * J, 0.0), piv_(J, 0),
      rows_{0, J - 2, J - 1}, Y_(3 * J, 0.0), cm1_(cm1), c0_(c0), cp1_(cp1), cp2_(cp2) {
    if (J < 4) throw UsageError("CyclicBandedSolver: J must be at least 4");

    // Band core (wrap entries left out; they go through the Woodbury term).
    auto at = [&](std::size_t i, std::size_t j) -> double& {
        return ab_[ldab_ * j + (kl + ku + i - j)];
    };
    for (std::size_t j = 0; j < J; ++j) {
        if (j >= 1) at(j - 1, j) = cp1;
        if (j >= 2) at(j - 2, j) = cp2;
        at(j, j) = c0;
        if (j + 1 < J) at(j + 1, j) = cm1;
    }

    // LU factor with row partial pivoting (fill extends ku by kl).
    for (std::size_t k = 0; k + 1 <= J - 1; ++k) {
        std::size_t p = k;
        const std::size_t ilast = std::min(J - 1, k + kl);
        for (std::size_t i = k + 1; i <= ilast; ++i)
            if (std::abs(at(i, k)) > std::abs(at(p, k))) p = i;
        piv_[k] = static_cast<int>(p);
        if (at(p, k) == 0.0) throw NumericalError("CyclicBandedSolver: zero pivot in band core");
        const std::size_t jlast = std::min(J - 1, k + kl + ku);
        if (p != k)
            for (std::size_t j = k; j <= jlast; ++j) std::swap(at(k, j), at(p, j));
        for (std::size_t i = k + 1; i <= ilast; ++i) {
            const double m = at(i, k) / at(k, k);
            at(i, k) = m;
            for (std::size_t j = k + 1; j <= jlast; ++j) at(i, j) -= m * at(k, j);
        }
    }
    piv_[J - 1] = static_cast<int>(J - 1);
    if (at(J - 1, J - 1) == 0.0)
        throw NumericalError("CyclicBandedSolver: zero pivot in band core");

    // Y = B^{-1} [e_{r0} e_{r1} e_{r2}]
    for (int l = 0; l < 3; ++l) {
        std::span<double> y(&Y_[static_cast<std::size_t>(l) * J], J);
        for (std::size_t i = 0; i < J; ++i) y[i] = 0.0;
        y[rows_[static_cast<std::size_t>(l)]] = 1.0;
        band_solve(y);
    }

    // Capacitance C = I + W^T Y, W rows: cm1*e_{J-1} ; cp2*e_0 ; cp1*e_0 + cp2*e_1
    auto wy = [&](int l) -> std::array<double, 3> {
        const double* y = &Y_[static_cast<std::size_t>(l) * J];
        return {cm1 * y[J - 1], cp2 * y[0], cp1 * y[0] + cp2 * y[1]};
    };
    for (int l = 0; l < 3; ++l) {
        const auto col = wy(l);
        for (int i = 0; i < 3; ++i) cap_lu_[static_cast<std::size_t>(3 * i + l)] = col[static_cast<std::size_t>(i)];
    }
    for (int i = 0; i < 3; ++i) cap_lu_[static_cast<std::size_t>(4 * i)] += 1.0;
    lu3_factor(cap_lu_, cap_piv_);
}

void CyclicBandedSolver::band_solve(std::span<double> x) const {
    auto at = [&](std::size_t i, std::size_t j) -> double {
        return ab_[ldab_ * j + (kl + ku + i - j)];
    };
    const std::size_t J = J_;
    for (std::size_t k = 0; k + 1 <= J - 1; ++k) {
        const auto p = static_cast<std::size_t>(piv_[k]);
        if (p != k) std::swap(x[k], x[p]);
        const std::size_t ilast = std::min(J - 1, k + kl);
        for (std::size_t i = k + 1; i <= ilast; ++i) x[i] -= at(i, k) * x[k];
    }
    for (std::size_t kk = J; kk-- > 0;) {
        const std::size_t jlast = std::min(J - 1, kk + kl + ku);
        for (std::size_t j = kk + 1; j <= jlast; ++j) x[kk] -= at(kk, j) * x[j];
        x[kk] /= at(kk, kk);
    }
}

void CyclicBandedSolver::solve(std::span<const double> b, std::span<double> x) const {
    const std::size_t J = J_;
    std::vector<double> z(b.begin(), b.end());
    band_solve(z);
    auto correct = [&](std::vector<double>& zz) {
        double t[3] = {cm1_ * zz[J - 1], cp2_ * zz[0], cp1_ * zz[0] + cp2_ * zz[1]};
        lu3_solve(cap_lu_, cap_piv_, t);
        for (std::size_t j = 0; j < J; ++j)
            zz[j] -= Y_[j] * t[0] + Y_[J + j] * t[1] + Y_[2 * J + j] * t[2];
    };
    correct(z);

    // One pass of iterative refinement against the true cyclic operator;
    // recovers the last digits when the band core is ill-conditioned.
    std::vector<double> resid(J);
    for (std::size_t j = 0; j < J; ++j) {
        const double xm1 = z[(j + J - 1) % J];
        const double xp1 = z[(j + 1) % J];
        const double xp2 = z[(j + 2) % J];
        resid[j] = b[j] - (cm1_ * xm1 + c0_ * z[j] + cp1_ * xp1 + cp2_ * xp2);
    }
    band_solve(resid);
    correct(resid);
    for (std::size_t j = 0; j < J; ++j) x[j] = z[j] + resid[j];
}

} // namespace kdv
