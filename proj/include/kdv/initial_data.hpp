#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "kdv/grid.hpp"

namespace kdv {

using ScalarFn = std::function<double(double)>;

// Cell averages (1/dx) * integral over [x_j, x_{j+1}] of f, by Gauss-Legendre
// quadrature with `order` nodes per cell. Supported orders: 1, 2, 4, 8.
// Order 4 is the default used to project initial data onto the grid.
std::vector<double> cell_average(const PeriodicGrid& g, const ScalarFn& f, int order = 4);

// u0(x) = amplitude * cos(2 pi x / L), one full period over the domain.
ScalarFn sinusoidal(double L, double amplitude = 1.0);

// Complete elliptic integral of the first kind, parameter convention:
// K(m) = integral_0^{pi/2} dt / sqrt(1 - m sin^2 t), computed by the AGM
// (quadratic convergence, ~1e-15 accuracy). Requires 0 <= m < 1.
double elliptic_K(double m);

// Jacobi cn(u | m), parameter convention, by the descending Landen (AGM)
// recursion. Precomputes the AGM ladder for one m; evaluation is then a few
// trig calls, which matters because the convergence harness evaluates the
// cnoidal reference millions of times.
class JacobiCn {
  public:
    explicit JacobiCn(double m);
    double operator()(double u) const;

  private:
    double m_;
    int n_ = 0;
    std::vector<double> a_, c_;
};

double jacobi_cn(double u, double m);

// Cnoidal traveling-wave solution of u_t + u u_x + u_xxx = 0:
//
//   u(t,x) = mu^{-1/5} a cn^2( 4 K(m) ( mu^{2/5}(x - L/2) - v mu^{1/5} t ) | m ),
//   a = 192 m mu K(m)^2,  v = 64 mu (2m - 1) K(m)^2.
//
// The profile travels rigidly with physical speed v * mu^{-1/5}. Note the
// profile is generally not exactly L-periodic; seam_mismatch() reports the
// value gap and one-sided slope gap at x = 0 vs x = L so callers can see the
// wrap-around defect instead of assuming it away.
class CnoidalWave {
  public:
    CnoidalWave(double m, double mu, double L);

    double operator()(double t, double x) const;
    double speed() const { return v_ * std::pow(mu_, -0.2); }
    double elliptic_k() const { return K_; }
    double amplitude_a() const { return a_; }
    double wave_v() const { return v_; }
    double crest() const { return std::pow(mu_, -0.2) * a_; }

    struct SeamReport {
        double value_gap;  // u(t,0) - u(t,L)
        double slope_gap;  // u_x(t,0+) - u_x(t,L-)
    };
    SeamReport seam_mismatch(double t) const;

  private:
    double m_, mu_, L_, K_, a_, v_;
    JacobiCn cn_;
    double du_dx(double t, double x) const;
};

// Rough periodic data, family one: integrate the mean-zero square wave
// (+1 on [0,L/2), -1 on [L/2,L)) `level` times, re-centering to zero mean
// after each integration so every stage stays periodic. The result lies in
// H^{level + 1/2 - eps}. Piecewise polynomial; exact evaluation.
class RoughHalfInteger {
  public:
    RoughHalfInteger(int level, double L);
    double operator()(double x) const;
    int level() const { return level_; }

  private:
    int level_;
    double L_;
    std::vector<double> p0_, p1_; // ascending coefficients on [0,L/2), [L/2,L)
};

// Rough periodic data, family two: f(x) = x^{s-1/2} - sum_{i=1..s} b_i x^i/i!
// with the b_i chosen (triangular system) so f, f', ..., f^{(s-1)} match at
// x = 0 and x = L. Lies in H^{s - eps}. s >= 1 integer.
class RoughInteger {
  public:
    RoughInteger(int s, double L);
    double operator()(double x) const;
    const std::vector<double>& coefficients() const { return b_; } // b_1..b_s

  private:
    int s_;
    double L_;
    std::vector<double> b_;
};

// Smooth low-pass cutoff used by the mollifier: chi(z) = 1 for |z| <= 1/2,
// 0 for |z| >= 1, joined by the C^inf bridge built from exp(-1/t).
double chi_cutoff(double zeta);

// Frequency mollification of grid data: multiply DFT bin k (physical
// wavenumber 2 pi k~/L, k~ in (-J/2, J/2]) by chi_cutoff(delta * |wavenumber|).
// delta -> 0 is the identity; delta large enough leaves only the mean.
std::vector<double> mollify(const PeriodicGrid& g, std::span<const double> cells, double delta);

// The delta = dx^a rule: a = 1/6 for s >= 3, a = gamma/(6-s) with
// gamma = 0.49 for s < 3.
double mollifier_delta_rule(double s, double dx);

} // namespace kdv
