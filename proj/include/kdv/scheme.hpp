#pragma once

#include <complex>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "kdv/grid.hpp"
#include "kdv/theta_op.hpp"

namespace kdv {

// Rusanov coefficient c in the stabilizing term c/2 * dx * D+D- v:
//   Fixed: user-supplied constant (a warning is recorded if max|v| reaches it);
//   AdaptiveMaxAbs: c^n = max_j |v_j^n|, floored at eps_c to keep dt finite.
struct RusanovPolicy {
    enum class Kind { Fixed, AdaptiveMaxAbs } kind = Kind::AdaptiveMaxAbs;
    double fixed_c = 1.0;
    static constexpr double eps_c = 1e-12;

    static RusanovPolicy fixed(double c) { return {Kind::Fixed, c}; }
    static RusanovPolicy adaptive() { return {Kind::AdaptiveMaxAbs, 0.0}; }

    double coefficient(std::span<const double> v) const;
};

// Time-step rule.
//   Theoretical: (c + 1/2) dt <= (1 - beta0) dx   and, for theta < 1/2,
//                4 (1 - 2 theta) dt <= (1 - beta0) dx^3;
//   Experimental: dt = dx / c (the rule used for the convergence runs).
struct CflPolicy {
    enum class Kind { Theoretical, Experimental } kind = Kind::Experimental;
    double beta0 = 0.0; // safety margin for the theoretical rule

    static CflPolicy theoretical(double beta0) { return {Kind::Theoretical, beta0}; }
    static CflPolicy experimental() { return {Kind::Experimental, 0.0}; }
};

struct SchemeConfig {
    double theta = 1.0;
    RusanovPolicy rusanov = RusanovPolicy::adaptive();
    CflPolicy cfl = CflPolicy::experimental();
    double t_final = 0.1;
    // Upper bound on dt; NaN means "use dx" (resolved at run time).
    double dt_cap = std::numeric_limits<double>::quiet_NaN();
    SolvePath path = SolvePath::Spectral;
    std::size_t max_steps = 50'000'000;

    void validate() const;
};

// One dt from the CFL policy (before truncation to land on t_final).
double select_dt(const CflPolicy& cfl, double c, const PeriodicGrid& g, double theta,
                 double dt_cap);

// One step of the full scheme: explicit Rusanov flux + explicit part of the
// dispersion, then the implicit theta-solve
//   A_theta v^{n+1} = v^n - dt D(v^2/2)^n - (1-theta) dt D3 v^n
//                     + (c dt dx / 2) D+D- v^n.
std::vector<double> step_kdv(const PeriodicGrid& g, std::span<const double> v, double dt,
                             double theta, double c, SolvePath path = SolvePath::Spectral);

// Same step reusing a prepared operator (and its FFT plan); op carries dt
// and theta. Used by run() so adaptive dt does not replan every step.
std::vector<double> step_kdv(const ThetaOperator& op, std::span<const double> v, double c,
                             SolvePath path = SolvePath::Spectral);

// Dispersion-only variant (no flux, no Rusanov term): A_theta v^{n+1} =
// v^n - (1-theta) dt D3 v^n.
std::vector<double> step_airy(const PeriodicGrid& g, std::span<const double> v, double dt,
                              double theta, SolvePath path = SolvePath::Spectral);

// Advection-free Burgers step (flux + Rusanov term only, fully explicit).
std::vector<double> step_burgers(const PeriodicGrid& g, std::span<const double> v, double dt,
                                 double c);

// Exact per-mode amplification factor of the dispersion-only scheme at
// frequency xi in [0,1):
//   (1 - 8(1-theta) r sin^4(pi xi) - 8 i (1-theta) r sin^3(pi xi) cos(pi xi))
//   / (1 + 8 theta r sin^4(pi xi) + 8 i theta r sin^3(pi xi) cos(pi xi)),
// r = dt/dx^3. |amp| <= 1 for all xi iff dt (1 - 2 theta) <= dx^3 / 4.
std::complex<double> airy_amplification(double theta, double r, double xi);

// Called after the initial state (step = 0, t = 0) and after every accepted
// step with the new state.
using StepObserver = std::function<void(std::size_t step, double t, std::span<const double> v)>;

struct RunResult {
    GridFunction final_state;
    TimeStamps stamps;
    std::size_t steps = 0;
    double max_mean_drift_rel = 0.0; // max_n |mean(v^{n+1}) - mean(v^n)| / max(1, ||v^n||_inf)
    bool fixed_c_exceeded = false;   // Fixed policy saw max|v| >= c at some step
    std::string warning;             // human-readable note when fixed_c_exceeded
};

// March the scheme from the given cell data to t_final. Throws
// NumericalError on NaN/Inf states or when max_steps is exhausted.
RunResult run(const PeriodicGrid& g, std::vector<double> v0, const SchemeConfig& cfg,
              const StepObserver& observer = {});

} // namespace kdv
