#include "kdv/scheme.hpp"

#include <cmath>
#include <numbers>

#include "kdv/errors.hpp"
#include "kdv/ops.hpp"

namespace kdv {

double RusanovPolicy::coefficient(std::span<const double> v) const {
    if (kind == Kind::Fixed) return fixed_c;
    return std::max(norm_linf(v), eps_c);
}

void SchemeConfig::validate() const {
    if (!(theta >= 0.0 && theta <= 1.0)) throw UsageError("SchemeConfig: theta must be in [0, 1]");
    if (!(t_final >= 0.0)) throw UsageError("SchemeConfig: t_final must be nonnegative");
    if (cfl.kind == CflPolicy::Kind::Theoretical && !(cfl.beta0 >= 0.0 && cfl.beta0 < 1.0))
        throw UsageError("SchemeConfig: beta0 must be in [0, 1)");
    if (rusanov.kind == RusanovPolicy::Kind::Fixed && !(rusanov.fixed_c > 0.0))
        throw UsageError("SchemeConfig: fixed Rusanov coefficient must be positive");
}

double select_dt(const CflPolicy& cfl, double c, const PeriodicGrid& g, double theta,
                 double dt_cap) {
    double dt;
    if (cfl.kind == CflPolicy::Kind::Experimental) {
        dt = g.dx / c;
    } else {
        const double margin = 1.0 - cfl.beta0;
        dt = margin * g.dx / (c + 0.5);
        if (theta < 0.5) {
            const double dx3 = g.dx * g.dx * g.dx;
            dt = std::min(dt, margin * dx3 / (4.0 * (1.0 - 2.0 * theta)));
        }
    }
    return std::min(dt, dt_cap);
}

namespace {

// rhs of the implicit solve, with switches so the three step flavors share
// one loop: rhs_j = v_j - dt*flux_j - (1-theta)*dt*D3v_j + (c dt dx/2) D+D- v_j.
std::vector<double> explicit_rhs(const PeriodicGrid& g, std::span<const double> v, double dt,
                                 double theta, double c, bool with_flux) {
    const std::size_t J = g.J;
    const double dx = g.dx;
    const double flux_w = with_flux ? dt / (4.0 * dx) : 0.0;
    const double visc_w = with_flux ? c * dt / (2.0 * dx) : 0.0;
    const double disp_w = (1.0 - theta) * dt / (dx * dx * dx);
    std::vector<double> rhs(J);
    for (std::size_t j = 0; j < J; ++j) {
        const double vm1 = v[(j + J - 1) % J];
        const double vp1 = v[(j + 1) % J];
        const double vp2 = v[(j + 2) % J];
        rhs[j] = v[j] - flux_w * (vp1 * vp1 - vm1 * vm1) -
                 disp_w * (vp2 - 3.0 * vp1 + 3.0 * v[j] - vm1) +
                 visc_w * (vp1 - 2.0 * v[j] + vm1);
    }
    return rhs;
}

} // namespace

std::vector<double> step_kdv(const ThetaOperator& op, std::span<const double> v, double c,
                             SolvePath path) {
    std::vector<double> rhs =
        explicit_rhs(op.grid(), v, op.dt(), op.theta(), c, /*with_flux=*/true);
    if (op.theta() == 0.0) return rhs;
    return op.solve(rhs, path);
}

std::vector<double> step_kdv(const PeriodicGrid& g, std::span<const double> v, double dt,
                             double theta, double c, SolvePath path) {
    ThetaOperator op(g, theta, dt);
    return step_kdv(op, v, c, path);
}

std::vector<double> step_airy(const PeriodicGrid& g, std::span<const double> v, double dt,
                              double theta, SolvePath path) {
    std::vector<double> rhs = explicit_rhs(g, v, dt, theta, 0.0, /*with_flux=*/false);
    if (theta == 0.0) return rhs;
    ThetaOperator op(g, theta, dt);
    return op.solve(rhs, path);
}

std::vector<double> step_burgers(const PeriodicGrid& g, std::span<const double> v, double dt,
                                 double c) {
    const std::size_t J = g.J;
    const double flux_w = dt / (4.0 * g.dx);
    const double visc_w = c * dt / (2.0 * g.dx);
    std::vector<double> out(J);
    for (std::size_t j = 0; j < J; ++j) {
        const double vm1 = v[(j + J - 1) % J];
        const double vp1 = v[(j + 1) % J];
        out[j] = v[j] - flux_w * (vp1 * vp1 - vm1 * vm1) + visc_w * (vp1 - 2.0 * v[j] + vm1);
    }
    return out;
}

std::complex<double> airy_amplification(double theta, double r, double xi) {
    const double s = std::sin(std::numbers::pi * xi);
    const double co = std::cos(std::numbers::pi * xi);
    const double s3 = s * s * s;
    const std::complex<double> num(1.0 - 8.0 * (1.0 - theta) * r * s3 * s,
                                   -8.0 * (1.0 - theta) * r * s3 * co);
    const std::complex<double> den(1.0 + 8.0 * theta * r * s3 * s, 8.0 * theta * r * s3 * co);
    return num / den;
}

RunResult run(const PeriodicGrid& g, std::vector<double> v0, const SchemeConfig& cfg,
              const StepObserver& observer) {
    cfg.validate();
    if (v0.size() != g.J) throw UsageError("run: initial data size does not match grid");
    const double dt_cap = std::isnan(cfg.dt_cap) ? g.dx : cfg.dt_cap;
    if (!(dt_cap > 0.0)) throw UsageError("run: dt_cap must be positive");

    RunResult res{GridFunction{g, {}}};
    res.stamps.t.push_back(0.0);
    std::vector<double> v = std::move(v0);
    if (observer) observer(0, 0.0, v);

    double t = 0.0;
    std::size_t n = 0;
    ThetaOperator op(g, cfg.theta, dt_cap); // dt is reset each step below
    while (t < cfg.t_final) {
        if (n >= cfg.max_steps) throw NumericalError("run: max_steps exhausted before t_final");
        const double c = cfg.rusanov.coefficient(v);
        if (cfg.rusanov.kind == RusanovPolicy::Kind::Fixed && norm_linf(v) >= cfg.rusanov.fixed_c &&
            !res.fixed_c_exceeded) {
            res.fixed_c_exceeded = true;
            res.warning = "fixed Rusanov coefficient no longer dominates max|v|; "
                          "the l-infinity stability argument does not apply";
        }
        double dt = select_dt(cfg.cfl, c, g, cfg.theta, dt_cap);
        if (t + dt >= cfg.t_final) {
            dt = cfg.t_final - t; // truncate the last step to land exactly on t_final
            t = cfg.t_final;
        } else {
            t += dt;
        }
        const double mean_before = mean(v);
        const double scale = std::max(1.0, norm_linf(v));
        op.set_dt(dt);
        v = step_kdv(op, v, c, cfg.path);
        const double mean_after = mean(v);
        if (!std::isfinite(mean_after) || !std::isfinite(norm_linf(v)))
            throw NumericalError("run: non-finite state at step " + std::to_string(n + 1) +
                                 " (t = " + std::to_string(t) + ")");
        res.max_mean_drift_rel =
            std::max(res.max_mean_drift_rel, std::abs(mean_after - mean_before) / scale);
        ++n;
        res.stamps.t.push_back(t);
        if (observer) observer(n, t, v);
    }
    res.steps = n;
    res.final_state = GridFunction{g, std::move(v)};
    return res;
}

} // namespace kdv
