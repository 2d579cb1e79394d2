#include "kdv/convergence.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <memory>
#include <mutex>
#include <thread>

#include "kdv/errors.hpp"
#include "kdv/ops.hpp"

namespace kdv {

namespace {

// Gauss-Legendre in time over [ta, tb] of the spatial cell averages.
std::vector<double> time_averaged_cells(const PeriodicGrid& g, const SpaceTimeFn& u, double ta,
                                        double tb, int quad_order) {
    if (!(tb > ta)) { // degenerate window: plain spatial average at ta
        return cell_average(g, [&](double x) { return u(ta, x); }, quad_order);
    }
    // 4-node rule in time is plenty: the windows are O(dt) wide
    static const double tx[] = {-0.86113631159405257522, -0.33998104358485626480,
                                0.33998104358485626480, 0.86113631159405257522};
    static const double tw[] = {0.34785484513745385737, 0.65214515486254614263,
                                0.65214515486254614263, 0.34785484513745385737};
    std::vector<double> acc(g.J, 0.0);
    for (int q = 0; q < 4; ++q) {
        const double tq = ta + 0.5 * (tb - ta) * (tx[q] + 1.0);
        std::vector<double> cells = cell_average(g, [&](double x) { return u(tq, x); }, quad_order);
        for (std::size_t j = 0; j < g.J; ++j) acc[j] += 0.5 * tw[q] * cells[j];
    }
    return acc;
}

} // namespace

ErrorRunResult exact_error(const PeriodicGrid& g, std::vector<double> v0, const SchemeConfig& cfg,
                           const SpaceTimeFn& exact, ExactErrorMode mode, int quad_order) {
    ErrorRunResult out;

    if (mode == ExactErrorMode::PointInTime) {
        StepObserver obs = [&](std::size_t, double t, std::span<const double> v) {
            std::vector<double> ref = cell_average(g, [&](double x) { return exact(t, x); }, quad_order);
            for (std::size_t j = 0; j < g.J; ++j) ref[j] = v[j] - ref[j];
            out.error = std::max(out.error, norm_l2_delta(g, ref));
            out.scale = std::max(out.scale, norm_l2_delta(g, v));
        };
        RunResult rr = run(g, std::move(v0), cfg, obs);
        out.steps = rr.steps;
        return out;
    }

    // CellTimeAverage: state v^n is compared against the window
    // [t^n, t^{n+1}], which is only known once step n+1 lands, so states are
    // buffered one step. v^0 and v^N use plain spatial averages (the error
    // definition time-averages only interior states; the final window is
    // empty anyway).
    std::vector<double> prev;
    double prev_t = 0.0;
    std::size_t prev_n = 0;
    auto flush = [&](double tb) {
        std::vector<double> ref =
            (prev_n >= 1 && tb > prev_t)
                ? time_averaged_cells(g, exact, prev_t, tb, quad_order)
                : cell_average(g, [&](double x) { return exact(prev_t, x); }, quad_order);
        for (std::size_t j = 0; j < g.J; ++j) ref[j] = prev[j] - ref[j];
        out.error = std::max(out.error, norm_l2_delta(g, ref));
    };
    StepObserver obs = [&](std::size_t n, double t, std::span<const double> v) {
        out.scale = std::max(out.scale, norm_l2_delta(g, v));
        if (n >= 1) flush(t);
        prev.assign(v.begin(), v.end());
        prev_t = t;
        prev_n = n;
    };
    RunResult rr = run(g, std::move(v0), cfg, obs);
    // final state: degenerate window [T, T] collapses to a point comparison
    prev_n = 0;
    flush(prev_t);
    out.steps = rr.steps;
    return out;
}

ErrorRunResult self_error(const PeriodicGrid& coarse, std::vector<double> v0_coarse,
                          std::vector<double> v0_fine, const SchemeConfig& cfg) {
    cfg.validate();
    PeriodicGrid fine(coarse.L, 2 * coarse.J);
    if (v0_coarse.size() != coarse.J || v0_fine.size() != fine.J)
        throw UsageError("self_error: initial data sizes do not match the grid pair");

    ErrorRunResult out;
    auto record = [&](std::span<const double> vc, std::span<const double> vf) {
        std::vector<double> diff(coarse.J);
        for (std::size_t j = 0; j < coarse.J; ++j) diff[j] = vc[j] - vf[2 * j];
        out.error = std::max(out.error, norm_l2_delta(coarse, diff));
        out.scale = std::max(out.scale, norm_l2_delta(coarse, std::span<const double>(vc)));
    };

    const double dt_cap = std::isnan(cfg.dt_cap) ? fine.dx : cfg.dt_cap;
    std::vector<double> vc = std::move(v0_coarse);
    std::vector<double> vf = std::move(v0_fine);
    record(vc, vf);

    ThetaOperator op_c(coarse, cfg.theta, dt_cap);
    ThetaOperator op_f(fine, cfg.theta, dt_cap);
    double t = 0.0;
    std::size_t n = 0;
    while (t < cfg.t_final) {
        if (n >= cfg.max_steps) throw NumericalError("self_error: max_steps exhausted");
        // the finer grid picks the shared dt; it also satisfies the coarse
        // CFL since dx_coarse = 2 dx_fine
        const double cf = cfg.rusanov.coefficient(vf);
        const double cc = cfg.rusanov.coefficient(vc);
        double dt = select_dt(cfg.cfl, cf, fine, cfg.theta, dt_cap);
        if (t + dt >= cfg.t_final) {
            dt = cfg.t_final - t;
            t = cfg.t_final;
        } else {
            t += dt;
        }
        op_c.set_dt(dt);
        op_f.set_dt(dt);
        vc = step_kdv(op_c, vc, cc, cfg.path);
        vf = step_kdv(op_f, vf, cf, cfg.path);
        if (!std::isfinite(norm_linf(vc)) || !std::isfinite(norm_linf(vf)))
            throw NumericalError("self_error: non-finite state at t = " + std::to_string(t));
        record(vc, vf);
        ++n;
    }
    out.steps = n;
    return out;
}

RateTable rate_table(const std::vector<std::size_t>& Js, const std::vector<double>& errors,
                     const std::vector<double>& scales, const std::vector<std::size_t>& steps,
                     double L) {
    if (Js.size() != errors.size()) throw UsageError("rate_table: J/error size mismatch");
    RateTable table;
    const double eps = std::numeric_limits<double>::epsilon();
    for (std::size_t i = 0; i < Js.size(); ++i) {
        LadderRow row;
        row.J = Js[i];
        row.dx = L / static_cast<double>(Js[i]);
        row.error = errors[i];
        row.steps = i < steps.size() ? steps[i] : 0;
        const double scale = i < scales.size() ? scales[i] : 0.0;
        row.noise_floor = errors[i] < 1e2 * eps * scale;
        row.rate = (i == 0) ? std::numeric_limits<double>::quiet_NaN()
                            : std::log2(errors[i - 1] / errors[i]);
        table.rows.push_back(row);
    }
    double acc = 0.0;
    int cnt = 0;
    for (std::size_t i = table.rows.size(); i-- > 1 && cnt < 2;) {
        // rows at the rounding noise floor carry no rate information
        if (table.rows[i].noise_floor || table.rows[i - 1].noise_floor) continue;
        if (std::isfinite(table.rows[i].rate)) {
            acc += table.rows[i].rate;
            ++cnt;
        }
    }
    table.aggregated_rate = cnt ? acc / cnt : std::numeric_limits<double>::quiet_NaN();
    return table;
}

TheoryRates theory_rates(double s) {
    TheoryRates tr{};
    tr.conjectured = std::min(s, 6.0) / 6.0;
    tr.proved = (s <= 3.0) ? s / (12.0 - 2.0 * s) : tr.conjectured;
    return tr;
}

double ExperimentSpec::sobolev_index() const {
    switch (datum) {
        case Datum::RoughInteger: return static_cast<double>(s);
        case Datum::RoughHalfInteger: return static_cast<double>(level) + 0.5;
        default: return std::numeric_limits<double>::infinity();
    }
}

DatumBundle make_datum(const ExperimentSpec& spec) {
    const double amp = spec.amplitude;
    switch (spec.datum) {
        case ExperimentSpec::Datum::Sinusoidal:
            return {sinusoidal(spec.L, amp), std::nullopt, "sinusoidal"};
        case ExperimentSpec::Datum::Cnoidal: {
            // The cnoidal profile solves the equation only at its own
            // amplitude; scaling it would silently break the exact reference.
            if (amp != 1.0)
                throw UsageError("make_datum: the cnoidal datum cannot be rescaled (amplitude must be 1)");
            auto wave = std::make_shared<CnoidalWave>(spec.m, spec.mu, spec.L);
            ScalarFn u0 = [wave](double x) { return (*wave)(0.0, x); };
            SpaceTimeFn exact = [wave](double t, double x) { return (*wave)(t, x); };
            return {std::move(u0), std::move(exact), "cnoidal"};
        }
        case ExperimentSpec::Datum::RoughHalfInteger: {
            auto f = std::make_shared<RoughHalfInteger>(spec.level, spec.L);
            return {[f, amp](double x) { return amp * (*f)(x); }, std::nullopt,
                    "rough-halfinteger-" + std::to_string(spec.level)};
        }
        case ExperimentSpec::Datum::RoughInteger: {
            auto f = std::make_shared<RoughInteger>(spec.s, spec.L);
            return {[f, amp](double x) { return amp * (*f)(x); }, std::nullopt,
                    "rough-integer-" + std::to_string(spec.s)};
        }
    }
    throw UsageError("make_datum: unknown datum");
}

RateTable experiment(const ExperimentSpec& spec) {
    if (spec.ladder.empty()) throw UsageError("experiment: empty ladder");
    spec.scheme.validate();
    DatumBundle datum = make_datum(spec);
    if (spec.kind == ExperimentSpec::ErrorKind::ExactReference && !datum.exact)
        throw UsageError("experiment: no exact solution is known for datum '" + datum.name +
                         "'; use the two-grid error");

    auto pick_delta = [&](double dx) {
        if (spec.mollify_delta >= 0.0) return spec.mollify_delta;
        if (std::isfinite(spec.mollify_exponent)) return std::pow(dx, spec.mollify_exponent);
        return mollifier_delta_rule(spec.sobolev_index(), dx);
    };
    auto project = [&](const PeriodicGrid& g) {
        std::vector<double> v0;
        if (spec.projection == ExperimentSpec::Projection::PointSample) {
            v0.resize(g.J);
            for (std::size_t j = 0; j < g.J; ++j) v0[j] = datum.u0(g.x(j));
        } else {
            v0 = cell_average(g, datum.u0, spec.quad_order);
        }
        if (spec.mollify_enabled) v0 = mollify(g, v0, pick_delta(g.dx));
        return v0;
    };
    auto run_row = [&](std::size_t J) -> ErrorRunResult {
        PeriodicGrid g(spec.L, J);
        std::vector<double> v0 = project(g);
        if (spec.kind == ExperimentSpec::ErrorKind::ExactReference)
            return exact_error(g, std::move(v0), spec.scheme, *datum.exact, spec.mode,
                               spec.quad_order);
        PeriodicGrid fine(spec.L, 2 * J);
        return self_error(g, std::move(v0), project(fine), spec.scheme);
    };

    std::vector<ErrorRunResult> results(spec.ladder.size());
    if (spec.threads > 1) {
        std::atomic<std::size_t> next{0};
        std::exception_ptr first_error;
        std::mutex err_mutex;
        auto worker = [&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= spec.ladder.size()) return;
                try {
                    results[i] = run_row(spec.ladder[i]);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        };
        std::vector<std::thread> pool;
        const std::size_t nthreads =
            std::min<std::size_t>(static_cast<std::size_t>(spec.threads), spec.ladder.size());
        for (std::size_t i = 0; i < nthreads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
        if (first_error) std::rethrow_exception(first_error);
    } else {
        for (std::size_t i = 0; i < spec.ladder.size(); ++i) results[i] = run_row(spec.ladder[i]);
    }

    std::vector<double> errors, scales;
    std::vector<std::size_t> steps;
    for (const auto& r : results) {
        errors.push_back(r.error);
        scales.push_back(r.scale);
        steps.push_back(r.steps);
    }
    return rate_table(spec.ladder, errors, scales, steps, spec.L);
}

} // namespace kdv
