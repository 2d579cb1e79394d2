#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "kdv/grid.hpp"
#include "kdv/initial_data.hpp"
#include "kdv/scheme.hpp"

namespace kdv {

using SpaceTimeFn = std::function<double(double t, double x)>;

// How the error against an exact solution is sampled in time:
//   PointInTime (default): compare v^n with the cell averages of u(t^n, .);
//   CellTimeAverage: compare v^n with the space-time average of u over
//   [t^n, min(t^{n+1}, T)] x cell (the initial state and the final, where the
//   window is empty, use the plain spatial average).
enum class ExactErrorMode { PointInTime, CellTimeAverage };

struct ErrorRunResult {
    double error = 0.0;      // sup_n l2_Delta distance
    double scale = 0.0;      // sup_n ||v^n||_{l2_Delta}, for noise-floor checks
    std::size_t steps = 0;
};

// sup_n || v^n - [u]^n || over a full run on grid (L, J).
ErrorRunResult exact_error(const PeriodicGrid& g, std::vector<double> v0, const SchemeConfig& cfg,
                           const SpaceTimeFn& exact, ExactErrorMode mode = ExactErrorMode::PointInTime,
                           int quad_order = 4);

// Two-grid error: run J and 2J side by side, each step advanced with the dt
// selected by the *finer* grid's CFL policy (both runs share the step
// sequence and land on t_final together; each keeps its own adaptive Rusanov
// coefficient). Error is sup_n || v^n_j - vbar^n_{2j} || in the coarse
// l2_Delta norm.
ErrorRunResult self_error(const PeriodicGrid& coarse, std::vector<double> v0_coarse,
                          std::vector<double> v0_fine, const SchemeConfig& cfg);

struct LadderRow {
    std::size_t J = 0;
    double dx = 0.0;
    double error = 0.0;
    double rate = 0.0; // vs previous row; NaN on the first row
    bool noise_floor = false;
    std::size_t steps = 0;
};

struct RateTable {
    std::vector<LadderRow> rows;
    double aggregated_rate = 0.0; // mean of the two finest defined rates
};

// rate on row i: log2(error[i-1] / error[i]); aggregated = mean of last two.
RateTable rate_table(const std::vector<std::size_t>& Js, const std::vector<double>& errors,
                     const std::vector<double>& scales, const std::vector<std::size_t>& steps,
                     double L);

struct TheoryRates {
    double proved;      // s/(12-2s) for s <= 3, min(s,6)/6 beyond
    double conjectured; // min(s,6)/6
};
TheoryRates theory_rates(double s);

// Everything needed to reproduce one convergence study.
struct ExperimentSpec {
    enum class Datum { Sinusoidal, Cnoidal, RoughHalfInteger, RoughInteger };
    enum class ErrorKind { SelfTwoGrid, ExactReference };
    // How the datum becomes grid data. CellAverage is the scheme's projection
    // and the default. PointSample takes u0 at the left cell edges; in a
    // two-grid study the coarse data then agree with the subsampled fine data
    // exactly, so the measured error carries no O(dx) projection offset. That
    // offset otherwise floors the rough-data studies, whose per-grid
    // mollification difference sits below it on practical ladders.
    enum class Projection { CellAverage, PointSample };

    Datum datum = Datum::Sinusoidal;
    double L = 50.0;
    double amplitude = 1.0; // scales the datum; must stay 1 for cnoidal (exactness)
    int s = 1;              // RoughInteger
    int level = 0;          // RoughHalfInteger
    double m = 0.9;         // cnoidal
    double mu = 1.0 / 576.0;

    std::vector<std::size_t> ladder;
    SchemeConfig scheme;
    ErrorKind kind = ErrorKind::SelfTwoGrid;
    ExactErrorMode mode = ExactErrorMode::PointInTime;
    Projection projection = Projection::CellAverage;
    int quad_order = 4;

    bool mollify_enabled = false;
    double mollify_delta = -1.0; // < 0: use the exponent rule per grid
    // delta = dx^a with this a; NaN falls back to the s-dependent default.
    double mollify_exponent = std::numeric_limits<double>::quiet_NaN();
    int threads = 1;

    double sobolev_index() const; // nominal s of the datum family
};

RateTable experiment(const ExperimentSpec& spec);

// Datum factory shared by the harness and the CLI. For the cnoidal datum the
// exact space-time solution is also returned.
struct DatumBundle {
    ScalarFn u0;
    std::optional<SpaceTimeFn> exact;
    std::string name;
};
DatumBundle make_datum(const ExperimentSpec& spec);

} // namespace kdv
