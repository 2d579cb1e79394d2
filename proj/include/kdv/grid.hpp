#pragma once

#include <cstddef>
#include <vector>

#include "kdv/errors.hpp"

namespace kdv {

// Uniform periodic grid on [0, L): J cells of width dx = L/J, cell j spanning
// [x_j, x_{j+1}] with x_j = j*dx. All difference operators wrap around.
// J >= 4 so that the widest stencil (j-1 .. j+2) never self-overlaps a corner
// entry of the implicit operator's band.
struct PeriodicGrid {
    double L;
    std::size_t J;
    double dx;

    PeriodicGrid(double L_, std::size_t J_) : L(L_), J(J_), dx(L_ / static_cast<double>(J_)) {
        if (!(L_ > 0.0)) throw UsageError("PeriodicGrid: L must be positive");
        if (J_ < 4) throw UsageError("PeriodicGrid: J must be at least 4");
    }

    double x(std::size_t j) const { return static_cast<double>(j) * dx; }
};

// Grid values: v[j] lives on (is the cell average of) cell j.
struct GridFunction {
    PeriodicGrid grid;
    std::vector<double> v;
};

// Accepted step times t^0 = 0, ..., t^N = t_final of a run.
struct TimeStamps {
    std::vector<double> t;
};

} // namespace kdv
