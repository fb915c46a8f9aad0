#pragma once

#include "hlpm/grid.hpp"

namespace hlpm {

struct DensityDistance {
  double L1 = 0.0;
  double W1 = 0.0;
};

// L1 = sum |a_i - b_i| dx,  W1 = int |F_a - F_b| dx with piecewise-linear CDFs.
// Fields on different grids are compared on the finer common refinement when
// `resample` is set; otherwise a grid mismatch throws ValidationError.
[[nodiscard]] DensityDistance compare_densities(const DensityField& a, const DensityField& b, bool resample = false);

// Cell averages of `f` on `target`, treating `f` as piecewise constant. Cells
// outside the source grid read 0.
[[nodiscard]] DensityField resample(const DensityField& f, const Grid1D& target);

// Cell averages at time t of the Neumann heat solution  v_t = (D/2) v_xx  on
// [0, inf) from piecewise-constant data, by the method of images:
//   v(t, x) = int u0(y) [g(x - y) + g(x + y)] dy,  g = N(0, D t).
// Exact for the given cell data; cells are integrated in closed form.
[[nodiscard]] DensityField reflected_heat(const DensityField& u0, double t, double diffusivity = 1.0,
                                          const Grid1D* target = nullptr);

}  // namespace hlpm
