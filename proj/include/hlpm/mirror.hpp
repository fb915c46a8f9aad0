#pragma once

#include <span>
#include <vector>

#include "hlpm/grid.hpp"
#include "hlpm/monotone_graph.hpp"

namespace hlpm {

// Even extension between the Neumann problem on [0, inf) and the Cauchy
// problem on R:
//   u0_bar(x) = u0(|x|) / 2,  beta_bar(u) = beta(2u) / 2,  Phi_bar(u) = Phi(2u),
// and back, v = 2 u_bar restricted to x >= 0.

constexpr double kUnitMassTolerance = 1e-10;
constexpr double kRestrictEvennessTolerance = 1e-8;

[[nodiscard]] DensityField extend_initial(const DensityField& u0);
[[nodiscard]] MonotoneGraph extend_beta(const MonotoneGraph& beta);
[[nodiscard]] PhiGraph extend_phi(const PhiGraph& phi);

// Throws EvennessError when the L1 asymmetry exceeds `tolerance`.
[[nodiscard]] DensityField restrict_solution(const DensityField& u_bar,
                                             double tolerance = kRestrictEvennessTolerance);

// Same index arithmetic on raw values of a symmetric grid (used for eta).
[[nodiscard]] std::vector<double> restrict_values(const Grid1D& grid, std::span<const double> values);
[[nodiscard]] std::vector<double> extend_values(const Grid1D& half, std::span<const double> values);

// Sum over mirror pairs of |f(x) - f(-x)| dx, each pair counted once:
// the integral of |f(x) - f(-x)| over x >= 0.
[[nodiscard]] double check_even(const DensityField& f);
[[nodiscard]] double asymmetry(const Grid1D& grid, std::span<const double> values);

// Averages mirror cells; the result is exactly even.
[[nodiscard]] DensityField symmetrize(const DensityField& f);

}  // namespace hlpm
