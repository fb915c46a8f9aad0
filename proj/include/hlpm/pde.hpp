#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hlpm/grid.hpp"
#include "hlpm/monotone_graph.hpp"

namespace hlpm {

// Selection eta(t, .) in beta(u(t, .)) produced by the implicit solver.
struct EtaField {
  Grid1D grid;
  std::vector<double> values;
  double t = 0.0;
};

struct SolverOptions {
  double sweep_tolerance = 1e-10;     // sup-norm update of a Gauss-Seidel sweep
  double residual_tolerance = 1e-10;  // sup-norm residual of the cell balance
  int max_sweeps = 10000;
  int max_newton = 60;
  bool newton = true;                 // semismooth Newton before the sweeps
  double positivity_tolerance = 1e-10;
  double evenness_tolerance = 1e-12;
};

struct StepStats {
  int newton_iterations = 0;
  int sweeps = 0;
  double residual = 0.0;
};

// One implicit Euler step of  u_t = (1/2) (beta(u))_xx  with zero-flux faces at
// every grid boundary (the Neumann face at x = 0 on half-line grids).
class ImplicitStepper {
 public:
  ImplicitStepper(const Grid1D& grid, MonotoneGraph beta, double dt, SolverOptions opt = {});

  // Advances `u` (cell values) in place and fills `eta`. `y` carries the
  // Yosida variable u + mu eta between calls as a warm start.
  StepStats step(std::vector<double>& u, std::vector<double>& eta);

  [[nodiscard]] double ratio() const { return r_; }
  [[nodiscard]] const MonotoneGraph& beta() const { return beta_; }

 private:
  void evaluate(std::span<const double> y);
  double residual(std::span<const double> b, std::vector<double>& f) const;
  bool newton_solve(std::span<const double> b, StepStats& stats);
  double gauss_seidel_sweep(std::span<const double> b);
  double neighbour_sum(std::size_t i) const;

  Grid1D grid_;
  MonotoneGraph beta_;
  double dt_;
  SolverOptions opt_;
  double r_;
  std::vector<double> mu_;
  std::vector<int> deg_;
  std::vector<double> y_, u_, eta_, slope_;
  bool warm_ = false;
};

struct StepResult {
  DensityField u;
  EtaField eta;
  StepStats stats;
};

[[nodiscard]] StepResult step_implicit(const DensityField& u_n, const MonotoneGraph& beta, double dt,
                                       const SolverOptions& opt = {});

struct Snapshot {
  DensityField u;
  EtaField eta;
};

struct PdeTrajectory {
  std::vector<Snapshot> snapshots;  // first entry is t = 0
  std::string graph_name;
  double dx = 0.0;
  double dt = 0.0;
  std::size_t steps = 0;
  std::vector<StepStats> step_stats;
  // conservation ledger
  double initial_mass = 0.0;
  double max_mass_deviation = 0.0;
  double min_value = 0.0;
  double max_asymmetry = 0.0;  // symmetric grids only
  double max_selection_violation = 0.0;

  [[nodiscard]] const Snapshot& at_time(double t, double tol = 1e-9) const;
  [[nodiscard]] std::vector<double> times() const;
};

struct SolveOptions {
  std::vector<double> snapshot_times;  // rounded to the step grid
  std::size_t snapshot_stride = 0;     // additionally every k steps when > 0
  SolverOptions solver;
  bool skip_assumption_check = false;
  std::optional<std::vector<double>> breakpoints;
};

[[nodiscard]] PdeTrajectory solve(const DensityField& u0, const MonotoneGraph& beta, double T, double dt,
                                  const SolveOptions& opt = {});

enum class BoundaryStencil { ghost, one_sided };

// Discrete flux (1/2) d(eta)/dx across the x = 0 face of a half-line field.
// The scheme's ghost closure makes it exactly 0; `one_sided` uses the first
// two interior cells instead.
[[nodiscard]] double boundary_flux(const EtaField& eta, BoundaryStencil stencil = BoundaryStencil::ghost);

[[nodiscard]] double mass(const DensityField& u);

// sum_i |eta_{i+1} - eta_i|, the L1 norm of the discrete eta'.
[[nodiscard]] double eta_variation(const EtaField& eta);

// Initial selection eta_0 in beta(u0) (midpoint of the filled interval).
[[nodiscard]] EtaField initial_eta(const DensityField& u0, const MonotoneGraph& beta);

// Largest distance of eta_i from the filled interval beta(u_i), with u_i
// widened by a relative 1e-12.
[[nodiscard]] double selection_violation(const DensityField& u, const EtaField& eta, const MonotoneGraph& beta);

// Half-line truncation so that the Gaussian tail of a heat kernel with
// diffusivity c over [0, T] beyond x_max is below `tail`.
[[nodiscard]] double auto_extent(double support_max, double growth_constant, double T, double tail = 1e-8);

}  // namespace hlpm
