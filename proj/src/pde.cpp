#include "hlpm/pde.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <boost/math/distributions/normal.hpp>

#include "hlpm/assumptions.hpp"
#include "hlpm/errors.hpp"
#include "hlpm/mirror.hpp"

namespace hlpm {

ImplicitStepper::ImplicitStepper(const Grid1D& grid, MonotoneGraph beta, double dt, SolverOptions opt)
    : grid_(grid), beta_(std::move(beta)), dt_(dt), opt_(opt) {
  if (!(dt > 0.0)) throw DomainError("time step dt must be positive");
  const std::size_t n = grid_.size();
  r_ = dt_ / (2.0 * grid_.dx() * grid_.dx());
  deg_.assign(n, 2);
  if (n == 1) {
    deg_[0] = 0;
  } else {
    deg_.front() = 1;
    deg_.back() = 1;
  }
  mu_.resize(n);
  for (std::size_t i = 0; i < n; ++i) mu_[i] = r_ * deg_[i];
  y_.assign(n, 0.0);
  u_.assign(n, 0.0);
  eta_.assign(n, 0.0);
  slope_.assign(n, 0.0);
}

double ImplicitStepper::neighbour_sum(std::size_t i) const {
  double s = 0.0;
  if (i > 0) s += eta_[i - 1];
  if (i + 1 < eta_.size()) s += eta_[i + 1];
  return s;
}

void ImplicitStepper::evaluate(std::span<const double> y) {
  for (std::size_t i = 0; i < y.size(); ++i) {
    const Resolvent res = beta_.resolvent(mu_[i], std::max(y[i], 0.0));
    u_[i] = res.u;
    eta_[i] = res.eta;
    slope_[i] = beta_.yosida_slope(mu_[i], res);
  }
}

double ImplicitStepper::residual(std::span<const double> b, std::vector<double>& f) const {
  double m = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    f[i] = u_[i] + mu_[i] * eta_[i] - b[i] - r_ * neighbour_sum(i);
    m = std::max(m, std::abs(f[i]));
  }
  return m;
}

// Semismooth Newton on F(y) = y - b - r N eta(y), eta the Yosida map of beta.
// The Jacobian I - r N D is tridiagonal with column sums >= 0.
bool ImplicitStepper::newton_solve(std::span<const double> b, StepStats& stats) {
  const std::size_t n = b.size();
  std::vector<double> f(n), delta(n), diag(n), rhs(n), trial(n);
  const double scale = std::max(1.0, *std::max_element(b.begin(), b.end()));
  const double target = 1e-14 * scale;

  evaluate(y_);
  double res = residual(b, f);
  for (int it = 0; it < opt_.max_newton && res > target; ++it) {
    // Thomas algorithm: sub/super diagonals are -r * slope of the neighbour
    for (std::size_t i = 0; i < n; ++i) {
      diag[i] = 1.0;
      rhs[i] = -f[i];
    }
    for (std::size_t i = 1; i < n; ++i) {
      const double lower = -r_ * slope_[i - 1];
      const double upper_prev = -r_ * slope_[i];
      const double w = lower / diag[i - 1];
      diag[i] -= w * upper_prev;
      rhs[i] -= w * rhs[i - 1];
      if (!(std::abs(diag[i]) > 1e-14)) return false;
    }
    delta[n - 1] = rhs[n - 1] / diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) {
      delta[i] = (rhs[i] + r_ * slope_[i + 1] * delta[i + 1]) / diag[i];
    }

    bool accepted = false;
    for (double alpha = 1.0; alpha >= 1.0 / 32.0; alpha *= 0.5) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = std::max(y_[i] + alpha * delta[i], 0.0);
      evaluate(trial);
      const double r_try = residual(b, f);
      if (r_try < res) {
        y_.swap(trial);
        res = r_try;
        accepted = true;
        break;
      }
    }
    ++stats.newton_iterations;
    if (!accepted) {
      evaluate(y_);
      residual(b, f);
      break;
    }
  }
  stats.residual = res;
  return true;
}

double ImplicitStepper::gauss_seidel_sweep(std::span<const double> b) {
  double update = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    y_[i] = std::max(b[i] + r_ * neighbour_sum(i), 0.0);
    const Resolvent res = beta_.resolvent(mu_[i], y_[i]);
    update = std::max(update, std::abs(res.u - u_[i]));
    u_[i] = res.u;
    eta_[i] = res.eta;
  }
  return update;
}

StepStats ImplicitStepper::step(std::vector<double>& u, std::vector<double>& eta) {
  const std::size_t n = grid_.size();
  if (u.size() != n) throw ValidationError("state size does not match the grid");
  StepStats stats;
  eta.resize(n);
  if (n == 1) {
    eta[0] = beta_.eval(std::max(u[0], 0.0)).mid();
    return stats;
  }
  const std::vector<double> b = u;

  if (!warm_) {
    for (std::size_t i = 0; i < n; ++i) {
      y_[i] = b[i] + mu_[i] * beta_.eval(std::max(b[i], 0.0)).lo;
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) y_[i] = std::max(b[i], 0.0) + mu_[i] * eta_[i];
  }

  bool newton_ok = false;
  if (opt_.newton) newton_ok = newton_solve(b, stats);
  if (!newton_ok) evaluate(y_);

  std::vector<double> f(n);
  double res = residual(b, f);
  while (res > opt_.residual_tolerance) {
    if (stats.sweeps >= opt_.max_sweeps) {
      std::ostringstream os;
      os << "implicit step did not converge after " << stats.sweeps << " sweeps, residual " << res;
      throw NumericalError(os.str());
    }
    const double update = gauss_seidel_sweep(b);
    ++stats.sweeps;
    res = residual(b, f);
    if (update < opt_.sweep_tolerance) break;
  }
  stats.residual = res;

  // flux form: the update telescopes, so mass changes only by round-off
  for (std::size_t i = 0; i < n; ++i) {
    u[i] = b[i] + r_ * (neighbour_sum(i) - deg_[i] * eta_[i]);
    eta[i] = eta_[i];
    if (u[i] < -opt_.positivity_tolerance) {
      std::ostringstream os;
      os << "scheme fault: negative density " << u[i] << " in cell " << i;
      throw NumericalError(os.str());
    }
  }
  warm_ = true;
  return stats;
}

StepResult step_implicit(const DensityField& u_n, const MonotoneGraph& beta, double dt, const SolverOptions& opt) {
  ImplicitStepper stepper(u_n.grid(), beta, dt, opt);
  std::vector<double> u(u_n.values().begin(), u_n.values().end());
  std::vector<double> eta;
  const StepStats stats = stepper.step(u, eta);
  const double t = u_n.t() + dt;
  return {DensityField(u_n.grid(), std::move(u), t), EtaField{u_n.grid(), std::move(eta), t}, stats};
}

const Snapshot& PdeTrajectory::at_time(double t, double tol) const {
  for (const auto& s : snapshots) {
    if (std::abs(s.u.t() - t) <= tol) return s;
  }
  std::ostringstream os;
  os << "no snapshot at t = " << t;
  throw ValidationError(os.str());
}

std::vector<double> PdeTrajectory::times() const {
  std::vector<double> t;
  for (const auto& s : snapshots) t.push_back(s.u.t());
  return t;
}

EtaField initial_eta(const DensityField& u0, const MonotoneGraph& beta) {
  std::vector<double> e(u0.size());
  for (std::size_t i = 0; i < u0.size(); ++i) e[i] = beta.eval(std::max(u0[i], 0.0)).mid();
  return {u0.grid(), std::move(e), u0.t()};
}

double eta_variation(const EtaField& eta) {
  double v = 0.0;
  for (std::size_t i = 1; i < eta.values.size(); ++i) v += std::abs(eta.values[i] - eta.values[i - 1]);
  return v;
}

double selection_violation(const DensityField& u, const EtaField& eta, const MonotoneGraph& beta) {
  double worst = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    // u comes out of the flux update with rounding, so a value sitting on a
    // jump may land a few ulps to either side
    const double ui = std::max(u[i], 0.0);
    const double tau = 1e-12 * std::max(1.0, ui);
    const double lo = beta.eval(std::max(ui - tau, 0.0)).lo;
    const double hi = beta.eval(ui + tau).hi;
    const double e = eta.values[i];
    worst = std::max({worst, lo - e, e - hi});
  }
  return worst;
}

PdeTrajectory solve(const DensityField& u0, const MonotoneGraph& beta, double T, double dt, const SolveOptions& opt) {
  if (!(T > 0.0)) throw ValidationError("horizon T must be positive");
  if (!(dt > 0.0)) throw ValidationError("time step dt must be positive");
  if (!opt.skip_assumption_check) {
    const auto report = validate_assumptions(beta, u0, opt.breakpoints);
    if (!report.passed()) throw ValidationError("assumptions not satisfied:\n" + report.summary());
  }
  const double steps_real = T / dt;
  const auto steps = static_cast<std::size_t>(std::llround(steps_real));
  if (steps == 0 || std::abs(steps_real - static_cast<double>(steps)) > 1e-6 * steps_real) {
    throw ValidationError("T must be an integer multiple of dt");
  }

  std::set<std::size_t> snap_steps{0, steps};
  for (double ts : opt.snapshot_times) {
    if (ts < -1e-12 || ts > T + 1e-12) throw ValidationError("snapshot times must lie in [0, T]");
    snap_steps.insert(static_cast<std::size_t>(std::llround(ts / dt)));
  }
  if (opt.snapshot_stride > 0) {
    for (std::size_t k = 0; k <= steps; k += opt.snapshot_stride) snap_steps.insert(k);
  }

  PdeTrajectory traj;
  traj.graph_name = beta.name();
  traj.dx = u0.grid().dx();
  traj.dt = dt;
  traj.steps = steps;
  traj.initial_mass = u0.mass();
  traj.min_value = u0.min();
  const bool symmetric = u0.grid().kind() == GridKind::symmetric_whole_line;
  const bool even_data = symmetric && check_even(u0) <= 1e-14;

  EtaField eta0 = initial_eta(u0, beta);
  traj.snapshots.push_back({u0, eta0});
  if (symmetric) traj.max_asymmetry = check_even(u0);

  ImplicitStepper stepper(u0.grid(), beta, dt, opt.solver);
  std::vector<double> u(u0.values().begin(), u0.values().end());
  std::vector<double> eta;
  const double dx = u0.grid().dx();
  for (std::size_t k = 1; k <= steps; ++k) {
    traj.step_stats.push_back(stepper.step(u, eta));
    const double t = static_cast<double>(k) * dt;
    traj.max_mass_deviation = std::max(traj.max_mass_deviation, std::abs(midpoint_integral(u, dx) - traj.initial_mass));
    traj.min_value = std::min(traj.min_value, *std::min_element(u.begin(), u.end()));
    if (symmetric) {
      const double a = asymmetry(u0.grid(), u);
      traj.max_asymmetry = std::max(traj.max_asymmetry, a);
      if (even_data && a > opt.solver.evenness_tolerance) {
        std::ostringstream os;
        os << "whole-line evolution lost evenness at t = " << t << " (asymmetry " << a << ")";
        throw EvennessError(os.str());
      }
    }
    DensityField uf(u0.grid(), u, t);
    EtaField ef{u0.grid(), eta, t};
    traj.max_selection_violation = std::max(traj.max_selection_violation, selection_violation(uf, ef, beta));
    if (snap_steps.count(k)) traj.snapshots.push_back({std::move(uf), std::move(ef)});
  }
  return traj;
}

double boundary_flux(const EtaField& eta, BoundaryStencil stencil) {
  if (eta.grid.kind() != GridKind::half_line) {
    throw ValidationError("boundary_flux needs a half-line field (a whole-line field has no boundary face)");
  }
  const double dx = eta.grid.dx();
  if (stencil == BoundaryStencil::ghost) {
    const double ghost = eta.values[0];
    return 0.5 * (eta.values[0] - ghost) / dx;
  }
  if (eta.values.size() < 2) return 0.0;
  return 0.5 * (eta.values[1] - eta.values[0]) / dx;
}

double mass(const DensityField& u) { return u.mass(); }

double auto_extent(double support_max, double growth_constant, double T, double tail) {
  const boost::math::normal standard;
  const double z = boost::math::quantile(boost::math::complement(standard, tail));
  return support_max + z * std::sqrt(growth_constant * T);
}

}  // namespace hlpm
