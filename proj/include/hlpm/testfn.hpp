#pragma once

#include <string>
#include <vector>

#include "hlpm/monotone_graph.hpp"
#include "hlpm/pde.hpp"

namespace hlpm {

// Compactly supported test function with closed-form derivatives.
struct TestFunction {
  std::string id;
  ScalarFn f;
  ScalarFn d1;
  ScalarFn d2;
  double support_lo = 0.0;
  double support_hi = 0.0;
  bool derivative_zero_at_origin = false;
};

// exp(-1 / (1 - y^2)) on (-1, 1) mapped to [center - radius, center + radius].
// With flat_at_zero and a support reaching x = 0 the bump is composed with a
// quadratic in x, which makes phi'(0) = 0 while keeping the right end of the
// support at center + radius.
[[nodiscard]] TestFunction make_bump(double center, double radius, bool flat_at_zero);

// phi = value on [0, until], smooth quintic decay to 0 on [until, until + width].
[[nodiscard]] TestFunction make_plateau(double value, double until, double width);

// Smooth ramp: 0 on [0, eps], 1 on [2 eps, inf), quintic smoothstep between.
double cutoff_ramp(double x, double eps);
double cutoff_ramp_d1(double x, double eps);

// phi_eps(x) = int_0^x chi_eps phi' + phi(0) + c(eps),  c(eps) = int (1 - chi_eps) phi'.
[[nodiscard]] TestFunction cutoff_transform(const TestFunction& phi, double eps);

// phi_bar(x) = phi(|x|) on R.
[[nodiscard]] TestFunction even_extension(const TestFunction& phi);

// Standard mollifier rho(x) = exp(-1/(1-x^2)) / Z on (-1, 1), rho_eps(x) = rho(x/eps)/eps.
double mollifier(double x, double eps);

// rho_eps * phi_bar, evaluated by adaptive Gauss-Kronrod quadrature.
[[nodiscard]] TestFunction mollify_even(const TestFunction& phi_bar, double eps);

enum class ResidualForm { generalized, weak, boundary_corrected };
[[nodiscard]] std::string to_string(ResidualForm f);

// int phi u(t) - int phi u0 - (1/2) int_0^t int phi'' eta.  Needs phi'(0) = 0.
[[nodiscard]] double generalized_residual(const PdeTrajectory& traj, const TestFunction& phi, double t);

// int phi u(t) - int phi u0 + (1/2) int_0^t int phi' eta'.
[[nodiscard]] double weak_residual(const PdeTrajectory& traj, const TestFunction& phi, double t);

// int phi u(t) - int phi u0 - (1/2) int_0^t phi'(0) eta(s, 0) ds - (1/2) int_0^t int phi'' eta.
[[nodiscard]] double boundary_form_residual(const PdeTrajectory& traj, const TestFunction& phi, double t);

// int phi u(t) - int phi u0, the left-hand side shared by all three forms.
[[nodiscard]] double state_change(const PdeTrajectory& traj, const TestFunction& phi, double t);

struct ResidualEntry {
  ResidualForm form = ResidualForm::generalized;
  std::string phi_id;
  double t = 0.0;
  double value = 0.0;
  double dx = 0.0;
  double dt = 0.0;
};

struct ResidualReport {
  std::vector<ResidualEntry> entries;

  [[nodiscard]] double max_abs(ResidualForm form) const;
};

[[nodiscard]] ResidualReport evaluate_residuals(const PdeTrajectory& traj, const std::vector<TestFunction>& family,
                                                const std::vector<double>& times);

// Default family of `count` bumps with phi'(0) = 0 spread over [0, reach].
[[nodiscard]] std::vector<TestFunction> default_family(std::size_t count, double reach);

}  // namespace hlpm
