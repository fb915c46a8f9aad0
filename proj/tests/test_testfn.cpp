#include <gtest/gtest.h>

#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "hlpm/errors.hpp"
#include "hlpm/pde.hpp"
#include "hlpm/testfn.hpp"

using namespace hlpm;

namespace {

double fd1(const ScalarFn& f, double x, double h = 1e-5) { return (f(x + h) - f(x - h)) / (2 * h); }
double fd2(const ScalarFn& f, double x, double h = 1e-4) { return (f(x + h) - 2 * f(x) + f(x - h)) / (h * h); }

PdeTrajectory linear_trajectory(double dx, double dt, double T, std::size_t stride) {
  const auto g = Grid1D::half_line(static_cast<std::size_t>(std::llround(5.0 / dx)), dx);
  const auto u0 = sample_density(g, [](double x) { return x < 1.0 ? 1.0 : 0.0; });
  SolveOptions opt;
  opt.snapshot_stride = stride;
  return solve(u0, graphs::identity(), T, dt, opt);
}

}  // namespace

TEST(Bump, AwayFromZero) {
  const auto phi = make_bump(2.0, 1.0, false);
  EXPECT_TRUE(phi.derivative_zero_at_origin);
  EXPECT_EQ(phi.f(0.0), 0.0);
  EXPECT_EQ(phi.d1(0.0), 0.0);
  EXPECT_EQ(phi.f(0.99), 0.0);
  EXPECT_GT(phi.f(2.0), 0.0);
  for (double x : {1.3, 1.8, 2.0, 2.6}) {
    EXPECT_NEAR(phi.d1(x), fd1(phi.f, x), 1e-7);
    EXPECT_NEAR(phi.d2(x), fd2(phi.f, x), 1e-5);
  }
}

TEST(Bump, FlatAtZeroAndNegativeControl) {
  const auto flat = make_bump(0.5, 1.0, true);
  EXPECT_TRUE(flat.derivative_zero_at_origin);
  EXPECT_EQ(flat.d1(0.0), 0.0);
  EXPECT_GT(flat.f(0.0), 0.0);
  EXPECT_EQ(flat.f(1.5), 0.0);
  for (double x : {0.1, 0.7, 1.2}) {
    EXPECT_NEAR(flat.d1(x), fd1(flat.f, x), 1e-7);
    EXPECT_NEAR(flat.d2(x), fd2(flat.f, x), 1e-5);
  }
  const auto plain = make_bump(0.5, 1.0, false);
  EXPECT_FALSE(plain.derivative_zero_at_origin);
  EXPECT_GT(std::abs(plain.d1(0.0)), 0.1);
  EXPECT_THROW((void)make_bump(1.0, 0.0, false), ValidationError);
}

TEST(Cutoff, InactiveAwayFromZero) {
  const auto phi = make_bump(3.5, 0.5, false);
  const auto cut = cutoff_transform(phi, 0.5);
  for (double x : {0.0, 0.3, 2.0, 3.2, 3.5, 3.9}) EXPECT_NEAR(cut.f(x), phi.f(x), 1e-14) << x;
}

TEST(Cutoff, FlatAtZeroAndEqualBeyondTwoEps) {
  const auto phi = make_bump(0.5, 1.0, false);
  const double eps = 0.1;
  const auto cut = cutoff_transform(phi, eps);
  EXPECT_TRUE(cut.derivative_zero_at_origin);
  EXPECT_EQ(cut.d1(0.0), 0.0);
  EXPECT_EQ(cut.d1(0.5 * eps), 0.0);
  for (double x : {0.2, 0.5, 1.2}) EXPECT_NEAR(cut.f(x), phi.f(x), 1e-12);
  // phi_eps is continuous at 2 eps and its derivative matches chi phi'
  EXPECT_NEAR(cut.f(2 * eps - 1e-9), cut.f(2 * eps), 1e-8);
  for (double x : {0.05, 0.12, 0.17}) EXPECT_NEAR(cut.d1(x), fd1(cut.f, x, 1e-6), 1e-6);
}

TEST(Cutoff, UniformBound) {
  const auto phi = make_bump(0.5, 1.0, false);
  using Q = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double tv = Q::integrate([&](double y) { return std::abs(phi.d1(y)); }, 0.0, 1.5, 10, 1e-12);
  double sup_c = 0.0;
  for (double eps : {0.4, 0.2, 0.1, 0.05}) {
    const auto cut = cutoff_transform(phi, eps);
    sup_c = std::max(sup_c, std::abs(cut.f(0.0) - phi.f(0.0)));
  }
  for (double eps : {0.4, 0.2, 0.1, 0.05}) {
    const auto cut = cutoff_transform(phi, eps);
    for (double x = 0.0; x < 1.6; x += 0.01) EXPECT_LE(std::abs(cut.f(x)), tv + phi.f(0.0) + sup_c + 1e-12);
  }
}

TEST(Mollifier, UnitMass) {
  using Q = boost::math::quadrature::gauss_kronrod<double, 61>;
  for (double eps : {1.0, 0.3, 0.05}) {
    const double m = Q::integrate([&](double x) { return mollifier(x, eps); }, -eps, eps, 10, 1e-14);
    EXPECT_NEAR(m, 1.0, 1e-12);
  }
}

TEST(Mollifier, EvenPreservesIntegralAndConverges) {
  const auto phi_bar = even_extension(make_bump(0.0, 1.0, false));
  using Q = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double base = Q::integrate(phi_bar.f, -1.0, 1.0, 12, 1e-14);
  double prev = INFINITY;
  for (double eps : {0.2, 0.1, 0.05}) {
    const auto m = mollify_even(phi_bar, eps);
    for (double x : {0.0, 0.13, 0.5, 0.91}) EXPECT_NEAR(m.f(x), m.f(-x), 1e-12);
    const double mass = Q::integrate(m.f, -1.0 - eps, 0.0, 10, 1e-14) + Q::integrate(m.f, 0.0, 1.0 + eps, 10, 1e-14);
    EXPECT_NEAR(mass, base, 1e-12);
    double sup = 0.0;
    for (double x = -1.2; x <= 1.2; x += 0.01) sup = std::max(sup, std::abs(m.f(x) - phi_bar.f(x)));
    EXPECT_LT(sup, prev);
    prev = sup;
    // (phi_bar_eps)'' = (phi_bar'')_eps on R+
    for (double x : {0.3, 0.6}) EXPECT_NEAR(m.d2(x), fd2(m.f, x, 1e-3), 1e-4);
  }
}

TEST(Residuals, StaticTrajectoryIsExactForAllForms) {
  const auto g = Grid1D::half_line(100, 0.02);
  const auto u0 = sample_density(g, [](double x) { return x < 1.0 ? 1.0 : 0.0; });
  SolveOptions opt;
  opt.snapshot_stride = 5;
  opt.breakpoints = std::vector<double>{1.0};
  const auto traj = solve(u0, graphs::zero(), 0.1, 1e-3, opt);
  const auto phi0 = make_bump(0.5, 0.4, true);
  const auto phi1 = make_bump(0.5, 1.0, false);
  EXPECT_EQ(generalized_residual(traj, phi0, 0.1), 0.0);
  EXPECT_EQ(weak_residual(traj, phi0, 0.1), 0.0);
  EXPECT_EQ(boundary_form_residual(traj, phi1, 0.1), 0.0);
}

TEST(Residuals, GeneralizedNeedsFlatTestFunction) {
  const auto traj = linear_trajectory(0.05, 1e-2, 0.1, 1);
  EXPECT_THROW((void)generalized_residual(traj, make_bump(0.5, 1.0, false), 0.1), DomainError);
}

TEST(Residuals, BoundaryFormCoincidesWithGeneralizedWhenFlat) {
  const auto traj = linear_trajectory(0.02, 2e-3, 0.2, 5);
  const auto phi = make_bump(0.3, 1.0, true);
  EXPECT_EQ(boundary_form_residual(traj, phi, 0.2), generalized_residual(traj, phi, 0.2));
}

TEST(Residuals, SmallAndConvergentOnLinearTrajectory) {
  const auto fam = default_family(12, 2.5);
  const auto coarse = evaluate_residuals(linear_trajectory(0.02, 2e-3, 0.2, 5), fam, {0.1, 0.2});
  const auto fine = evaluate_residuals(linear_trajectory(0.01, 1e-3, 0.2, 5), fam, {0.1, 0.2});
  for (auto form : {ResidualForm::generalized, ResidualForm::weak, ResidualForm::boundary_corrected}) {
    EXPECT_LE(coarse.max_abs(form), 5e-2);
    EXPECT_GE(coarse.max_abs(form) / fine.max_abs(form), 1.5) << to_string(form);
  }
}

TEST(Residuals, GeneralizedWeakGapScalesWithDx) {
  const auto phi = make_bump(0.4, 1.2, true);
  double prev_c = 0.0;
  for (double dx : {0.04, 0.02}) {
    const auto traj = linear_trajectory(dx, 2e-3, 0.2, 5);
    const double gap = std::abs(generalized_residual(traj, phi, 0.2) - weak_residual(traj, phi, 0.2));
    const double c = gap / dx;
    EXPECT_LT(c, 1.0);
    if (prev_c > 0.0) EXPECT_LE(c, 2.0 * prev_c);
    prev_c = c;
  }
}

TEST(Residuals, BoundaryFormSmallForNonFlatTestFunction) {
  const auto traj = linear_trajectory(0.01, 1e-3, 0.2, 5);
  const auto phi = make_bump(0.5, 1.0, false);
  EXPECT_LE(std::abs(boundary_form_residual(traj, phi, 0.2)), 5e-3);
  EXPECT_LE(std::abs(weak_residual(traj, phi, 0.2)), 5e-3);
  // without the boundary term the identity fails at O(1)
  auto forced = phi;
  forced.derivative_zero_at_origin = true;
  EXPECT_GT(std::abs(generalized_residual(traj, forced, 0.2)), 1e-2);
}
