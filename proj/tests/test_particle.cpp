#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "hlpm/errors.hpp"
#include "hlpm/metrics.hpp"
#include "hlpm/mirror.hpp"
#include "hlpm/particle.hpp"
#include "oracles.hpp"

using namespace hlpm;

namespace {

DensityField unit_indicator(const Grid1D& g) {
  return sample_density(g, [](double x) { return x < 1.0 ? 1.0 : 0.0; });
}

double l1(const DensityField& a, const std::function<double(double)>& f) {
  // cell averages of f by 4-point Gauss-Legendre sub-sampling
  double s = 0.0;
  const double dx = a.grid().dx();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double lo = a.grid().lower() + static_cast<double>(i) * dx;
    double avg = 0.0;
    for (int k = 0; k < 16; ++k) avg += f(lo + (k + 0.5) * dx / 16.0);
    s += std::abs(a[i] - avg / 16.0);
  }
  return s * dx;
}

std::vector<double> normal_sample(std::size_t n, std::uint64_t seed) {
  const CounterRng rng(seed);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = rng.normal(i, 0);
  return x;
}

}  // namespace

TEST(Sampling, UniformIndicatorWithinDkw) {
  const auto g = Grid1D::half_line(400, 0.01);
  const auto ens = sample_initial(unit_indicator(g), 100000, 3, Scheme::direct_reflect);
  const double d = oracle::kolmogorov(ens.positions, [](double x) { return std::clamp(x, 0.0, 1.0); });
  EXPECT_LE(d, 0.01);
  EXPECT_LE(d, oracle::dkw_radius(100000, 1e-4));
}

TEST(Sampling, FoldSchemeSignBalanceAndFold) {
  const auto g = Grid1D::half_line(400, 0.01);
  const auto ens = sample_initial(unit_indicator(g), 100000, 5, Scheme::wholeline_fold);
  const auto pos = std::count_if(ens.positions.begin(), ens.positions.end(), [](double x) { return x > 0; });
  const auto neg = static_cast<long>(ens.size()) - pos;
  EXPECT_LE(std::abs(pos - neg) / 1e5, 0.01);
  const auto folded = fold(ens);
  const double d = oracle::kolmogorov(folded.positions, [](double x) { return std::clamp(x, 0.0, 1.0); });
  EXPECT_LE(d, 0.01);
}

TEST(Sampling, RejectsEmptyEnsemble) {
  const auto g = Grid1D::half_line(100, 0.01);
  EXPECT_THROW((void)sample_initial(unit_indicator(g), 0, 1, Scheme::direct_reflect), ValidationError);
}

TEST(Fold, AbsoluteValueAndIdempotent) {
  auto ens = make_ensemble({-1.0, 2.0, -3.0}, Scheme::wholeline_fold, 1);
  const auto f = fold(ens);
  EXPECT_EQ(f.positions, (std::vector<double>{1.0, 2.0, 3.0}));
  EXPECT_EQ(fold(f).positions, f.positions);
}

TEST(Estimate, SingleCellIndicator) {
  const auto g = Grid1D::half_line(10, 0.1);
  const std::vector<double> x(50, 0.55);
  const auto d = estimate_density(x, g, {}, false);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_DOUBLE_EQ(d.field[i], i == 5 ? 1.0 / 0.1 : 0.0);
  EXPECT_NEAR(d.field.mass(), 1.0, 1e-12);
}

TEST(Estimate, SymmetrizedIsExactlyEvenWithUnitMass) {
  const auto g = Grid1D::symmetric(60, 0.05);
  const auto x = normal_sample(20000, 9);
  const auto d = estimate_density(x, g, {}, true);
  EXPECT_EQ(check_even(d.field), 0.0);
  EXPECT_NEAR(d.field.mass(), 1.0, 1e-12);
  EXPECT_THROW((void)estimate_density(x, Grid1D::half_line(10, 0.1), {}, true), ValidationError);
}

TEST(Estimate, StandardNormalHistogram) {
  const auto g = Grid1D::symmetric(120, 0.05);
  const auto d = estimate_density(normal_sample(100000, 1), g, {}, false);
  EXPECT_LE(l1(d.field, [](double x) { return oracle::gauss(x, 1.0); }), 0.05);
}

TEST(Estimate, KdeUnitMassAndBandwidthCheck) {
  const auto g = Grid1D::symmetric(120, 0.05);
  const auto x = normal_sample(100000, 2);
  const auto d = estimate_density(x, g, {EstimatorMethod::gaussian_kde, 0.1}, false);
  EXPECT_NEAR(d.field.mass(), 1.0, 1e-12);
  EXPECT_GE(d.field.min(), 0.0);
  EXPECT_LE(l1(d.field, [](double y) { return oracle::gauss(y, 1.0 + 0.01); }), 0.05);
  EXPECT_THROW((void)estimate_density(x, g, {EstimatorMethod::gaussian_kde, 0.0}, false), DomainError);
}

TEST(Estimate, FoldedNormalMatchesHalfNormal) {
  const auto g = Grid1D::half_line(100, 0.05);
  auto x = normal_sample(100000, 4);
  for (double& v : x) v = std::abs(v);
  const auto d = estimate_density(x, g, {}, false);
  EXPECT_LE(l1(d.field, [](double y) { return 2.0 * oracle::gauss(y, 1.0); }), 0.05);
}

TEST(Steps, ZeroCoefficientFreezes) {
  const auto g = Grid1D::symmetric(40, 0.1);
  auto ens = make_ensemble(normal_sample(1000, 3), Scheme::wholeline_fold, 1);
  const auto before = ens.positions;
  const auto dens = estimate_density(ens, g, {}, true);
  const auto chi0 = make_selection(phi_from_beta(graphs::zero()), SelectionPolicy::midpoint);
  em_step_wholeline(ens, chi0, dens, 1e-2);
  EXPECT_EQ(ens.positions, before);
  EXPECT_NEAR(ens.t, 1e-2, 1e-15);
}

TEST(Steps, UnitCoefficientIsBrownian) {
  const auto g = Grid1D::symmetric(40, 0.1);
  const std::size_t n = 100000;
  auto ens = make_ensemble(std::vector<double>(n, 0.0), Scheme::wholeline_fold, 17);
  const auto chi = make_selection(phi_from_beta(extend_beta(graphs::identity())), SelectionPolicy::midpoint);
  const double dt = 0.01;
  for (int k = 0; k < 10; ++k) em_step_wholeline(ens, chi, estimate_density(ens, g, {}, true), dt);
  double s2 = 0.0;
  for (double y : ens.positions) s2 += y * y;
  EXPECT_NEAR(s2 / n, 0.1, 5.0 * 0.1 * std::sqrt(2.0 / n));
}

TEST(Steps, NegatedNoiseMirrorsTheEnsemble) {
  const auto g = Grid1D::symmetric(40, 0.1);
  const auto start = normal_sample(5000, 6);
  std::vector<double> mirrored(start.size());
  std::transform(start.begin(), start.end(), mirrored.begin(), [](double x) { return -x; });
  auto a = make_ensemble(start, Scheme::wholeline_fold, 21);
  auto b = make_ensemble(mirrored, Scheme::wholeline_fold, 21, true);
  const auto chi = make_selection(extend_phi(phi_from_beta(graphs::saturating())), SelectionPolicy::midpoint);
  for (int k = 0; k < 20; ++k) {
    em_step_wholeline(a, chi, estimate_density(a, g, {}, true), 1e-2);
    em_step_wholeline(b, chi, estimate_density(b, g, {}, true), 1e-2);
  }
  for (std::size_t i = 0; i < a.size(); ++i) ASSERT_EQ(a.positions[i], -b.positions[i]) << i;
}

TEST(Steps, MirrorReflectionArithmetic) {
  const auto g = Grid1D::half_line(40, 0.1);
  const CounterRng rng(5);
  // find a particle index whose first increment is negative
  std::size_t idx = 0;
  while (rng.normal(idx, 0) >= 0.0) ++idx;
  std::vector<double> x(idx + 1, 2.0);
  x[idx] = 0.0;
  auto ens = make_ensemble(x, Scheme::direct_reflect, 5);
  const auto chi = make_selection(phi_from_beta(graphs::identity()), SelectionPolicy::midpoint);
  const double dt = 1e-2;
  reflected_step(ens, chi, estimate_density(ens, g, {}, false), dt);
  const double xi = rng.normal(idx, 0);
  EXPECT_DOUBLE_EQ(ens.positions[idx], std::sqrt(dt) * std::abs(xi));
  EXPECT_DOUBLE_EQ(ens.reflection.K[idx], 2.0 * std::sqrt(dt) * std::abs(xi));
  // particles far from 0 are not pushed
  for (std::size_t i = 0; i < idx; ++i) EXPECT_EQ(ens.reflection.K[i], 0.0);
}

TEST(Skorokhod, NeverTouchingZero) {
  const auto g = Grid1D::half_line(100, 0.1);
  auto ens = make_ensemble(std::vector<double>(100, 5.0), Scheme::direct_reflect, 1);
  const auto chi = make_selection(phi_from_beta(graphs::identity()), SelectionPolicy::midpoint);
  for (int k = 0; k < 10; ++k) reflected_step(ens, chi, estimate_density(ens, g, {}, false), 1e-3);
  const auto r = skorokhod_check(ens);
  EXPECT_EQ(r.complementarity, 0.0);
  EXPECT_EQ(r.mean_K, 0.0);
  EXPECT_TRUE(r.monotone_ok && r.nonneg_ok);
}

TEST(LocalTime, ZeroCoefficientGivesZero) {
  PathRecord p{1e-3, {{0.0, 0.001, -0.002}, {0.0, 0.001, -0.002}}, {{0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}}};
  const auto tr = estimate_local_time(p, 0.01, LocalTimeKind::symmetric);
  for (double v : tr.values) EXPECT_EQ(v, 0.0);
}

TEST(LocalTime, UndersampledFlag) {
  PathRecord p{1e-2, {{0.5}}, {{1.0}}};
  EXPECT_TRUE(estimate_local_time(p, 0.05, LocalTimeKind::symmetric).undersampled);
  EXPECT_FALSE(estimate_local_time(p, 0.5, LocalTimeKind::symmetric).undersampled);
}

TEST(ZeroSet, PinnedPathNegativeControl) {
  // a path held at 0 with chi = 1 for time t accumulates t
  const std::size_t steps = 100;
  const double dt = 1e-2;
  PathRecord p{dt, std::vector<std::vector<double>>(steps, {0.0}), std::vector<std::vector<double>>(steps, {1.0})};
  const auto z = zero_set_diagnostics(p);
  EXPECT_DOUBLE_EQ(z.zero_fraction, 1.0);
  EXPECT_NEAR(z.zero_occupation, 1.0, 1e-12);
}

TEST(Simulate, GenericRunHasNoZeroHitsAndIsSeedDeterministic) {
  const auto g = Grid1D::half_line(200, 0.025);
  ParticleRunConfig cfg;
  cfg.particles = 20000;
  cfg.dt = 1e-3;
  cfg.T = 0.05;
  cfg.seed = 99;
  cfg.scheme = Scheme::wholeline_fold;
  cfg.local_time_eps = {0.05};
  const auto a = simulate(unit_indicator(g), graphs::identity(), g.coarsened(5), cfg);
  const auto b = simulate(unit_indicator(g), graphs::identity(), g.coarsened(5), cfg);
  EXPECT_EQ(a.final_ensemble.positions, b.final_ensemble.positions);
  EXPECT_EQ(a.zero_set.zero_fraction, 0.0);
  EXPECT_EQ(a.zero_set.tiny_fraction, 0.0);
  ASSERT_EQ(a.local_times.size(), 2u);
  for (const auto& tr : a.local_times) {
    EXPECT_TRUE(std::is_sorted(tr.values.begin(), tr.values.end()));
    EXPECT_GE(tr.values.front(), 0.0);
  }
}

TEST(Simulate, ThreadCountDoesNotChangeResults) {
  const auto g = Grid1D::half_line(200, 0.025);
  ParticleRunConfig cfg;
  cfg.particles = 30000;
  cfg.dt = 1e-3;
  cfg.T = 0.02;
  cfg.seed = 4;
  cfg.local_time_eps = {0.05};
  const auto one = simulate(unit_indicator(g), graphs::saturating(), g.coarsened(5), cfg);
  cfg.threads = 4;
  const auto four = simulate(unit_indicator(g), graphs::saturating(), g.coarsened(5), cfg);
  EXPECT_EQ(one.final_ensemble.positions, four.final_ensemble.positions);
  EXPECT_EQ(one.skorokhod.complementarity, four.skorokhod.complementarity);
  EXPECT_EQ(one.local_times[0].values, four.local_times[0].values);
}

TEST(Simulate, DirectSchemeMatchesReflectedBrownianMotion) {
  const auto g = Grid1D::half_line(240, 0.025);
  ParticleRunConfig cfg;
  cfg.particles = 100000;
  cfg.dt = 1e-3;
  cfg.T = 0.2;
  cfg.seed = 12;
  const auto u0 = unit_indicator(g);
  const auto res = simulate(u0, graphs::identity(), g.coarsened(2), cfg);
  const auto& m = res.marginal_at(0.2);
  const auto exact = reflected_heat(u0, 0.2, 1.0, &m.field.grid());
  EXPECT_LE(compare_densities(m.field, exact).L1, 0.05);
  EXPECT_TRUE(res.skorokhod.monotone_ok);
  EXPECT_TRUE(res.skorokhod.nonneg_ok);
  EXPECT_LE(res.skorokhod.complementarity, 5.0 * std::sqrt(cfg.dt));
}
