#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hlpm/assumptions.hpp"
#include "hlpm/errors.hpp"
#include "hlpm/monotone_graph.hpp"
#include "oracles.hpp"

using namespace hlpm;

TEST(Graph, EvalIdentityAndFlat) {
  const auto id = graphs::identity();
  EXPECT_EQ(id.eval(3.0).lo, 3.0);
  EXPECT_EQ(id.eval(3.0).hi, 3.0);
  const auto stop = graphs::stopped_linear(1.0);
  const auto v = stop.eval(0.5);
  EXPECT_EQ(v.lo, 0.0);
  EXPECT_EQ(v.hi, 0.0);
}

TEST(Graph, EvalFillsJump) {
  const auto g = graphs::jump(1.0, 1.0, 2.0);
  const auto v = g.eval(1.0);
  EXPECT_DOUBLE_EQ(v.lo, 1.0);
  EXPECT_DOUBLE_EQ(v.hi, 2.0);
  ASSERT_EQ(g.jumps().size(), 1u);
  EXPECT_DOUBLE_EQ(g.jumps()[0].x, 1.0);
}

TEST(Graph, EvalRejectsNegative) { EXPECT_THROW((void)graphs::identity().eval(-1e-3), DomainError); }

TEST(Graph, ConstructorRejectsNonMonotone) {
  std::vector<Segment> segs{{0.0, INFINITY, [](double u) { return std::sin(u); }, {}, false}};
  EXPECT_THROW(MonotoneGraph("bad", segs, 1.0), ValidationError);
}

TEST(Resolvent, SpecCases) {
  auto r = graphs::identity().resolvent(1.0, 2.0);
  EXPECT_NEAR(r.u, 1.0, 1e-12);
  EXPECT_NEAR(r.eta, 1.0, 1e-12);

  r = graphs::zero().resolvent(3.0, 5.0);
  EXPECT_NEAR(r.u, 5.0, 1e-12);
  EXPECT_NEAR(r.eta, 0.0, 1e-12);

  r = graphs::jump(1.0, 1.0, 2.0).resolvent(1.0, 2.5);
  const auto ref = oracle::resolvent_bisect({1.0, 1.0, 2.0}, 1.0, 2.5);
  EXPECT_NEAR(r.u, ref.first, 1e-10);
  EXPECT_NEAR(r.eta, ref.second, 1e-10);
  EXPECT_NEAR(r.u, 1.0, 1e-12);
  EXPECT_NEAR(r.eta, 1.5, 1e-12);
}

TEST(Resolvent, ConsistencyAndMonotonicityOnRandomGrid) {
  const std::vector<MonotoneGraph> gs{graphs::identity(), graphs::saturating(), graphs::stopped_linear(1.0),
                                      graphs::jump(0.7, 0.3, 2.0), graphs::table({0.0, 0.5, 0.5, 2.0}, {0.0, 0.5, 1.5, 2.5})};
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> mu_d(1e-3, 50.0), y_d(0.0, 20.0);
  for (const auto& g : gs) {
    for (int k = 0; k < 300; ++k) {
      const double mu = mu_d(gen);
      const double y1 = y_d(gen);
      const double y2 = y1 + y_d(gen) * 0.01;
      const auto a = g.resolvent(mu, y1);
      const auto b = g.resolvent(mu, y2);
      EXPECT_NEAR(a.u + mu * a.eta, y1, 1e-12 * std::max(1.0, y1)) << g.name();
      EXPECT_TRUE(g.eval(a.u).contains(a.eta, 1e-10)) << g.name() << " u=" << a.u << " eta=" << a.eta;
      EXPECT_LE(a.u, b.u + 1e-14) << g.name();
    }
  }
}

TEST(Resolvent, JumpGraphMatchesBisectionOracle) {
  const auto g = graphs::jump(0.8, 0.4, 3.0);
  for (double mu : {0.1, 1.0, 7.0}) {
    for (double y = 0.0; y < 30.0; y += 0.37) {
      const auto r = g.resolvent(mu, y);
      const auto ref = oracle::resolvent_bisect({0.8, 0.4, 3.0}, mu, y);
      EXPECT_NEAR(r.u, ref.first, 1e-9);
      EXPECT_NEAR(r.eta, ref.second, 1e-8);
    }
  }
}

TEST(Phi, FromBetaExamples) {
  const auto p_id = phi_from_beta(graphs::identity());
  EXPECT_NEAR(p_id.eval(2.0).mid(), 1.0, 1e-14);
  EXPECT_NEAR(p_id.value_at_zero().lo, 1.0, 1e-12);
  EXPECT_NEAR(p_id.value_at_zero().hi, 1.0, 1e-12);

  const auto p_sat = phi_from_beta(graphs::saturating());
  for (double u : {1e-3, 0.1, 1.0, 7.5}) {
    EXPECT_NEAR(p_sat.eval(u).mid(), std::sqrt(u / (1.0 + u)), 1e-14);
    EXPECT_NEAR(p_sat.eval(u).mid(), std::sqrt((u * u / (1.0 + u)) / u), 1e-14);
  }
  EXPECT_EQ(p_sat.value_at_zero().hi, 0.0);

  const auto p_stop = phi_from_beta(graphs::stopped_linear(1.0));
  EXPECT_EQ(p_stop.eval(0.5).hi, 0.0);
  EXPECT_NEAR(p_stop.eval(3.0).mid(), std::sqrt(2.0 / 3.0), 1e-14);
  EXPECT_EQ(p_stop.value_at_zero().hi, 0.0);
}

TEST(Phi, RoundTripAtContinuityPoints) {
  for (const auto& g : {graphs::identity(), graphs::saturating(), graphs::stopped_linear(0.4),
                        graphs::jump(1.0, 1.0, 4.0)}) {
    const auto phi = phi_from_beta(g);
    for (double u = 0.013; u < 12.0; u *= 1.37) {
      if (std::abs(u - 1.0) < 1e-9) continue;
      const double p = phi.eval(u).mid();
      EXPECT_NEAR(p * p * u, g.eval(u).mid(), 1e-10 * std::max(1.0, u)) << g.name() << " u=" << u;
    }
  }
}

TEST(Classify, SpecExamples) {
  const auto c_id = classify(graphs::identity());
  ASSERT_TRUE(std::holds_alternative<NonDegenerate>(c_id));
  EXPECT_NEAR(std::get<NonDegenerate>(c_id).c0, 1.0, 1e-12);
  EXPECT_TRUE(std::holds_alternative<Degenerate>(classify(graphs::saturating())));
  const auto c_st = classify(graphs::stopped_linear(1.0));
  ASSERT_TRUE(std::holds_alternative<StrictlyIncreasingAfterZero>(c_st));
  EXPECT_NEAR(std::get<StrictlyIncreasingAfterZero>(c_st).u_c, 1.0, 1e-12);
}

TEST(Classify, StableUnderRefinement) {
  GraphCheckOptions fine;
  fine.levels = 120;
  fine.per_segment = 128;
  for (const auto& g : {graphs::identity(), graphs::saturating(), graphs::stopped_linear(0.3),
                        graphs::jump(1.0, 1.0, 2.0), graphs::zero()}) {
    EXPECT_EQ(classify(g).index(), classify(g, fine).index()) << g.name();
  }
}

TEST(Assumptions, Examples) {
  const auto grid = Grid1D::half_line(400, 0.01);
  const auto ind = sample_density(grid, [](double x) { return x < 1.0 ? 1.0 : 0.0; });
  EXPECT_TRUE(validate_assumptions(graphs::identity(), ind).passed());

  const auto heavy = sample_density(grid, [](double x) { return x < 1.0 ? 2.0 : 0.0; });
  const auto r2 = validate_assumptions(graphs::identity(), heavy);
  EXPECT_FALSE(r2.passed());
  ASSERT_NE(r2.find("unit mass"), nullptr);
  EXPECT_FALSE(r2.find("unit mass")->passed);

  const auto r3 = validate_assumptions(graphs::power(2.0), ind);
  ASSERT_NE(r3.find("|beta(u)| <= c u"), nullptr);
  EXPECT_FALSE(r3.find("|beta(u)| <= c u")->passed);
}

TEST(Assumptions, DegenerateNeedsDeclaredBreakpoints) {
  const auto grid = Grid1D::half_line(400, 0.01);
  const auto ind = sample_density(grid, [](double x) { return x < 1.0 ? 1.0 : 0.0; });
  EXPECT_FALSE(validate_assumptions(graphs::saturating(), ind).passed());
  EXPECT_TRUE(validate_assumptions(graphs::saturating(), ind, std::vector<double>{1.0}).passed());
}

TEST(Selection, Policies) {
  const auto phi = phi_from_beta(graphs::jump(1.0, 1.0, 4.0));  // Phi jumps from 1 to 2 at u = 1
  EXPECT_NEAR(make_selection(phi, SelectionPolicy::midpoint)(1.0), 1.5, 1e-14);
  EXPECT_NEAR(make_selection(phi, SelectionPolicy::left_limit)(1.0), 1.0, 1e-14);
  EXPECT_NEAR(make_selection(phi, SelectionPolicy::right_limit)(1.0), 2.0, 1e-14);
  for (auto p : {SelectionPolicy::left_limit, SelectionPolicy::right_limit, SelectionPolicy::midpoint}) {
    EXPECT_NEAR(make_selection(phi, p)(0.5), 1.0, 1e-14);
  }
  const auto s = make_selection(graphs::stopped_linear(1.0), SelectionPolicy::right_limit);
  EXPECT_EQ(s(1.0), 0.0);
}

TEST(Selection, StaysInsideFilledGraph) {
  const auto g = graphs::table({0.0, 0.5, 0.5, 1.0, 1.0}, {0.0, 0.2, 0.9, 1.0, 2.0});
  const auto phi = phi_from_beta(g);
  for (auto p : {SelectionPolicy::left_limit, SelectionPolicy::right_limit, SelectionPolicy::midpoint}) {
    const auto sb = make_selection(g, p);
    const auto sp = make_selection(phi, p);
    for (double u = 0.0; u < 3.0; u += 0.0625) {
      EXPECT_TRUE(g.eval(u).contains(sb(u), 1e-14)) << u;
      EXPECT_TRUE((u == 0.0 ? phi.value_at_zero() : phi.eval(u)).contains(sp(u), 1e-14)) << u;
    }
  }
}
