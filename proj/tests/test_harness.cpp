#include <gtest/gtest.h>

#include <filesystem>

#include "hlpm/config.hpp"
#include "hlpm/errors.hpp"
#include "hlpm/harness.hpp"
#include "hlpm/io.hpp"
#include "hlpm/metrics.hpp"

using namespace hlpm;

namespace {

json small_config() {
  return json::parse(R"({
    "name": "small",
    "graph": {"name": "identity"},
    "u0": {"name": "indicator", "a": 0.0, "b": 1.0},
    "domain": {"x_max": 4.0, "dx": 0.02},
    "time": {"T": 0.1, "dt": 2e-3, "snapshots": [0.05], "stride": 5},
    "particle": {"N": 20000, "dt": 2e-3, "bin_factor": 5, "seed": 3, "local_time_eps": [0.05]},
    "verification": {"family_size": 4, "refine": false}
  })");
}

std::string config_error(json doc) {
  try {
    (void)parse_config(doc);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("hlpm_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST(Compare, IdenticalFieldsAreAtDistanceZero) {
  const auto g = Grid1D::half_line(100, 0.03);
  const auto a = sample_density(g, [](double x) { return std::exp(-x); });
  const auto d = compare_densities(a, a);
  EXPECT_EQ(d.L1, 0.0);
  EXPECT_EQ(d.W1, 0.0);
}

TEST(Compare, ShiftedIndicators) {
  const auto g = Grid1D::half_line(300, 0.01);
  const auto a = sample_density(g, [](double x) { return x < 1.0 ? 1.0 : 0.0; });
  const auto b = sample_density(g, [](double x) { return x >= 1.0 && x < 2.0 ? 1.0 : 0.0; });
  const auto ab = compare_densities(a, b);
  const auto ba = compare_densities(b, a);
  EXPECT_NEAR(ab.L1, 2.0, 1e-12);
  EXPECT_NEAR(ab.W1, 1.0, 1e-12);
  EXPECT_EQ(ab.L1, ba.L1);
  EXPECT_EQ(ab.W1, ba.W1);
}

TEST(Compare, GridMismatchNeedsResampling) {
  const auto a = sample_density(Grid1D::half_line(100, 0.02), [](double x) { return x < 1.0 ? 1.0 : 0.0; });
  const auto b = sample_density(Grid1D::half_line(50, 0.04), [](double x) { return x < 1.0 ? 1.0 : 0.0; });
  EXPECT_THROW((void)compare_densities(a, b), ValidationError);
  const auto d = compare_densities(a, b, true);
  EXPECT_NEAR(d.L1, 0.0, 1e-12);
}

TEST(Config, DefaultsAndRoundTrip) {
  const auto cfg = parse_config(small_config());
  EXPECT_EQ(cfg.particle.particles, 20000u);
  EXPECT_EQ(cfg.particle.scheme, Scheme::direct_reflect);
  const auto again = parse_config(to_json(cfg));
  EXPECT_EQ(content_hash(to_json(cfg)), content_hash(to_json(again)));
}

TEST(Config, ErrorsNameTheField) {
  auto doc = small_config();
  doc["domain"]["dx"] = 0;
  EXPECT_NE(config_error(doc).find("domain.dx"), std::string::npos);

  doc = small_config();
  doc["graph"] = {{"name", "cubic"}};
  EXPECT_NE(config_error(doc).find("graph.name"), std::string::npos);

  doc = small_config();
  doc["time"]["snapshots"] = {0.5};
  EXPECT_NE(config_error(doc).find("time.snapshots[0]"), std::string::npos);

  doc = small_config();
  doc["particle"]["estimator"] = "gaussian_kde";
  EXPECT_NE(config_error(doc).find("particle.bandwidth"), std::string::npos);

  doc = small_config();
  doc["particle"]["colour"] = "red";
  EXPECT_NE(config_error(doc).find("particle.colour"), std::string::npos);
}

TEST(Config, HashIsStableAndSensitive) {
  const auto a = to_json(parse_config(small_config()));
  EXPECT_EQ(content_hash(a), content_hash(a));
  EXPECT_EQ(content_hash(a).size(), 64u);
  auto doc = small_config();
  doc["particle"]["seed"] = 4;
  EXPECT_NE(content_hash(a), content_hash(to_json(parse_config(doc))));
}

TEST(Config, InitialCatalogHasUnitMass) {
  const auto g = Grid1D::half_line(2000, 0.005);
  for (const auto& spec : {CatalogSpec{"indicator", {{"a", 0.5}, {"b", 2.5}}},
                           CatalogSpec{"triangle", {{"center", 1.0}, {"width", 0.5}}},
                           CatalogSpec{"truncated_gaussian", {{"mean", 0.0}, {"sigma", 1.0}}}}) {
    const auto u = sample_density(g, build_initial(spec).density);
    EXPECT_NEAR(u.mass(), 1.0, 1e-6) << spec.name;
  }
}

TEST(Run, PdeReportAndArtifacts) {
  const auto dir = scratch("pde");
  const auto rep = run(parse_config(small_config()), Pipeline::pde, {dir, {}, {}});
  EXPECT_TRUE(rep.passed());
  ASSERT_NE(rep.find("pde.mass_deviation"), nullptr);
  EXPECT_LE(rep.find("pde.mass_deviation")->value, 1e-12);
  EXPECT_TRUE(std::filesystem::exists(dir / "report.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / snapshot_name("density", 0.1)));
  EXPECT_TRUE(std::filesystem::exists(dir / snapshot_name("eta", 0.05)));
  const auto cols = read_csv(dir / snapshot_name("density", 0.1));
  ASSERT_EQ(cols.size(), 2u);
  EXPECT_EQ(cols[0].values.size(), 200u);
}

TEST(Run, CompareReportsDistancesPerSnapshot) {
  const auto rep = run(parse_config(small_config()), Pipeline::compare, {});
  EXPECT_NE(rep.find("compare.particle_pde.L1[t=0.0500]"), nullptr);
  EXPECT_NE(rep.find("compare.particle_pde.L1[t=0.1000]"), nullptr);
  EXPECT_NE(rep.find("compare.scheme_l1[t=0.1000]"), nullptr);
}

TEST(Run, ReportsAreBitIdentical) {
  const auto cfg = parse_config(small_config());
  const auto a = run(cfg, Pipeline::particle, {});
  const auto b = run(cfg, Pipeline::particle, {});
  EXPECT_EQ(a.to_json().dump(), b.to_json().dump());
  const auto c = run(cfg, Pipeline::particle, {std::nullopt, 11, {}});
  EXPECT_NE(a.to_json().dump(), c.to_json().dump());
  EXPECT_EQ(c.seed, 11u);
}

TEST(Run, RouteCheckStoppedLinear) {
  auto doc = small_config();
  doc["graph"] = {{"name", "stopped_linear"}, {"u_c", 1.0}};
  doc["u0"] = {{"name", "indicator"}, {"a", 0.0}, {"b", 0.5}};
  doc["breakpoints"] = {0.5};
  const auto rep = run(parse_config(doc), Pipeline::route_check, {});
  EXPECT_TRUE(rep.passed());
  EXPECT_LE(rep.find("route.max_asymmetry")->value, 1e-12);
}

TEST(Run, VerifyWritesResiduals) {
  const auto dir = scratch("verify");
  const auto rep = run(parse_config(small_config()), Pipeline::verify, {dir, {}, {}});
  EXPECT_NE(rep.find("verify.max_weak_residual"), nullptr);
  EXPECT_TRUE(std::filesystem::exists(dir / "residuals.json"));
}

TEST(Run, SweepNeedsSweepBlock) {
  EXPECT_THROW((void)run(parse_config(small_config()), Pipeline::sweep, {}), StageError);
  auto doc = small_config();
  doc["sweep"] = {{"parameter", "k_sync"}, {"values", {1, 5}}};
  const auto rep = run(parse_config(doc), Pipeline::sweep, {});
  EXPECT_NE(rep.find("sweep[k_sync=5].L1"), nullptr);
}

TEST(Run, StageErrorsCarryTheStage) {
  auto doc = small_config();
  doc["time"]["dt"] = 0.03;  // T is not a multiple of dt
  try {
    (void)run(parse_config(doc), Pipeline::pde, {});
    FAIL() << "expected a stage error";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "pde");
  }
}
