#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hlpm/config.hpp"
#include "hlpm/particle.hpp"
#include "hlpm/pde.hpp"
#include "hlpm/testfn.hpp"

namespace hlpm {

enum class Pipeline { pde, particle, verify, compare, route_check, sweep };

[[nodiscard]] std::string to_string(Pipeline p);
[[nodiscard]] Pipeline parse_pipeline(const std::string& s);

enum class Bound { none, upper, lower };

struct Metric {
  std::string name;
  double value = 0.0;
  Bound bound = Bound::none;
  double limit = 0.0;
  bool passed = true;
  std::string artifact;  // file in the run directory carrying the number
};

struct Report {
  std::string pipeline;
  json config;
  std::string config_hash;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::vector<Metric> metrics;
  json sections = json::object();
  std::vector<std::string> artifacts;
  std::vector<std::string> warnings;

  Metric& add(std::string name, double value, std::string artifact = "");
  Metric& add_upper(std::string name, double value, double limit, std::string artifact = "");
  Metric& add_lower(std::string name, double value, double limit, std::string artifact = "");
  [[nodiscard]] bool passed() const;
  [[nodiscard]] const Metric* find(const std::string& name) const;
  [[nodiscard]] json to_json() const;
};

struct RunOptions {
  std::optional<std::filesystem::path> out;  // artifacts are written only when set
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
};

// Runs one pipeline. Module errors surface as StageError naming the stage.
[[nodiscard]] Report run(const ExperimentConfig& cfg, Pipeline pipeline, const RunOptions& opt = {});

// Building blocks shared with the bindings and the acceptance checks.

[[nodiscard]] PdeTrajectory solve_half_line(const ExperimentConfig& cfg, double dx, double dt);

struct RouteResult {
  std::vector<double> times;
  std::vector<double> gaps;  // L1 gap per snapshot
  double max_gap = 0.0;
  double max_asymmetry = 0.0;
  PdeTrajectory direct;
  PdeTrajectory mirror;
};

// Direct half-line solve against extend -> whole-line solve -> restrict.
[[nodiscard]] RouteResult route_equivalence(const ExperimentConfig& cfg);

// The cut-off test function phi_eps has phi_eps'(0) = 0, and
//   (1/2) int int phi_eps'' eta  ->  (1/2) phi'(0) int eta(s, 0) ds + (1/2) int int phi'' eta.
// `delta` is the distance of the left side from that limit.
struct CutoffRung {
  double eps = 0.0;
  double boundary_form = 0.0;  // boundary_form_residual of phi_eps
  double flux_term = 0.0;      // (1/2) int int phi_eps'' eta
  double delta = 0.0;
};

struct ResidualSuite {
  ResidualReport report;
  double max_generalized = 0.0;
  double max_weak = 0.0;
  double max_gap = 0.0;  // max |generalized - weak|
  double gap_constant = 0.0;  // max_gap / dx
  std::optional<double> refined_max;  // same family after halving (dx, dt)
  std::vector<CutoffRung> ladder;
  double cutoff_limit = 0.0;           // the flux term's limit
  double cutoff_reference_weak = 0.0;  // weak_residual of the uncut phi
  double cutoff_final_gap = 0.0;       // |R_bf(phi_eps_min) - R_weak(phi)|
  bool ladder_monotone = false;
};

[[nodiscard]] ResidualSuite residual_suite(const ExperimentConfig& cfg, const PdeTrajectory& traj,
                                           bool refine);

[[nodiscard]] ParticleRunConfig particle_run_config(const ExperimentConfig& cfg, unsigned threads);
[[nodiscard]] Grid1D particle_grid(const ExperimentConfig& cfg, const Grid1D& pde_grid);

}  // namespace hlpm
