#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "hlpm/grid.hpp"
#include "hlpm/monotone_graph.hpp"
#include "hlpm/particle.hpp"
#include "hlpm/pde.hpp"

namespace hlpm {

using json = nlohmann::json;

// Catalog entry plus its parameters, e.g. {"name": "jump", "a": 1, "lo": 1, "hi": 2}.
struct CatalogSpec {
  std::string name;
  json params = json::object();
};

struct DomainSpec {
  double x_max = 6.0;  // 0 picks a Gaussian-tail extent from the data and T
  double dx = 2.5e-3;
};

struct TimeSpec {
  double T = 0.5;
  double dt = 1e-4;
  std::vector<double> snapshots;
  std::size_t stride = 10;  // residual quadrature snapshots every k steps
};

struct ParticleSpec {
  std::size_t particles = 100000;
  double dt = 1e-3;
  double T = 0.0;  // 0 means time.T
  Scheme scheme = Scheme::direct_reflect;
  EstimatorSpec estimator;
  std::size_t bin_factor = 20;  // histogram bin = bin_factor PDE cells
  std::size_t k_sync = 1;
  std::uint64_t seed = 1;
  std::vector<double> local_time_eps;
  SelectionPolicy policy = SelectionPolicy::midpoint;
};

struct VerificationSpec {
  std::size_t family_size = 12;
  double reach = 0.0;  // 0 means half the domain
  std::vector<double> eps_ladder{0.2, 0.1, 0.05};
  bool refine = true;
};

struct Tolerances {
  double mass = 1e-10;
  double positivity = 1e-10;
  double evenness = 1e-12;
  double route_gap = 1e-6;
  double residual = 5e-2;
  double residual_rate = 1.5;
  double cutoff_floor_factor = 10.0;
  double pde_exact_l1 = 1e-2;
  double particle_pde_l1 = 0.05;
  double particle_exact_l1 = 0.05;
  double scheme_l1 = 0.05;
  double skorokhod_factor = 5.0;
  double local_time_rel = 0.10;
  double local_time_ratio_lo = 0.45;
  double local_time_ratio_hi = 0.55;
};

struct SweepSpec {
  std::string parameter;  // particles | dt | k_sync | bandwidth | bin_factor | seed
  std::vector<double> values;
};

struct ExperimentConfig {
  std::string name = "experiment";
  CatalogSpec graph{"identity"};
  CatalogSpec u0{"indicator", json{{"a", 0.0}, {"b", 1.0}}};
  DomainSpec domain;
  TimeSpec time;
  SolverOptions solver;
  std::optional<std::vector<double>> breakpoints;
  ParticleSpec particle;
  VerificationSpec verification;
  Tolerances tolerances;
  std::optional<SweepSpec> sweep;
  json source = json::object();  // the document as given
};

// Schema-checked parse; errors are ValidationError naming the field path.
[[nodiscard]] ExperimentConfig parse_config(const json& doc);
[[nodiscard]] ExperimentConfig load_config(const std::filesystem::path& path);
[[nodiscard]] json to_json(const ExperimentConfig& cfg);

// SHA-256 of "blob <len>\0<canonical json>", hex encoded.
[[nodiscard]] std::string content_hash(const json& doc);

[[nodiscard]] MonotoneGraph build_graph(const CatalogSpec& spec);

struct InitialData {
  ScalarFn density;
  double support_max = 0.0;
};
[[nodiscard]] InitialData build_initial(const CatalogSpec& spec);

[[nodiscard]] Grid1D build_grid(const ExperimentConfig& cfg);
[[nodiscard]] DensityField build_u0(const ExperimentConfig& cfg, const Grid1D& grid);

}  // namespace hlpm
