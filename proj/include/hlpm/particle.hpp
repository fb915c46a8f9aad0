#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hlpm/grid.hpp"
#include "hlpm/monotone_graph.hpp"
#include "hlpm/rng.hpp"

namespace hlpm {

// wholeline_fold: simulate Y on R with Phi_bar and the even density u_bar,
// report X = |Y|. direct_reflect: simulate X on [0, inf) with Phi and v,
// mirror-reflecting at 0.
enum class Scheme { wholeline_fold, direct_reflect };
enum class EstimatorMethod { histogram, gaussian_kde };
// symmetric: (1/2eps) sum 1{|x| < eps} chi^2 dt     (local time of Y at 0)
// one_sided: (1/eps)  sum 1{0 <= x < eps} chi^2 dt  (local time of X >= 0 at 0)
enum class LocalTimeKind { symmetric, one_sided };

[[nodiscard]] std::string to_string(Scheme s);
[[nodiscard]] Scheme parse_scheme(const std::string& s);
[[nodiscard]] std::string to_string(EstimatorMethod m);
[[nodiscard]] EstimatorMethod parse_estimator(const std::string& s);

// Per-particle pathwise pushing of the mirror scheme, for the Skorokhod checks.
struct ReflectionLedger {
  std::vector<double> K;         // accumulated |p| - p
  std::vector<double> sum_x_dk;  // sum of X_{n+1} dK_{n+1}
  std::vector<double> sup_x;
  bool monotone_ok = true;
  bool nonneg_ok = true;
};

struct ZeroSetLedger {
  std::uint64_t evaluations = 0;
  std::uint64_t zero_hits = 0;        // position exactly 0 at the start of a step
  std::uint64_t tiny_hits = 0;        // |position| < 1e-12
  double zero_occupation = 0.0;       // sum over particles of sum 1{x = 0} chi^2 dt
  std::uint64_t empty_cell_hits = 0;  // coefficient read where the density estimate is 0
  double empty_cell_exposure = 0.0;   // sum over particles of chi^2 dt on those reads
};

struct ParticleEnsemble {
  std::vector<double> positions;
  Scheme scheme = Scheme::direct_reflect;
  double t = 0.0;
  std::uint64_t step = 0;
  CounterRng rng{0};
  ReflectionLedger reflection;
  ZeroSetLedger zero_set;

  [[nodiscard]] std::size_t size() const { return positions.size(); }
};

[[nodiscard]] ParticleEnsemble make_ensemble(std::vector<double> positions, Scheme scheme, std::uint64_t seed,
                                             bool negate_noise = false);

// Inverse-CDF sampling of the piecewise-constant u0; the fold scheme also
// flips each sign with probability 1/2, which samples u0_bar.
[[nodiscard]] ParticleEnsemble sample_initial(const DensityField& u0, std::size_t n, std::uint64_t seed, Scheme scheme);

struct EstimatorSpec {
  EstimatorMethod method = EstimatorMethod::histogram;
  double bandwidth = 0.0;  // kde only
};

struct DensityEstimate {
  EstimatorMethod method = EstimatorMethod::histogram;
  double bandwidth = 0.0;
  bool symmetrized = false;
  DensityField field;
};

// Particles beyond the grid are counted in the outermost cell on their side,
// so the estimate always has unit mass.
[[nodiscard]] DensityEstimate estimate_density(std::span<const double> positions, const Grid1D& grid,
                                               const EstimatorSpec& spec, bool symmetrize, double t = 0.0);
[[nodiscard]] DensityEstimate estimate_density(const ParticleEnsemble& ens, const Grid1D& grid,
                                               const EstimatorSpec& spec, bool symmetrize);

// chi = selection(Phi)(density) per cell; cells with zero density and points
// off the grid use the selection's value at 0.
class CoefficientTable {
 public:
  CoefficientTable(const Selection& chi, const DensityField& density);

  [[nodiscard]] double lookup(double x, bool& empty) const {
    const auto c = grid_.cell_of(x);
    if (!c) {
      empty = true;
      return at_zero_;
    }
    empty = empty_[*c] != 0;
    return chi_[*c];
  }
  [[nodiscard]] double max() const;

 private:
  Grid1D grid_;
  std::vector<double> chi_;
  std::vector<unsigned char> empty_;
  double at_zero_;
};

struct LocalTimeTrace {
  double eps = 0.0;
  LocalTimeKind kind = LocalTimeKind::symmetric;
  std::vector<double> times;
  std::vector<double> values;  // ensemble mean, non-decreasing
  bool undersampled = false;   // eps below the typical increment sqrt(dt) chi
};

// Per-particle accumulator; `fold` evaluates the indicator on |x|.
struct LocalTimeAccumulator {
  double eps = 0.0;
  LocalTimeKind kind = LocalTimeKind::symmetric;
  bool fold = false;
  std::vector<double> per_particle;
  LocalTimeTrace trace;

  void record(double t);
};

struct StepOptions {
  unsigned threads = 1;
  std::vector<LocalTimeAccumulator>* local_times = nullptr;
};

// Y <- Y + chi_bar(u_bar(Y)) sqrt(dt) xi
void em_step_wholeline(ParticleEnsemble& ens, const Selection& chi_bar, const DensityEstimate& dens, double dt,
                       const StepOptions& opt = {});

// p = X + chi(v(X)) sqrt(dt) xi,  X <- |p|,  dK = |p| - p
void reflected_step(ParticleEnsemble& ens, const Selection& chi, const DensityEstimate& dens, double dt,
                    const StepOptions& opt = {});

// Same updates with a prebuilt coefficient table.
void advance(ParticleEnsemble& ens, const CoefficientTable& table, double dt, const StepOptions& opt = {});

[[nodiscard]] ParticleEnsemble fold(const ParticleEnsemble& ens);

// Retained per-step positions (at the start of each step) and coefficients.
struct PathRecord {
  double dt = 0.0;
  std::vector<std::vector<double>> positions;
  std::vector<std::vector<double>> chi;
};

[[nodiscard]] LocalTimeTrace estimate_local_time(const PathRecord& paths, double eps, LocalTimeKind kind,
                                                 bool fold = false);

struct SkorokhodReport {
  double complementarity = 0.0;  // sum_i sum_s X dK / sum_i (sup X) K_T
  bool monotone_ok = true;
  bool nonneg_ok = true;
  double mean_K = 0.0;
};

[[nodiscard]] SkorokhodReport skorokhod_check(const ParticleEnsemble& ens);

struct ZeroSetReport {
  double zero_fraction = 0.0;        // (particle, step) pairs with position exactly 0
  double zero_occupation = 0.0;      // ensemble mean of sum 1{x = 0} chi^2 dt
  double tiny_fraction = 0.0;        // |position| < 1e-12
  double empty_cell_fraction = 0.0;  // coefficient read from an empty cell
  double empty_cell_exposure = 0.0;  // ensemble mean of sum chi^2 dt on those reads
};

[[nodiscard]] ZeroSetReport zero_set_diagnostics(const ParticleEnsemble& ens);
[[nodiscard]] ZeroSetReport zero_set_diagnostics(const PathRecord& paths);

struct ParticleRunConfig {
  Scheme scheme = Scheme::direct_reflect;
  std::size_t particles = 100000;
  double dt = 1e-3;
  double T = 0.5;
  std::vector<double> snapshot_times;
  EstimatorSpec estimator;
  std::size_t k_sync = 1;
  std::uint64_t seed = 1;
  std::vector<double> local_time_eps;
  std::size_t local_time_every = 0;  // extra trace points every k steps
  SelectionPolicy policy = SelectionPolicy::midpoint;
  unsigned threads = 1;
  bool record_paths = false;
};

struct ParticleRunResult {
  std::vector<DensityEstimate> marginals;  // half-line marginals of X, t = 0 first
  std::vector<LocalTimeTrace> local_times;
  ParticleEnsemble final_ensemble;
  SkorokhodReport skorokhod;
  ZeroSetReport zero_set;
  std::optional<PathRecord> paths;
  double max_displacement = 0.0;  // max_i |X_i(T) - X_i(0)|

  [[nodiscard]] const DensityEstimate& marginal_at(double t, double tol = 1e-9) const;
};

// `grid` is the half-line estimator grid; the fold scheme couples through its
// mirror image. Wholeline runs record L^Y (symmetric, on Y) then L^X
// (one-sided, on |Y|) for each eps; direct runs record L^X only.
[[nodiscard]] ParticleRunResult simulate(const DensityField& u0, const MonotoneGraph& beta, const Grid1D& grid,
                                         const ParticleRunConfig& cfg);
[[nodiscard]] ParticleRunResult simulate(ParticleEnsemble initial, const MonotoneGraph& beta, const Grid1D& grid,
                                         const ParticleRunConfig& cfg);

}  // namespace hlpm
