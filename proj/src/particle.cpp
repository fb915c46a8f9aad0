#include "hlpm/particle.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <thread>

#include "hlpm/errors.hpp"
#include "hlpm/mirror.hpp"

namespace hlpm {

namespace {

// Fixed chunking keeps floating-point reductions independent of the thread count.
constexpr std::size_t kChunk = 8192;

template <typename Fn>
void for_each_chunk(std::size_t n, unsigned threads, Fn&& fn) {
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  auto run = [&](std::size_t c) { fn(c, c * kChunk, std::min(n, (c + 1) * kChunk)); };
  if (threads <= 1 || chunks <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) run(c);
    return;
  }
  std::vector<std::thread> pool;
  const unsigned workers = std::min<unsigned>(threads, static_cast<unsigned>(chunks));
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t c = w; c < chunks; c += workers) run(c);
    });
  }
  for (auto& t : pool) t.join();
}

struct ChunkStats {
  std::uint64_t zero_hits = 0;
  std::uint64_t tiny_hits = 0;
  std::uint64_t empty_hits = 0;
  double zero_occupation = 0.0;
  double empty_exposure = 0.0;
  bool monotone_ok = true;
  bool nonneg_ok = true;
};

}  // namespace

std::string to_string(Scheme s) { return s == Scheme::wholeline_fold ? "wholeline_fold" : "direct_reflect"; }

Scheme parse_scheme(const std::string& s) {
  if (s == "wholeline_fold") return Scheme::wholeline_fold;
  if (s == "direct_reflect") return Scheme::direct_reflect;
  throw ValidationError("unknown particle scheme '" + s + "'");
}

std::string to_string(EstimatorMethod m) { return m == EstimatorMethod::histogram ? "histogram" : "gaussian_kde"; }

EstimatorMethod parse_estimator(const std::string& s) {
  if (s == "histogram") return EstimatorMethod::histogram;
  if (s == "gaussian_kde" || s == "kde") return EstimatorMethod::gaussian_kde;
  throw ValidationError("unknown density estimator '" + s + "'");
}

ParticleEnsemble make_ensemble(std::vector<double> positions, Scheme scheme, std::uint64_t seed, bool negate_noise) {
  if (positions.empty()) throw ValidationError("an ensemble needs at least one particle");
  if (scheme == Scheme::direct_reflect) {
    for (double x : positions) {
      if (!(x >= 0.0)) throw ValidationError("direct_reflect positions must be non-negative");
    }
  }
  ParticleEnsemble e;
  e.positions = std::move(positions);
  e.scheme = scheme;
  e.rng = CounterRng(seed, negate_noise);
  if (scheme == Scheme::direct_reflect) {
    const std::size_t n = e.positions.size();
    e.reflection.K.assign(n, 0.0);
    e.reflection.sum_x_dk.assign(n, 0.0);
    e.reflection.sup_x = e.positions;
  }
  return e;
}

ParticleEnsemble sample_initial(const DensityField& u0, std::size_t n, std::uint64_t seed, Scheme scheme) {
  if (n == 0) throw ValidationError("sample_initial needs N >= 1");
  if (u0.grid().kind() != GridKind::half_line) throw ValidationError("sample_initial needs a half-line density");
  if (!(u0.mass() > 0.0)) throw ValidationError("sample_initial needs positive mass");
  const Grid1D& g = u0.grid();
  const double dx = g.dx();
  std::vector<double> cdf(g.size() + 1, 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) cdf[i + 1] = cdf[i] + std::max(u0[i], 0.0) * dx;
  const double total = cdf.back();
  for (double& c : cdf) c /= total;

  const CounterRng rng(seed);
  std::vector<double> x(n);
  for (std::size_t p = 0; p < n; ++p) {
    const auto b = rng.block(p, CounterRng::kInitStep);
    const double u = CounterRng::to_open_unit(b[0], b[1]);
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    std::size_t k = static_cast<std::size_t>(std::distance(cdf.begin(), it));
    k = std::clamp<std::size_t>(k, 1, g.size()) - 1;
    const double w = cdf[k + 1] - cdf[k];
    const double frac = w > 0.0 ? std::clamp((u - cdf[k]) / w, 0.0, 1.0) : 0.5;
    double pos = (static_cast<double>(k) + frac) * dx;
    if (scheme == Scheme::wholeline_fold && (b[2] & 0x80000000u)) pos = -pos;
    x[p] = pos;
  }
  return make_ensemble(std::move(x), scheme, seed);
}

namespace {

std::size_t clamp_cell(const Grid1D& g, double x) {
  if (auto c = g.cell_of(x)) return *c;
  if (g.kind() == GridKind::half_line) return x < 0.0 ? 0 : g.size() - 1;
  return std::signbit(x) ? 0 : g.size() - 1;
}

// reflect an out-of-range index back into [0, n)
std::size_t reflect_index(long long j, long long n) {
  while (j < 0 || j >= n) {
    if (j < 0) j = -1 - j;
    if (j >= n) j = 2 * n - 1 - j;
  }
  return static_cast<std::size_t>(j);
}

}  // namespace

DensityEstimate estimate_density(std::span<const double> positions, const Grid1D& grid, const EstimatorSpec& spec,
                                 bool symmetrize, double t) {
  if (positions.empty()) throw ValidationError("density estimate of an empty ensemble");
  if (spec.method == EstimatorMethod::gaussian_kde && !(spec.bandwidth > 0.0)) {
    throw DomainError("kde bandwidth must be positive");
  }
  if (symmetrize && grid.kind() != GridKind::symmetric_whole_line) {
    throw ValidationError("symmetrized estimates need a symmetric whole-line grid");
  }
  const std::size_t n = grid.size();
  std::vector<double> counts(n, 0.0);
  for (double x : positions) counts[clamp_cell(grid, x)] += 1.0;

  const double norm = 1.0 / (static_cast<double>(positions.size()) * grid.dx());
  std::vector<double> v(n);
  if (spec.method == EstimatorMethod::histogram) {
    for (std::size_t i = 0; i < n; ++i) v[i] = counts[i] * norm;
  } else {
    const double h = spec.bandwidth;
    const auto reach = static_cast<long long>(std::ceil(6.0 * h / grid.dx()));
    std::vector<double> w(2 * reach + 1);
    double wsum = 0.0;
    for (long long k = -reach; k <= reach; ++k) {
      const double z = static_cast<double>(k) * grid.dx() / h;
      w[k + reach] = std::exp(-0.5 * z * z);
      wsum += w[k + reach];
    }
    for (double& x : w) x /= wsum;
    std::fill(v.begin(), v.end(), 0.0);
    const auto nn = static_cast<long long>(n);
    for (long long i = 0; i < nn; ++i) {
      if (counts[i] == 0.0) continue;
      for (long long k = -reach; k <= reach; ++k) {
        // kernel mass leaving the grid is reflected back (zero-flux faces)
        v[reflect_index(i + k, nn)] += counts[i] * w[k + reach] * norm;
      }
    }
  }
  DensityField field(grid, std::move(v), t);
  if (symmetrize) field = hlpm::symmetrize(field);
  return {spec.method, spec.bandwidth, symmetrize, std::move(field)};
}

DensityEstimate estimate_density(const ParticleEnsemble& ens, const Grid1D& grid, const EstimatorSpec& spec,
                                 bool symmetrize) {
  if (symmetrize && ens.scheme != Scheme::wholeline_fold) {
    throw ValidationError("symmetrization applies to wholeline_fold ensembles only");
  }
  return estimate_density(ens.positions, grid, spec, symmetrize, ens.t);
}

CoefficientTable::CoefficientTable(const Selection& chi, const DensityField& density)
    : grid_(density.grid()), chi_(density.size()), empty_(density.size()), at_zero_(chi(0.0)) {
  for (std::size_t i = 0; i < density.size(); ++i) {
    const double v = std::max(density[i], 0.0);
    empty_[i] = v == 0.0 ? 1 : 0;
    chi_[i] = chi(v);
  }
}

double CoefficientTable::max() const {
  double m = at_zero_;
  for (double c : chi_) m = std::max(m, c);
  return m;
}

void LocalTimeAccumulator::record(double t) {
  double s = 0.0;
  for (double v : per_particle) s += v;
  const double mean = per_particle.empty() ? 0.0 : s / static_cast<double>(per_particle.size());
  trace.eps = eps;
  trace.kind = kind;
  trace.times.push_back(t);
  trace.values.push_back(mean);
}

void advance(ParticleEnsemble& ens, const CoefficientTable& table, double dt, const StepOptions& opt) {
  if (!(dt > 0.0)) throw DomainError("particle time step must be positive");
  const std::size_t n = ens.size();
  const double sdt = std::sqrt(dt);
  const bool reflect = ens.scheme == Scheme::direct_reflect;
  auto* lts = opt.local_times;
  if (lts) {
    for (auto& a : *lts) {
      if (a.per_particle.size() != n) a.per_particle.assign(n, 0.0);
      if (a.eps < sdt * table.max()) a.trace.undersampled = true;
    }
  }
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<ChunkStats> stats(chunks);
  const std::uint64_t step = ens.step;

  for_each_chunk(n, opt.threads, [&](std::size_t c, std::size_t begin, std::size_t end) {
    ChunkStats& st = stats[c];
    for (std::size_t i = begin; i < end; ++i) {
      const double x = ens.positions[i];
      bool empty = false;
      const double chi = table.lookup(x, empty);
      const double q = chi * chi * dt;
      if (empty) {
        ++st.empty_hits;
        st.empty_exposure += q;
      }
      if (x == 0.0) {
        ++st.zero_hits;
        st.zero_occupation += q;
      }
      if (std::abs(x) < 1e-12) ++st.tiny_hits;
      if (lts) {
        for (auto& a : *lts) {
          const double y = a.fold ? std::abs(x) : x;
          if (a.kind == LocalTimeKind::symmetric) {
            if (std::abs(y) < a.eps) a.per_particle[i] += q / (2.0 * a.eps);
          } else if (y >= 0.0 && y < a.eps) {
            a.per_particle[i] += q / a.eps;
          }
        }
      }
      const double p = x + chi * sdt * ens.rng.normal(i, step);
      if (!reflect) {
        ens.positions[i] = p;
        continue;
      }
      const double xn = std::abs(p);
      const double dk = xn - p;
      if (!(dk >= 0.0)) st.monotone_ok = false;
      if (!(xn >= 0.0)) st.nonneg_ok = false;
      ens.positions[i] = xn;
      ens.reflection.K[i] += dk;
      ens.reflection.sum_x_dk[i] += xn * dk;
      ens.reflection.sup_x[i] = std::max(ens.reflection.sup_x[i], xn);
    }
  });

  auto& z = ens.zero_set;
  for (const auto& st : stats) {
    z.zero_hits += st.zero_hits;
    z.tiny_hits += st.tiny_hits;
    z.empty_cell_hits += st.empty_hits;
    z.zero_occupation += st.zero_occupation;
    z.empty_cell_exposure += st.empty_exposure;
    ens.reflection.monotone_ok = ens.reflection.monotone_ok && st.monotone_ok;
    ens.reflection.nonneg_ok = ens.reflection.nonneg_ok && st.nonneg_ok;
  }
  z.evaluations += n;
  ens.step += 1;
  ens.t += dt;
}

void em_step_wholeline(ParticleEnsemble& ens, const Selection& chi_bar, const DensityEstimate& dens, double dt,
                       const StepOptions& opt) {
  if (ens.scheme != Scheme::wholeline_fold) throw ValidationError("em_step_wholeline needs a wholeline_fold ensemble");
  if (dens.field.grid().kind() != GridKind::symmetric_whole_line) {
    throw ValidationError("em_step_wholeline needs a whole-line density");
  }
  advance(ens, CoefficientTable(chi_bar, dens.field), dt, opt);
}

void reflected_step(ParticleEnsemble& ens, const Selection& chi, const DensityEstimate& dens, double dt,
                    const StepOptions& opt) {
  if (ens.scheme != Scheme::direct_reflect) throw ValidationError("reflected_step needs a direct_reflect ensemble");
  if (dens.field.grid().kind() != GridKind::half_line) throw ValidationError("reflected_step needs a half-line density");
  advance(ens, CoefficientTable(chi, dens.field), dt, opt);
}

ParticleEnsemble fold(const ParticleEnsemble& ens) {
  if (ens.scheme != Scheme::wholeline_fold) throw ValidationError("fold needs a wholeline_fold ensemble");
  ParticleEnsemble out = ens;
  for (double& x : out.positions) x = std::abs(x);
  return out;
}

LocalTimeTrace estimate_local_time(const PathRecord& paths, double eps, LocalTimeKind kind, bool fold_positions) {
  if (!(eps > 0.0)) throw DomainError("local time needs eps > 0");
  LocalTimeTrace tr;
  tr.eps = eps;
  tr.kind = kind;
  if (paths.positions.empty()) return tr;
  const std::size_t n = paths.positions.front().size();
  std::vector<double> acc(n, 0.0);
  const double sdt = std::sqrt(paths.dt);
  for (std::size_t s = 0; s < paths.positions.size(); ++s) {
    const auto& xs = paths.positions[s];
    const auto& cs = paths.chi[s];
    for (std::size_t i = 0; i < n; ++i) {
      const double y = fold_positions ? std::abs(xs[i]) : xs[i];
      const double q = cs[i] * cs[i] * paths.dt;
      if (eps < sdt * cs[i]) tr.undersampled = true;
      if (kind == LocalTimeKind::symmetric) {
        if (std::abs(y) < eps) acc[i] += q / (2.0 * eps);
      } else if (y >= 0.0 && y < eps) {
        acc[i] += q / eps;
      }
    }
    double sum = 0.0;
    for (double a : acc) sum += a;
    tr.times.push_back(static_cast<double>(s + 1) * paths.dt);
    tr.values.push_back(sum / static_cast<double>(n));
  }
  return tr;
}

SkorokhodReport skorokhod_check(const ParticleEnsemble& ens) {
  if (ens.scheme != Scheme::direct_reflect) throw ValidationError("skorokhod_check needs a direct_reflect ensemble");
  SkorokhodReport r;
  const auto& L = ens.reflection;
  double num = 0.0;
  double den = 0.0;
  double ksum = 0.0;
  for (std::size_t i = 0; i < L.K.size(); ++i) {
    num += L.sum_x_dk[i];
    den += L.sup_x[i] * L.K[i];
    ksum += L.K[i];
  }
  r.complementarity = den > 0.0 ? num / den : 0.0;
  r.monotone_ok = L.monotone_ok;
  r.nonneg_ok = L.nonneg_ok;
  for (double x : ens.positions) r.nonneg_ok = r.nonneg_ok && x >= 0.0;
  r.mean_K = ksum / static_cast<double>(std::max<std::size_t>(L.K.size(), 1));
  return r;
}

ZeroSetReport zero_set_diagnostics(const ParticleEnsemble& ens) {
  ZeroSetReport r;
  const auto& z = ens.zero_set;
  if (z.evaluations == 0) return r;
  const auto ev = static_cast<double>(z.evaluations);
  const auto n = static_cast<double>(ens.size());
  r.zero_fraction = static_cast<double>(z.zero_hits) / ev;
  r.tiny_fraction = static_cast<double>(z.tiny_hits) / ev;
  r.empty_cell_fraction = static_cast<double>(z.empty_cell_hits) / ev;
  r.zero_occupation = z.zero_occupation / n;
  r.empty_cell_exposure = z.empty_cell_exposure / n;
  return r;
}

ZeroSetReport zero_set_diagnostics(const PathRecord& paths) {
  ZeroSetReport r;
  if (paths.positions.empty()) return r;
  const std::size_t n = paths.positions.front().size();
  std::uint64_t hits = 0;
  std::uint64_t tiny = 0;
  double occ = 0.0;
  for (std::size_t s = 0; s < paths.positions.size(); ++s) {
    for (std::size_t i = 0; i < n; ++i) {
      const double x = paths.positions[s][i];
      if (x == 0.0) {
        ++hits;
        occ += paths.chi[s][i] * paths.chi[s][i] * paths.dt;
      }
      if (std::abs(x) < 1e-12) ++tiny;
    }
  }
  const double ev = static_cast<double>(n * paths.positions.size());
  r.zero_fraction = static_cast<double>(hits) / ev;
  r.tiny_fraction = static_cast<double>(tiny) / ev;
  r.zero_occupation = occ / static_cast<double>(n);
  return r;
}

const DensityEstimate& ParticleRunResult::marginal_at(double t, double tol) const {
  for (const auto& m : marginals) {
    if (std::abs(m.field.t() - t) <= tol) return m;
  }
  std::ostringstream os;
  os << "no particle marginal at t = " << t;
  throw ValidationError(os.str());
}

ParticleRunResult simulate(const DensityField& u0, const MonotoneGraph& beta, const Grid1D& grid,
                           const ParticleRunConfig& cfg) {
  return simulate(sample_initial(u0, cfg.particles, cfg.seed, cfg.scheme), beta, grid, cfg);
}

ParticleRunResult simulate(ParticleEnsemble ens, const MonotoneGraph& beta, const Grid1D& grid,
                           const ParticleRunConfig& cfg) {
  if (grid.kind() != GridKind::half_line) throw ValidationError("the estimator grid must be a half-line grid");
  if (!(cfg.dt > 0.0) || !(cfg.T > 0.0)) throw ValidationError("particle dt and T must be positive");
  if (cfg.k_sync == 0) throw ValidationError("k_sync must be >= 1");
  const auto steps = static_cast<std::size_t>(std::llround(cfg.T / cfg.dt));
  if (steps == 0 || std::abs(static_cast<double>(steps) * cfg.dt - cfg.T) > 1e-6 * cfg.T) {
    throw ValidationError("particle T must be an integer multiple of dt");
  }
  std::set<std::size_t> snap{0, steps};
  for (double t : cfg.snapshot_times) {
    if (t < -1e-12 || t > cfg.T + 1e-12) throw ValidationError("snapshot times must lie in [0, T]");
    snap.insert(static_cast<std::size_t>(std::llround(t / cfg.dt)));
  }

  const bool whole = ens.scheme == Scheme::wholeline_fold;
  const PhiGraph phi = phi_from_beta(beta);
  const Selection chi = whole ? make_selection(extend_phi(phi), cfg.policy) : make_selection(phi, cfg.policy);
  const Grid1D coupling_grid = whole ? grid.mirrored() : grid;

  std::vector<LocalTimeAccumulator> acc;
  for (double eps : cfg.local_time_eps) {
    if (!(eps > 0.0)) throw DomainError("local time eps must be positive");
    if (whole) acc.push_back({eps, LocalTimeKind::symmetric, false, {}, {}});
    acc.push_back({eps, LocalTimeKind::one_sided, whole, {}, {}});
  }
  for (auto& a : acc) {
    a.per_particle.assign(ens.size(), 0.0);
    a.record(0.0);
  }

  ParticleRunResult res;
  if (cfg.record_paths) res.paths = PathRecord{cfg.dt, {}, {}};
  const std::vector<double> start = ens.positions;
  auto marginal = [&](const ParticleEnsemble& e) {
    if (!whole) return estimate_density(e, grid, cfg.estimator, false);
    return estimate_density(fold(e), grid, cfg.estimator, false);
  };
  res.marginals.push_back(marginal(ens));

  StepOptions sopt;
  sopt.threads = cfg.threads;
  sopt.local_times = acc.empty() ? nullptr : &acc;
  std::optional<CoefficientTable> table;
  for (std::size_t k = 0; k < steps; ++k) {
    if (k % cfg.k_sync == 0 || !table) {
      const auto dens = estimate_density(ens.positions, coupling_grid, cfg.estimator, whole, ens.t);
      table.emplace(chi, dens.field);
    }
    if (res.paths) {
      res.paths->positions.push_back(ens.positions);
      std::vector<double> c(ens.size());
      bool empty = false;
      for (std::size_t i = 0; i < ens.size(); ++i) c[i] = table->lookup(ens.positions[i], empty);
      res.paths->chi.push_back(std::move(c));
    }
    advance(ens, *table, cfg.dt, sopt);
    const std::size_t done = k + 1;
    const bool snap_now = snap.count(done) > 0;
    if (snap_now || (cfg.local_time_every > 0 && done % cfg.local_time_every == 0)) {
      for (auto& a : acc) a.record(ens.t);
    }
    if (snap_now) res.marginals.push_back(marginal(ens));
  }

  for (auto& a : acc) res.local_times.push_back(std::move(a.trace));
  for (std::size_t i = 0; i < ens.size(); ++i) {
    res.max_displacement = std::max(res.max_displacement, std::abs(ens.positions[i] - start[i]));
  }
  if (!whole) res.skorokhod = skorokhod_check(ens);
  res.zero_set = zero_set_diagnostics(ens);
  res.final_ensemble = std::move(ens);
  return res;
}

}  // namespace hlpm
