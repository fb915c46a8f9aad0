#include "hlpm/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>

#include "hlpm/assumptions.hpp"
#include "hlpm/errors.hpp"
#include "hlpm/io.hpp"
#include "hlpm/metrics.hpp"
#include "hlpm/mirror.hpp"

namespace hlpm {

std::string to_string(Pipeline p) {
  switch (p) {
    case Pipeline::pde: return "pde";
    case Pipeline::particle: return "particle";
    case Pipeline::verify: return "verify";
    case Pipeline::compare: return "compare";
    case Pipeline::route_check: return "route-check";
    case Pipeline::sweep: return "sweep";
  }
  return "?";
}

Pipeline parse_pipeline(const std::string& s) {
  for (auto p : {Pipeline::pde, Pipeline::particle, Pipeline::verify, Pipeline::compare, Pipeline::route_check,
                 Pipeline::sweep}) {
    if (to_string(p) == s) return p;
  }
  throw ValidationError("unknown pipeline '" + s + "'");
}

Metric& Report::add(std::string name, double value, std::string artifact) {
  metrics.push_back({std::move(name), value, Bound::none, 0.0, true, std::move(artifact)});
  return metrics.back();
}

Metric& Report::add_upper(std::string name, double value, double limit, std::string artifact) {
  metrics.push_back({std::move(name), value, Bound::upper, limit, value <= limit, std::move(artifact)});
  return metrics.back();
}

Metric& Report::add_lower(std::string name, double value, double limit, std::string artifact) {
  metrics.push_back({std::move(name), value, Bound::lower, limit, value >= limit, std::move(artifact)});
  return metrics.back();
}

bool Report::passed() const {
  return std::all_of(metrics.begin(), metrics.end(), [](const Metric& m) { return m.passed; });
}

const Metric* Report::find(const std::string& name) const {
  for (const auto& m : metrics) {
    if (m.name == name) return &m;
  }
  return nullptr;
}

json Report::to_json() const {
  auto ms = json::array();
  for (const auto& m : metrics) {
    json j{{"name", m.name}, {"value", m.value}, {"passed", m.passed}};
    if (m.bound == Bound::upper) j["max"] = m.limit;
    if (m.bound == Bound::lower) j["min"] = m.limit;
    if (!m.artifact.empty()) j["artifact"] = m.artifact;
    ms.push_back(std::move(j));
  }
  return {{"pipeline", pipeline}, {"config", config},     {"config_hash", config_hash},
          {"seed", seed},         {"threads", threads},   {"passed", passed()},
          {"metrics", ms},        {"sections", sections}, {"artifacts", artifacts},
          {"warnings", warnings}};
}

namespace {

template <typename Fn>
auto stage(const std::string& name, Fn&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

std::string tag_time(const std::string& name, double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "[t=%.4f]", t);
  return name + buf;
}

std::vector<double> report_times(const ExperimentConfig& cfg, double T) {
  std::set<double> s(cfg.time.snapshots.begin(), cfg.time.snapshots.end());
  s.insert(T);
  std::vector<double> out;
  for (double t : s) {
    if (t > 0.0 && t <= T + 1e-12) out.push_back(t);
  }
  return out;
}

Grid1D grid_with_dx(const ExperimentConfig& cfg, double dx) {
  const Grid1D base = build_grid(cfg);
  const auto cells = static_cast<std::size_t>(std::llround(base.extent() / dx));
  return Grid1D::half_line(cells, dx);
}

bool linear_graph(const ExperimentConfig& cfg) { return cfg.graph.name == "identity"; }

struct Context {
  const ExperimentConfig& cfg;
  Report& report;
  std::optional<std::filesystem::path> dir;
  unsigned threads;

  void artifact(const std::string& name) {
    if (std::find(report.artifacts.begin(), report.artifacts.end(), name) == report.artifacts.end()) {
      report.artifacts.push_back(name);
    }
  }
};

void pde_metrics(Context& ctx, const PdeTrajectory& traj, const std::string& prefix) {
  auto& r = ctx.report;
  const auto& tol = ctx.cfg.tolerances;
  r.add_upper(prefix + "mass_deviation", traj.max_mass_deviation, tol.mass, "metrics.csv");
  r.add_lower(prefix + "min_value", traj.min_value, -tol.positivity, "metrics.csv");
  r.add(prefix + "selection_violation", traj.max_selection_violation, "metrics.csv");
  double change = 0.0;
  const auto& first = traj.snapshots.front().u;
  const auto& last = traj.snapshots.back().u;
  for (std::size_t i = 0; i < first.size(); ++i) change = std::max(change, std::abs(last[i] - first[i]));
  r.add(prefix + "max_state_change", change, "metrics.csv");
  // skip t = 0: for discontinuous data the variation is the jump height, not a gradient bound
  double variation = 0.0;
  for (std::size_t k = 1; k < traj.snapshots.size(); ++k) {
    variation = std::max(variation, eta_variation(traj.snapshots[k].eta));
  }
  r.add(prefix + "eta_variation", variation, "metrics.csv");
  double newton = 0.0;
  double sweeps = 0.0;
  for (const auto& s : traj.step_stats) {
    newton += s.newton_iterations;
    sweeps += s.sweeps;
  }
  const double n = std::max<double>(1.0, static_cast<double>(traj.step_stats.size()));
  r.add(prefix + "newton_iterations_mean", newton / n, "metrics.csv");
  r.add(prefix + "sweeps_mean", sweeps / n, "metrics.csv");
}

void validation_section(Context& ctx, const MonotoneGraph& beta, const DensityField& u0) {
  const auto v = validate_assumptions(beta, u0, ctx.cfg.breakpoints);
  json items = json::array();
  for (const auto& it : v.items) items.push_back({{"check", it.name}, {"passed", it.passed}, {"detail", it.detail}});
  ctx.report.sections["assumptions"] = {{"passed", v.passed()}, {"class", describe(v.degeneracy)}, {"items", items}};
  for (const auto& w : beta.warnings()) ctx.report.warnings.push_back(w);
}

PdeTrajectory run_pde_stage(Context& ctx, bool write) {
  const auto& cfg = ctx.cfg;
  auto traj = stage("pde", [&] { return solve_half_line(cfg, cfg.domain.dx, cfg.time.dt); });
  pde_metrics(ctx, traj, "pde.");
  const auto times = report_times(cfg, cfg.time.T);
  if (linear_graph(cfg)) {
    for (double t : times) {
      const auto& s = traj.at_time(t);
      const auto exact = reflected_heat(traj.snapshots.front().u, t);
      const auto d = compare_densities(s.u, exact);
      ctx.report.add_upper(tag_time("pde.exact_l1", t), d.L1, cfg.tolerances.pde_exact_l1,
                           snapshot_name("density", t));
    }
  }
  if (write && ctx.dir) {
    std::vector<double> all{0.0};
    all.insert(all.end(), times.begin(), times.end());
    for (const auto& f : write_trajectory(*ctx.dir, traj, all)) ctx.artifact(f);
  }
  return traj;
}

ParticleRunResult run_particle_stage(Context& ctx, const ExperimentConfig& cfg, const Grid1D& pde_grid) {
  return stage("particle", [&] {
    const auto beta = build_graph(cfg.graph);
    const auto u0 = build_u0(cfg, pde_grid);
    const auto pcfg = particle_run_config(cfg, ctx.threads);
    return simulate(u0, beta, particle_grid(cfg, pde_grid), pcfg);
  });
}

void particle_metrics(Context& ctx, const ParticleRunResult& res, const ExperimentConfig& cfg,
                      const std::string& prefix) {
  auto& r = ctx.report;
  const auto& tol = cfg.tolerances;
  const double dt = cfg.particle.dt;
  if (cfg.particle.scheme == Scheme::direct_reflect) {
    r.add_lower(prefix + "skorokhod.monotone_ok", res.skorokhod.monotone_ok ? 1.0 : 0.0, 1.0, "metrics.csv");
    r.add_lower(prefix + "skorokhod.nonneg_ok", res.skorokhod.nonneg_ok ? 1.0 : 0.0, 1.0, "metrics.csv");
    r.add_upper(prefix + "skorokhod.complementarity", res.skorokhod.complementarity,
                tol.skorokhod_factor * std::sqrt(dt), "metrics.csv");
    r.add(prefix + "skorokhod.mean_K", res.skorokhod.mean_K, "metrics.csv");
  }
  r.add(prefix + "zero_set.zero_fraction", res.zero_set.zero_fraction, "metrics.csv");
  r.add(prefix + "zero_set.zero_occupation", res.zero_set.zero_occupation, "metrics.csv");
  r.add(prefix + "zero_set.tiny_fraction", res.zero_set.tiny_fraction, "metrics.csv");
  r.add(prefix + "zero_set.empty_cell_fraction", res.zero_set.empty_cell_fraction, "metrics.csv");
  r.add(prefix + "zero_set.empty_cell_exposure", res.zero_set.empty_cell_exposure, "metrics.csv");
  r.add(prefix + "max_displacement", res.max_displacement, "metrics.csv");

  // L^Y / L^X on the same paths (fold scheme): traces come in (symmetric, one_sided) pairs
  for (std::size_t k = 0; k < res.local_times.size(); ++k) {
    const auto& tr = res.local_times[k];
    char buf[64];
    std::snprintf(buf, sizeof buf, "local_time.%s[eps=%g]",
                  tr.kind == LocalTimeKind::symmetric ? "L_Y" : "L_X", tr.eps);
    r.add(prefix + buf, tr.values.back(), "localtime.csv");
    if (tr.undersampled) r.warnings.push_back(std::string(buf) + ": eps below sqrt(dt) chi, estimator undersamples");
    if (tr.kind == LocalTimeKind::symmetric && k + 1 < res.local_times.size()) {
      const auto& tx = res.local_times[k + 1];
      const double ratio = tx.values.back() > 0.0 ? tr.values.back() / tx.values.back() : 0.0;
      std::snprintf(buf, sizeof buf, "local_time.ratio_Y_X[eps=%g]", tr.eps);
      r.add_lower(prefix + buf + std::string(".lo"), ratio, tol.local_time_ratio_lo, "localtime.csv");
      r.add_upper(prefix + buf + std::string(".hi"), ratio, tol.local_time_ratio_hi, "localtime.csv");
    }
  }
}

void write_particle_artifacts(Context& ctx, const ParticleRunResult& res, const std::string& tag) {
  if (!ctx.dir) return;
  for (const auto& m : res.marginals) {
    const auto name = snapshot_name("density" + tag, m.field.t());
    write_density_csv(*ctx.dir / name, m.field);
    ctx.artifact(name);
  }
  if (!res.local_times.empty()) {
    const std::string name = "localtime" + tag + ".csv";
    write_localtime_csv(*ctx.dir / name, res.local_times);
    ctx.artifact(name);
  }
}

void exact_particle_metrics(Context& ctx, const ParticleRunResult& res, const DensityField& u0_fine,
                            const std::string& prefix, const std::string& tag) {
  if (!linear_graph(ctx.cfg)) return;
  for (const auto& m : res.marginals) {
    if (m.field.t() <= 0.0) continue;
    const auto exact = reflected_heat(u0_fine, m.field.t(), 1.0, &m.field.grid());
    const auto d = compare_densities(m.field, exact);
    ctx.report.add_upper(tag_time(prefix + "exact_l1", m.field.t()), d.L1, ctx.cfg.tolerances.particle_exact_l1,
                         snapshot_name("density" + tag, m.field.t()));
  }
}

void compare_marginals(Context& ctx, const PdeTrajectory& traj, const ParticleRunResult& res, std::size_t factor,
                       const std::string& prefix, double limit, const std::string& artifact_tag) {
  json rows = json::array();
  for (const auto& m : res.marginals) {
    const double t = m.field.t();
    const auto coarse = coarsen(traj.at_time(t).u, factor);
    const auto d = compare_densities(m.field, coarse);
    ctx.report.add_upper(tag_time(prefix + "L1", t), d.L1, limit, snapshot_name("density" + artifact_tag, t));
    ctx.report.add(tag_time(prefix + "W1", t), d.W1, snapshot_name("density" + artifact_tag, t));
    rows.push_back({{"t", t}, {"L1", d.L1}, {"W1", d.W1}});
  }
  ctx.report.sections[prefix + "distances"] = rows;
}

ExperimentConfig with_sweep_value(ExperimentConfig cfg, const std::string& param, double v) {
  auto& p = cfg.particle;
  if (param == "particles") p.particles = static_cast<std::size_t>(v);
  else if (param == "dt") p.dt = v;
  else if (param == "k_sync") p.k_sync = static_cast<std::size_t>(v);
  else if (param == "bandwidth") {
    p.estimator.method = EstimatorMethod::gaussian_kde;
    p.estimator.bandwidth = v;
  } else if (param == "bin_factor") p.bin_factor = static_cast<std::size_t>(v);
  else if (param == "seed") p.seed = static_cast<std::uint64_t>(v);
  return cfg;
}

}  // namespace

PdeTrajectory solve_half_line(const ExperimentConfig& cfg, double dx, double dt) {
  const Grid1D grid = grid_with_dx(cfg, dx);
  const auto u0 = build_u0(cfg, grid);
  const auto beta = build_graph(cfg.graph);
  SolveOptions opt;
  opt.snapshot_times = cfg.time.snapshots;
  opt.snapshot_stride = cfg.time.stride;
  opt.solver = cfg.solver;
  opt.breakpoints = cfg.breakpoints;
  return solve(u0, beta, cfg.time.T, dt, opt);
}

RouteResult route_equivalence(const ExperimentConfig& cfg) {
  const Grid1D grid = build_grid(cfg);
  const auto u0 = build_u0(cfg, grid);
  const auto beta = build_graph(cfg.graph);
  SolveOptions opt;
  opt.snapshot_times = cfg.time.snapshots;
  opt.solver = cfg.solver;
  opt.breakpoints = cfg.breakpoints;

  RouteResult r;
  r.direct = stage("route.direct", [&] { return solve(u0, beta, cfg.time.T, cfg.time.dt, opt); });
  r.mirror = stage("route.mirror", [&] {
    return solve(extend_initial(u0), extend_beta(beta), cfg.time.T, cfg.time.dt, opt);
  });
  r.max_asymmetry = r.mirror.max_asymmetry;
  for (const auto& s : r.direct.snapshots) {
    const double t = s.u.t();
    const auto back = stage("route.restrict", [&] { return restrict_solution(r.mirror.at_time(t).u); });
    const double gap = compare_densities(s.u, back).L1;
    r.times.push_back(t);
    r.gaps.push_back(gap);
    r.max_gap = std::max(r.max_gap, gap);
  }
  return r;
}

ResidualSuite residual_suite(const ExperimentConfig& cfg, const PdeTrajectory& traj, bool refine) {
  ResidualSuite s;
  const double extent = static_cast<double>(traj.snapshots.front().u.size()) * traj.dx;
  const double reach = cfg.verification.reach > 0.0 ? cfg.verification.reach : 0.5 * extent;
  const auto family = default_family(cfg.verification.family_size, reach);
  const auto times = report_times(cfg, cfg.time.T);

  s.report = evaluate_residuals(traj, family, times);
  s.max_generalized = s.report.max_abs(ResidualForm::generalized);
  s.max_weak = s.report.max_abs(ResidualForm::weak);
  std::map<std::pair<std::string, double>, double> gen;
  for (const auto& e : s.report.entries) {
    if (e.form == ResidualForm::generalized) gen[{e.phi_id, e.t}] = e.value;
  }
  for (const auto& e : s.report.entries) {
    if (e.form != ResidualForm::weak) continue;
    auto it = gen.find({e.phi_id, e.t});
    if (it != gen.end()) s.max_gap = std::max(s.max_gap, std::abs(it->second - e.value));
  }
  s.gap_constant = s.max_gap / traj.dx;

  if (refine) {
    const auto fine = solve_half_line(cfg, 0.5 * traj.dx, 0.5 * traj.dt);
    const auto rep = evaluate_residuals(fine, family, times);
    s.refined_max = std::max(rep.max_abs(ResidualForm::generalized), rep.max_abs(ResidualForm::weak));
  }

  // a test function with phi'(0) != 0 and its cutoff transforms
  const auto phi = make_bump(0.5, 1.0, false);
  const double T = cfg.time.T;
  s.cutoff_limit = state_change(traj, phi, T) - boundary_form_residual(traj, phi, T);
  s.cutoff_reference_weak = weak_residual(traj, phi, T);
  auto ladder = cfg.verification.eps_ladder;
  std::sort(ladder.begin(), ladder.end(), std::greater<>());
  s.ladder_monotone = !ladder.empty();
  for (double eps : ladder) {
    const auto phi_eps = cutoff_transform(phi, eps);
    const double value = boundary_form_residual(traj, phi_eps, T);
    const double flux = state_change(traj, phi_eps, T) - value;
    const CutoffRung rung{eps, value, flux, std::abs(flux - s.cutoff_limit)};
    if (!s.ladder.empty() && !(rung.delta < s.ladder.back().delta)) s.ladder_monotone = false;
    s.ladder.push_back(rung);
  }
  if (!s.ladder.empty()) s.cutoff_final_gap = std::abs(s.ladder.back().boundary_form - s.cutoff_reference_weak);
  return s;
}

ParticleRunConfig particle_run_config(const ExperimentConfig& cfg, unsigned threads) {
  const auto& p = cfg.particle;
  ParticleRunConfig r;
  r.scheme = p.scheme;
  r.particles = p.particles;
  r.dt = p.dt;
  r.T = p.T > 0.0 ? p.T : cfg.time.T;
  r.snapshot_times = cfg.time.snapshots;
  r.estimator = p.estimator;
  r.k_sync = p.k_sync;
  r.seed = p.seed;
  r.local_time_eps = p.local_time_eps;
  const auto steps = static_cast<std::size_t>(std::llround(r.T / r.dt));
  r.local_time_every = std::max<std::size_t>(1, steps / 100);
  r.policy = p.policy;
  r.threads = std::max(1u, threads);
  return r;
}

Grid1D particle_grid(const ExperimentConfig& cfg, const Grid1D& pde_grid) {
  return pde_grid.coarsened(cfg.particle.bin_factor);
}

Report run(const ExperimentConfig& cfg_in, Pipeline pipeline, const RunOptions& opt) {
  ExperimentConfig cfg = cfg_in;
  if (opt.seed) cfg.particle.seed = *opt.seed;
  Report report;
  report.pipeline = to_string(pipeline);
  report.config = to_json(cfg);
  report.config_hash = content_hash(report.config);
  report.seed = cfg.particle.seed;
  report.threads = opt.threads.value_or(1);
  Context ctx{cfg, report, opt.out, report.threads};
  if (ctx.dir) std::filesystem::create_directories(*ctx.dir);

  const Grid1D grid = stage("config", [&] { return build_grid(cfg); });
  const auto beta = stage("config", [&] { return build_graph(cfg.graph); });
  const auto u0 = stage("config", [&] { return build_u0(cfg, grid); });
  validation_section(ctx, beta, u0);
  report.sections["grid"] = {{"cells", grid.size()}, {"dx", grid.dx()}, {"x_max", grid.extent()}};

  switch (pipeline) {
    case Pipeline::pde: {
      (void)run_pde_stage(ctx, true);
      break;
    }
    case Pipeline::particle: {
      const auto res = run_particle_stage(ctx, cfg, grid);
      particle_metrics(ctx, res, cfg, "particle.");
      exact_particle_metrics(ctx, res, u0, "particle.", "");
      write_particle_artifacts(ctx, res, "");
      break;
    }
    case Pipeline::compare: {
      const auto traj = run_pde_stage(ctx, true);
      const auto res = run_particle_stage(ctx, cfg, grid);
      particle_metrics(ctx, res, cfg, "particle.");
      exact_particle_metrics(ctx, res, u0, "particle.", "_particle");
      write_particle_artifacts(ctx, res, "_particle");
      compare_marginals(ctx, traj, res, cfg.particle.bin_factor, "compare.particle_pde.",
                        cfg.tolerances.particle_pde_l1, "_particle");

      // the other scheme on the same seed, for equivalence in law
      ExperimentConfig other = cfg;
      other.particle.scheme =
          cfg.particle.scheme == Scheme::direct_reflect ? Scheme::wholeline_fold : Scheme::direct_reflect;
      other.particle.local_time_eps.clear();
      const auto res2 = run_particle_stage(ctx, other, grid);
      const std::string tag2 = "_" + to_string(other.particle.scheme);
      write_particle_artifacts(ctx, res2, tag2);
      json rows = json::array();
      for (const auto& m : res.marginals) {
        const double t = m.field.t();
        if (t <= 0.0) continue;
        const auto d = compare_densities(m.field, res2.marginal_at(t).field);
        report.add_upper(tag_time("compare.scheme_l1", t), d.L1, cfg.tolerances.scheme_l1,
                         snapshot_name("density" + tag2, t));
        rows.push_back({{"t", t}, {"L1", d.L1}, {"W1", d.W1}});
      }
      report.sections["compare.scheme_distances"] = rows;
      break;
    }
    case Pipeline::verify: {
      const auto traj = run_pde_stage(ctx, true);
      const auto suite = stage("verify", [&] { return residual_suite(cfg, traj, cfg.verification.refine); });
      const auto& tol = cfg.tolerances;
      report.add_upper("verify.max_generalized_residual", suite.max_generalized, tol.residual, "residuals.json");
      report.add_upper("verify.max_weak_residual", suite.max_weak, tol.residual, "residuals.json");
      report.add("verify.max_generalized_weak_gap", suite.max_gap, "residuals.json");
      report.add("verify.gap_constant_C", suite.gap_constant, "residuals.json");
      if (suite.refined_max) {
        const double coarse = std::max(suite.max_generalized, suite.max_weak);
        report.add("verify.refined_max_residual", *suite.refined_max, "residuals.json");
        report.add_lower("verify.refinement_ratio", *suite.refined_max > 0.0 ? coarse / *suite.refined_max : 0.0,
                         tol.residual_rate, "residuals.json");
      }
      json ladder = json::array();
      for (const auto& r : suite.ladder) {
        ladder.push_back(
            {{"eps", r.eps}, {"boundary_form", r.boundary_form}, {"flux_term", r.flux_term}, {"delta", r.delta}});
      }
      for (std::size_t k = 1; k < suite.ladder.size(); ++k) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "verify.cutoff_step[eps=%g]", suite.ladder[k].eps);
        report.add(buf, std::abs(suite.ladder[k].boundary_form - suite.ladder[k - 1].boundary_form), "residuals.json");
      }
      report.add_lower("verify.cutoff_monotone", suite.ladder_monotone ? 1.0 : 0.0, 1.0, "residuals.json");
      report.add_upper("verify.cutoff_final_gap", suite.cutoff_final_gap,
                       tol.cutoff_floor_factor * suite.max_generalized, "residuals.json");
      if (ctx.dir) {
        json doc{{"entries", hlpm::to_json(suite.report)},
                 {"cutoff_ladder", ladder},
                 {"cutoff_limit", suite.cutoff_limit},
                 {"cutoff_reference_weak", suite.cutoff_reference_weak},
                 {"max_generalized", suite.max_generalized},
                 {"max_weak", suite.max_weak},
                 {"gap_constant_C", suite.gap_constant}};
        if (suite.refined_max) doc["refined_max"] = *suite.refined_max;
        write_json(*ctx.dir / "residuals.json", doc);
        ctx.artifact("residuals.json");
      }
      report.sections["cutoff_ladder"] = ladder;
      break;
    }
    case Pipeline::route_check: {
      const auto route = route_equivalence(cfg);
      pde_metrics(ctx, route.direct, "route.direct.");
      pde_metrics(ctx, route.mirror, "route.mirror.");
      for (std::size_t k = 0; k < route.times.size(); ++k) {
        report.add_upper(tag_time("route.gap_l1", route.times[k]), route.gaps[k], cfg.tolerances.route_gap,
                         snapshot_name("density_mirror", route.times[k]));
      }
      report.add_upper("route.max_asymmetry", route.max_asymmetry, cfg.tolerances.evenness, "metrics.csv");
      if (ctx.dir) {
        const auto times = route.direct.times();
        for (const auto& f : write_trajectory(*ctx.dir, route.direct, times)) ctx.artifact(f);
        for (double t : times) {
          const auto name = snapshot_name("density_mirror", t);
          write_density_csv(*ctx.dir / name, restrict_solution(route.mirror.at_time(t).u));
          ctx.artifact(name);
        }
      }
      break;
    }
    case Pipeline::sweep: {
      if (!cfg.sweep) throw StageError("sweep", "config has no sweep block");
      const auto traj = run_pde_stage(ctx, false);
      json rows = json::array();
      for (double v : cfg.sweep->values) {
        const auto point = with_sweep_value(cfg, cfg.sweep->parameter, v);
        const auto pg = stage("sweep", [&] { return particle_grid(point, grid); });
        const auto res = run_particle_stage(ctx, point, grid);
        const auto& m = res.marginals.back();
        const auto d = compare_densities(m.field, coarsen(traj.at_time(m.field.t()).u, point.particle.bin_factor));
        char buf[96];
        std::snprintf(buf, sizeof buf, "sweep[%s=%g].", cfg.sweep->parameter.c_str(), v);
        report.add(std::string(buf) + "L1", d.L1, "sweep.csv");
        report.add(std::string(buf) + "W1", d.W1, "sweep.csv");
        report.add(std::string(buf) + "empty_cell_exposure", res.zero_set.empty_cell_exposure, "sweep.csv");
        rows.push_back({{"value", v}, {"L1", d.L1}, {"W1", d.W1}, {"bins", pg.size()},
                        {"empty_cell_exposure", res.zero_set.empty_cell_exposure}});
      }
      report.sections["sweep"] = {{"parameter", cfg.sweep->parameter}, {"points", rows}};
      if (ctx.dir) {
        std::ofstream out(*ctx.dir / "sweep.csv");
        out.precision(17);
        out << cfg.sweep->parameter << ",L1,W1,empty_cell_exposure\n";
        for (const auto& r : rows) {
          out << r["value"].get<double>() << ',' << r["L1"].get<double>() << ',' << r["W1"].get<double>() << ','
              << r["empty_cell_exposure"].get<double>() << '\n';
        }
        ctx.artifact("sweep.csv");
      }
      break;
    }
  }

  if (ctx.dir) {
    std::ofstream out(*ctx.dir / "metrics.csv");
    out.precision(17);
    out << "name,value,bound,limit,passed\n";
    for (const auto& m : report.metrics) {
      out << '"' << m.name << "\"," << m.value << ','
          << (m.bound == Bound::upper ? "max" : m.bound == Bound::lower ? "min" : "") << ',';
      if (m.bound != Bound::none) out << m.limit;
      out << ',' << (m.passed ? 1 : 0) << '\n';
    }
    report.artifacts.push_back("metrics.csv");
    report.artifacts.push_back("report.json");
    write_json(*ctx.dir / "report.json", report.to_json());
  }
  return report;
}

}  // namespace hlpm
