#include "hlpm/config.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#include "hlpm/errors.hpp"

namespace hlpm {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ValidationError("config " + path + ": " + what);
}

void check_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
  if (!obj.is_object()) fail(path, "must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) fail(path.empty() ? key : path + "." + key, "unknown field");
  }
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

double number(const json& obj, const std::string& path, const std::string& key) {
  const auto& v = obj.at(key);
  if (!v.is_number()) fail(join(path, key), "must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(join(path, key), "must be finite");
  return x;
}

double positive(const json& obj, const std::string& path, const std::string& key) {
  const double x = number(obj, path, key);
  if (!(x > 0.0)) fail(join(path, key), "must be positive");
  return x;
}

double non_negative(const json& obj, const std::string& path, const std::string& key) {
  const double x = number(obj, path, key);
  if (!(x >= 0.0)) fail(join(path, key), "must be non-negative");
  return x;
}

std::size_t count(const json& obj, const std::string& path, const std::string& key, std::size_t min) {
  const auto& v = obj.at(key);
  if (!v.is_number_integer() && !v.is_number_unsigned()) fail(join(path, key), "must be an integer");
  const auto x = v.get<long long>();
  if (x < static_cast<long long>(min)) fail(join(path, key), "must be >= " + std::to_string(min));
  return static_cast<std::size_t>(x);
}

std::vector<double> numbers(const json& obj, const std::string& path, const std::string& key) {
  const auto& v = obj.at(key);
  if (!v.is_array()) fail(join(path, key), "must be an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) fail(join(path, key) + "[" + std::to_string(i) + "]", "must be a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

std::string text(const json& obj, const std::string& path, const std::string& key) {
  const auto& v = obj.at(key);
  if (!v.is_string()) fail(join(path, key), "must be a string");
  return v.get<std::string>();
}

CatalogSpec catalog(const json& obj, const std::string& path) {
  if (!obj.is_object()) fail(path, "must be an object");
  if (!obj.contains("name")) fail(join(path, "name"), "missing");
  CatalogSpec s;
  s.name = text(obj, path, "name");
  s.params = obj;
  s.params.erase("name");
  return s;
}

template <typename Fn>
auto wrap(const std::string& path, Fn&& fn) {
  try {
    return fn();
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    if (msg.rfind("config ", 0) == 0) throw;
    fail(path, msg);
  } catch (const DomainError& e) {
    fail(path, e.what());
  }
}

}  // namespace

MonotoneGraph build_graph(const CatalogSpec& spec) {
  const auto& p = spec.params;
  const std::string path = "graph";
  auto keys = [&](const std::set<std::string>& allowed) { check_keys(p, path, allowed); };
  return wrap(path, [&]() -> MonotoneGraph {
    if (spec.name == "identity") {
      keys({});
      return graphs::identity();
    }
    if (spec.name == "power") {
      keys({"m"});
      return graphs::power(positive(p, path, "m"));
    }
    if (spec.name == "stopped_linear") {
      keys({"u_c"});
      return graphs::stopped_linear(non_negative(p, path, "u_c"));
    }
    if (spec.name == "saturating") {
      keys({});
      return graphs::saturating();
    }
    if (spec.name == "jump") {
      keys({"a", "lo", "hi"});
      return graphs::jump(positive(p, path, "a"), non_negative(p, path, "lo"), positive(p, path, "hi"));
    }
    if (spec.name == "zero") {
      keys({});
      return graphs::zero();
    }
    if (spec.name == "table") {
      keys({"u", "beta"});
      return graphs::table(numbers(p, path, "u"), numbers(p, path, "beta"));
    }
    fail(join(path, "name"), "unknown graph '" + spec.name + "'");
  });
}

InitialData build_initial(const CatalogSpec& spec) {
  const auto& p = spec.params;
  const std::string path = "u0";
  if (spec.name == "indicator") {
    check_keys(p, path, {"a", "b", "height"});
    const double a = non_negative(p, path, "a");
    const double b = number(p, path, "b");
    if (!(b > a)) fail(join(path, "b"), "must exceed u0.a");
    const double h = p.contains("height") ? positive(p, path, "height") : 1.0 / (b - a);
    return {[a, b, h](double x) { return x >= a && x < b ? h : 0.0; }, b};
  }
  if (spec.name == "triangle") {
    // symmetric hat centred at `center` with half-width `width`, unit mass
    check_keys(p, path, {"center", "width"});
    const double c = non_negative(p, path, "center");
    const double w = positive(p, path, "width");
    if (c < w) fail(join(path, "width"), "support must stay in [0, inf)");
    return {[c, w](double x) { return std::max(0.0, 1.0 - std::abs(x - c) / w) / w; }, c + w};
  }
  if (spec.name == "truncated_gaussian") {
    check_keys(p, path, {"mean", "sigma", "cut"});
    const double m = non_negative(p, path, "mean");
    const double s = positive(p, path, "sigma");
    const double cut = p.contains("cut") ? positive(p, path, "cut") : 4.0;
    // normalized over [max(0, m - cut s), m + cut s]
    const double lo = std::max(0.0, m - cut * s);
    const double hi = m + cut * s;
    const double z = 0.5 * (std::erf((hi - m) / (s * std::sqrt(2.0))) - std::erf((lo - m) / (s * std::sqrt(2.0))));
    const double k = 1.0 / (z * s * std::sqrt(2.0 * M_PI));
    return {[m, s, lo, hi, k](double x) {
              if (x < lo || x > hi) return 0.0;
              const double y = (x - m) / s;
              return k * std::exp(-0.5 * y * y);
            },
            hi};
  }
  if (spec.name == "table") {
    // piecewise linear through (x_k, value_k), zero outside [x_0, x_last]
    check_keys(p, path, {"x", "values"});
    auto xs = numbers(p, path, "x");
    auto vs = numbers(p, path, "values");
    if (xs.size() != vs.size() || xs.size() < 2) fail(path, "x and values need equal length >= 2");
    for (std::size_t i = 1; i < xs.size(); ++i) {
      if (!(xs[i] > xs[i - 1])) fail(join(path, "x"), "must be strictly increasing");
    }
    if (xs.front() < 0.0) fail(join(path, "x"), "must lie in [0, inf)");
    const double top = xs.back();
    return {[xs, vs](double x) {
              if (x < xs.front() || x > xs.back()) return 0.0;
              auto it = std::upper_bound(xs.begin(), xs.end(), x);
              std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(it - xs.begin()), xs.size() - 1);
              k = std::max<std::size_t>(k, 1);
              const double w = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
              return vs[k - 1] + w * (vs[k] - vs[k - 1]);
            },
            top};
  }
  fail(join(path, "name"), "unknown initial density '" + spec.name + "'");
}

ExperimentConfig parse_config(const json& doc) {
  check_keys(doc, "", {"name", "graph", "u0", "domain", "time", "solver", "breakpoints", "particle", "verification",
                       "tolerances", "sweep"});
  ExperimentConfig c;
  c.source = doc;
  if (doc.contains("name")) c.name = text(doc, "", "name");
  if (doc.contains("graph")) c.graph = catalog(doc["graph"], "graph");
  if (doc.contains("u0")) c.u0 = catalog(doc["u0"], "u0");

  if (doc.contains("domain")) {
    const auto& d = doc["domain"];
    check_keys(d, "domain", {"x_max", "dx"});
    if (d.contains("x_max")) c.domain.x_max = non_negative(d, "domain", "x_max");
    if (d.contains("dx")) c.domain.dx = positive(d, "domain", "dx");
  }
  if (doc.contains("time")) {
    const auto& t = doc["time"];
    check_keys(t, "time", {"T", "dt", "snapshots", "stride"});
    if (t.contains("T")) c.time.T = positive(t, "time", "T");
    if (t.contains("dt")) c.time.dt = positive(t, "time", "dt");
    if (t.contains("snapshots")) c.time.snapshots = numbers(t, "time", "snapshots");
    if (t.contains("stride")) c.time.stride = count(t, "time", "stride", 1);
  }
  for (std::size_t i = 0; i < c.time.snapshots.size(); ++i) {
    const double s = c.time.snapshots[i];
    if (s < 0.0 || s > c.time.T + 1e-12) fail("time.snapshots[" + std::to_string(i) + "]", "must lie in [0, T]");
  }
  if (c.time.dt > c.time.T) fail("time.dt", "must not exceed time.T");

  if (doc.contains("solver")) {
    const auto& s = doc["solver"];
    check_keys(s, "solver", {"sweep_tolerance", "residual_tolerance", "max_sweeps", "max_newton", "newton"});
    if (s.contains("sweep_tolerance")) c.solver.sweep_tolerance = positive(s, "solver", "sweep_tolerance");
    if (s.contains("residual_tolerance")) c.solver.residual_tolerance = positive(s, "solver", "residual_tolerance");
    if (s.contains("max_sweeps")) c.solver.max_sweeps = static_cast<int>(count(s, "solver", "max_sweeps", 1));
    if (s.contains("max_newton")) c.solver.max_newton = static_cast<int>(count(s, "solver", "max_newton", 0));
    if (s.contains("newton")) {
      if (!s["newton"].is_boolean()) fail("solver.newton", "must be a boolean");
      c.solver.newton = s["newton"].get<bool>();
    }
  }
  if (doc.contains("breakpoints")) c.breakpoints = numbers(doc, "", "breakpoints");

  if (doc.contains("particle")) {
    const auto& p = doc["particle"];
    const std::string path = "particle";
    check_keys(p, path, {"N", "dt", "T", "scheme", "estimator", "bandwidth", "bin_factor", "k_sync", "seed",
                         "local_time_eps", "policy"});
    auto& q = c.particle;
    if (p.contains("N")) q.particles = count(p, path, "N", 1);
    if (p.contains("dt")) q.dt = positive(p, path, "dt");
    if (p.contains("T")) q.T = positive(p, path, "T");
    if (p.contains("scheme")) {
      const auto name = text(p, path, "scheme");
      q.scheme = wrap(join(path, "scheme"), [&] { return parse_scheme(name); });
    }
    if (p.contains("estimator")) {
      const auto name = text(p, path, "estimator");
      q.estimator.method = wrap(join(path, "estimator"), [&] { return parse_estimator(name); });
    }
    if (p.contains("bandwidth")) q.estimator.bandwidth = positive(p, path, "bandwidth");
    if (q.estimator.method == EstimatorMethod::gaussian_kde && !(q.estimator.bandwidth > 0.0)) {
      fail(join(path, "bandwidth"), "required and positive for gaussian_kde");
    }
    if (p.contains("bin_factor")) q.bin_factor = count(p, path, "bin_factor", 1);
    if (p.contains("k_sync")) q.k_sync = count(p, path, "k_sync", 1);
    if (p.contains("seed")) q.seed = static_cast<std::uint64_t>(count(p, path, "seed", 0));
    if (p.contains("local_time_eps")) {
      q.local_time_eps = numbers(p, path, "local_time_eps");
      for (double e : q.local_time_eps) {
        if (!(e > 0.0)) fail(join(path, "local_time_eps"), "entries must be positive");
      }
    }
    if (p.contains("policy")) {
      const auto name = text(p, path, "policy");
      q.policy = wrap(join(path, "policy"), [&] { return parse_selection_policy(name); });
    }
  }
  if (doc.contains("verification")) {
    const auto& v = doc["verification"];
    check_keys(v, "verification", {"family_size", "reach", "eps_ladder", "refine"});
    if (v.contains("family_size")) c.verification.family_size = count(v, "verification", "family_size", 1);
    if (v.contains("reach")) c.verification.reach = positive(v, "verification", "reach");
    if (v.contains("eps_ladder")) c.verification.eps_ladder = numbers(v, "verification", "eps_ladder");
    if (v.contains("refine")) {
      if (!v["refine"].is_boolean()) fail("verification.refine", "must be a boolean");
      c.verification.refine = v["refine"].get<bool>();
    }
  }
  if (doc.contains("tolerances")) {
    const auto& t = doc["tolerances"];
    auto& r = c.tolerances;
    std::vector<std::pair<std::string, double*>> fields{
        {"mass", &r.mass},
        {"positivity", &r.positivity},
        {"evenness", &r.evenness},
        {"route_gap", &r.route_gap},
        {"residual", &r.residual},
        {"residual_rate", &r.residual_rate},
        {"cutoff_floor_factor", &r.cutoff_floor_factor},
        {"pde_exact_l1", &r.pde_exact_l1},
        {"particle_pde_l1", &r.particle_pde_l1},
        {"particle_exact_l1", &r.particle_exact_l1},
        {"scheme_l1", &r.scheme_l1},
        {"skorokhod_factor", &r.skorokhod_factor},
        {"local_time_rel", &r.local_time_rel},
        {"local_time_ratio_lo", &r.local_time_ratio_lo},
        {"local_time_ratio_hi", &r.local_time_ratio_hi},
    };
    std::set<std::string> allowed;
    for (const auto& f : fields) allowed.insert(f.first);
    check_keys(t, "tolerances", allowed);
    for (auto& [key, dst] : fields) {
      if (t.contains(key)) *dst = positive(t, "tolerances", key);
    }
  }
  if (doc.contains("sweep")) {
    const auto& s = doc["sweep"];
    check_keys(s, "sweep", {"parameter", "values"});
    SweepSpec sw;
    sw.parameter = text(s, "sweep", "parameter");
    static const std::set<std::string> known{"particles", "dt", "k_sync", "bandwidth", "bin_factor", "seed"};
    if (!known.count(sw.parameter)) fail("sweep.parameter", "unknown parameter '" + sw.parameter + "'");
    sw.values = numbers(s, "sweep", "values");
    if (sw.values.empty()) fail("sweep.values", "must not be empty");
    c.sweep = sw;
  }

  // catalog entries must exist and carry valid parameters
  (void)build_graph(c.graph);
  (void)build_initial(c.u0);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ValidationError("config " + path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

json to_json(const ExperimentConfig& c) {
  json g = c.graph.params;
  g["name"] = c.graph.name;
  json u = c.u0.params;
  u["name"] = c.u0.name;
  json doc{
      {"name", c.name},
      {"graph", g},
      {"u0", u},
      {"domain", {{"x_max", c.domain.x_max}, {"dx", c.domain.dx}}},
      {"time", {{"T", c.time.T}, {"dt", c.time.dt}, {"snapshots", c.time.snapshots}, {"stride", c.time.stride}}},
      {"solver",
       {{"sweep_tolerance", c.solver.sweep_tolerance},
        {"residual_tolerance", c.solver.residual_tolerance},
        {"max_sweeps", c.solver.max_sweeps},
        {"max_newton", c.solver.max_newton},
        {"newton", c.solver.newton}}},
      {"particle",
       {{"N", c.particle.particles},
        {"dt", c.particle.dt},
        {"T", c.particle.T > 0.0 ? c.particle.T : c.time.T},
        {"scheme", to_string(c.particle.scheme)},
        {"estimator", to_string(c.particle.estimator.method)},
        {"bin_factor", c.particle.bin_factor},
        {"k_sync", c.particle.k_sync},
        {"seed", c.particle.seed},
        {"local_time_eps", c.particle.local_time_eps},
        {"policy", to_string(c.particle.policy)}}},
      {"verification",
       {{"family_size", c.verification.family_size},
        {"eps_ladder", c.verification.eps_ladder},
        {"refine", c.verification.refine}}},
  };
  if (c.particle.estimator.bandwidth > 0.0) doc["particle"]["bandwidth"] = c.particle.estimator.bandwidth;
  if (c.verification.reach > 0.0) doc["verification"]["reach"] = c.verification.reach;
  if (c.breakpoints) doc["breakpoints"] = *c.breakpoints;
  const auto& r = c.tolerances;
  doc["tolerances"] = {{"mass", r.mass},
                       {"positivity", r.positivity},
                       {"evenness", r.evenness},
                       {"route_gap", r.route_gap},
                       {"residual", r.residual},
                       {"residual_rate", r.residual_rate},
                       {"cutoff_floor_factor", r.cutoff_floor_factor},
                       {"pde_exact_l1", r.pde_exact_l1},
                       {"particle_pde_l1", r.particle_pde_l1},
                       {"particle_exact_l1", r.particle_exact_l1},
                       {"scheme_l1", r.scheme_l1},
                       {"skorokhod_factor", r.skorokhod_factor},
                       {"local_time_rel", r.local_time_rel},
                       {"local_time_ratio_lo", r.local_time_ratio_lo},
                       {"local_time_ratio_hi", r.local_time_ratio_hi}};
  if (c.sweep) doc["sweep"] = {{"parameter", c.sweep->parameter}, {"values", c.sweep->values}};
  return doc;
}

std::string content_hash(const json& doc) {
  const std::string body = doc.dump();
  const std::string blob = "blob " + std::to_string(body.size()) + '\0' + body;
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(blob.data(), blob.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw NumericalError("sha256 failed");
  }
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

Grid1D build_grid(const ExperimentConfig& cfg) {
  double x_max = cfg.domain.x_max;
  if (x_max == 0.0) {
    const auto beta = build_graph(cfg.graph);
    x_max = auto_extent(build_initial(cfg.u0).support_max, beta.growth_constant(), cfg.time.T);
  }
  auto cells = static_cast<std::size_t>(std::ceil(x_max / cfg.domain.dx - 1e-9));
  if (cells == 0) fail("domain.x_max", "must hold at least one cell");
  // whole particle bins
  const std::size_t f = cfg.particle.bin_factor;
  cells = (cells + f - 1) / f * f;
  return Grid1D::half_line(cells, cfg.domain.dx);
}

DensityField build_u0(const ExperimentConfig& cfg, const Grid1D& grid) {
  return sample_density(grid, build_initial(cfg.u0).density, 0.0);
}

}  // namespace hlpm
