#include "hlpm/monotone_graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "hlpm/errors.hpp"

namespace hlpm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool limits_differ(double a, double b) {
  return std::abs(a - b) > 1e-13 * std::max({1.0, std::abs(a), std::abs(b)});
}

// Samples of a segment used by the sampled checks. Unbounded segments are
// sampled geometrically out to u_max.
std::vector<double> segment_samples(const Segment& s, const GraphCheckOptions& opt) {
  std::vector<double> pts;
  const double hi = std::isfinite(s.hi) ? s.hi : std::max(opt.u_max, s.lo + 1.0);
  const int n = std::max(opt.per_segment, 2);
  for (int j = 0; j < n; ++j) {
    pts.push_back(s.lo + (hi - s.lo) * static_cast<double>(j) / n);
  }
  if (!std::isfinite(s.hi)) {
    for (int k = opt.levels; k >= 0; --k) {
      double u = s.lo + (hi - s.lo) * std::ldexp(1.0, -k);
      pts.push_back(u);
    }
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

}  // namespace

PiecewiseGraph::PiecewiseGraph(std::vector<Segment> segments) : segments_(std::move(segments)) {
  if (segments_.empty()) throw ValidationError("graph needs at least one segment");
  if (segments_.front().lo != 0.0) throw ValidationError("first segment must start at u = 0");
  if (std::isfinite(segments_.back().hi)) throw ValidationError("last segment must extend to infinity");
  for (std::size_t k = 0; k < segments_.size(); ++k) {
    const auto& s = segments_[k];
    if (!s.value) throw ValidationError("segment without value function");
    if (!(s.hi > s.lo)) throw ValidationError("segment with empty range");
    if (k > 0) {
      if (segments_[k - 1].hi != s.lo) throw ValidationError("segments are not contiguous");
      const double left = segments_[k - 1].value(s.lo);
      const double right = s.value(s.lo);
      if (limits_differ(left, right)) jumps_.push_back({s.lo, left, right});
    }
  }
}

std::size_t PiecewiseGraph::segment_index(double u) const {
  auto it = std::upper_bound(segments_.begin(), segments_.end(), u,
                             [](double v, const Segment& s) { return v < s.lo; });
  return static_cast<std::size_t>(std::distance(segments_.begin(), it)) - 1;
}

double PiecewiseGraph::value_right(double u) const { return segments_[segment_index(u)].value(u); }

double PiecewiseGraph::value_left(double u) const {
  const std::size_t k = segment_index(u);
  if (k > 0 && u == segments_[k].lo) return segments_[k - 1].value(u);
  return segments_[k].value(u);
}

Interval PiecewiseGraph::eval(double u) const {
  const std::size_t k = segment_index(u);
  const double right = segments_[k].value(u);
  if (k > 0 && u == segments_[k].lo) {
    const double left = segments_[k - 1].value(u);
    return {std::min(left, right), std::max(left, right)};
  }
  return {right, right};
}

PiecewiseGraph PiecewiseGraph::rescaled(double arg_scale, double value_scale) const {
  std::vector<Segment> out;
  out.reserve(segments_.size());
  for (const auto& s : segments_) {
    Segment t;
    t.lo = s.lo / arg_scale;
    t.hi = std::isfinite(s.hi) ? s.hi / arg_scale : kInf;
    t.affine = s.affine;
    t.value = [f = s.value, arg_scale, value_scale](double u) { return value_scale * f(arg_scale * u); };
    if (s.slope) {
      t.slope = [g = s.slope, arg_scale, value_scale](double u) {
        return value_scale * arg_scale * g(arg_scale * u);
      };
    }
    out.push_back(std::move(t));
  }
  return PiecewiseGraph(std::move(out));
}

MonotoneGraph::MonotoneGraph(std::string name, std::vector<Segment> segments, double growth_constant)
    : MonotoneGraph(std::move(name), PiecewiseGraph(std::move(segments)), growth_constant, {}) {}

MonotoneGraph::MonotoneGraph(std::string name, PiecewiseGraph graph, double growth_constant,
                             std::vector<std::string> warnings)
    : name_(std::move(name)),
      graph_(std::move(graph)),
      growth_constant_(growth_constant),
      warnings_(std::move(warnings)) {
  if (!(growth_constant_ > 0.0)) throw ValidationError("growth constant must be positive");
  if (std::abs(graph_.segments().front().value(0.0)) > 1e-14) {
    throw ValidationError("graph " + name_ + " violates beta(0) = 0");
  }
  if (auto msg = check_monotone(); !msg.empty()) {
    throw ValidationError("graph " + name_ + " is not monotone: " + msg);
  }
}

MonotoneGraph MonotoneGraph::rescaled(std::string name, double arg_scale, double value_scale) const {
  return MonotoneGraph(std::move(name), graph_.rescaled(arg_scale, value_scale),
                       growth_constant_ * value_scale * arg_scale, warnings_);
}

Interval MonotoneGraph::eval(double u) const {
  if (!(u >= 0.0)) {
    std::ostringstream os;
    os << "beta evaluated at u = " << u << " < 0";
    throw DomainError(os.str());
  }
  return graph_.eval(u);
}

Resolvent MonotoneGraph::resolvent(double mu, double y) const {
  if (!(mu > 0.0)) throw DomainError("resolvent needs mu > 0");
  if (!(y >= 0.0)) throw DomainError("resolvent needs y >= 0");
  const auto& segs = graph_.segments();

  for (std::size_t k = 0; k < segs.size(); ++k) {
    const Segment& s = segs[k];
    if (k > 0) {
      // filled jump at s.lo absorbs y in [lo + mu beta(lo-), lo + mu beta(lo+)]
      const double top = s.lo + mu * s.value(s.lo);
      if (y <= top) return {s.lo, (y - s.lo) / mu};
    }
    double b = std::isfinite(s.hi) ? s.hi : kInf;
    if (std::isfinite(b) && y >= b + mu * segs[k].value(b)) continue;  // beyond this piece
    b = std::min(b, std::max(y, s.lo));
    double a = s.lo;

    if (s.affine) {
      const double f0 = s.value(s.lo);
      const double sl = s.slope ? s.slope(s.lo) : 0.0;
      double u = (y - mu * (f0 - sl * s.lo)) / (1.0 + mu * sl);
      u = std::clamp(u, a, b);
      return {u, (y - u) / mu};
    }

    auto h = [&](double u) { return u + mu * s.value(u) - y; };
    double u = 0.5 * (a + b);
    if (h(a) >= 0.0) return {a, (y - a) / mu};
    const double ftol = 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, y);
    for (int it = 0; it < kMaxIterations; ++it) {
      const double hu = h(u);
      if (std::abs(hu) <= ftol) return {u, (y - u) / mu};
      if (hu < 0.0) a = u; else b = u;
      if (b - a <= kTolerance * 1e-3 * std::max(1.0, std::abs(u))) {
        return {u, (y - u) / mu};
      }
      double next = 0.5 * (a + b);
      if (s.slope) {
        const double d = 1.0 + mu * s.slope(u);
        const double newton = u - hu / d;
        if (std::isfinite(newton) && newton > a && newton < b) next = newton;
      }
      u = next;
    }
    if (b - a <= kTolerance * std::max(1.0, std::abs(u))) return {u, (y - u) / mu};
    std::ostringstream os;
    os.precision(17);
    os << "resolvent of " << name_ << " did not converge: mu = " << mu << ", y = " << y
       << ", bracket [" << a << ", " << b << "]";
    throw NumericalError(os.str());
  }
  throw NumericalError("resolvent bracket search fell off the last segment");
}

double MonotoneGraph::yosida_slope(double mu, const Resolvent& r) const {
  const auto& segs = graph_.segments();
  const std::size_t k = graph_.segment_index(r.u);
  const Segment& s = segs[k];
  if (k > 0 && r.u == s.lo) {
    const double left = segs[k - 1].value(s.lo);
    const double right = s.value(s.lo);
    if (limits_differ(left, right) && r.eta > left && r.eta < right) return 1.0 / mu;
  }
  double d = 0.0;
  if (s.slope) {
    d = s.slope(r.u);
  } else {
    const double h = 1e-7 * std::max(1.0, r.u);
    const double lo = std::max(s.lo, r.u - h);
    const double hi = std::isfinite(s.hi) ? std::min(s.hi, r.u + h) : r.u + h;
    d = hi > lo ? (s.value(hi) - s.value(lo)) / (hi - lo) : 0.0;
  }
  d = std::max(d, 0.0);
  return d / (1.0 + mu * d);
}

std::string MonotoneGraph::check_monotone(const GraphCheckOptions& opt) const {
  const auto& segs = graph_.segments();
  for (const auto& s : segs) {
    const auto pts = segment_samples(s, opt);
    double prev = s.value(pts.front());
    for (std::size_t j = 1; j < pts.size(); ++j) {
      const double v = s.value(pts[j]);
      if (!std::isfinite(v)) return "non-finite value";
      if (v < prev - 1e-13 * std::max(1.0, std::abs(prev))) {
        std::ostringstream os;
        os << "decreases between u = " << pts[j - 1] << " and u = " << pts[j];
        return os.str();
      }
      prev = v;
    }
  }
  for (const auto& j : graph_.jumps()) {
    if (j.right < j.left) {
      std::ostringstream os;
      os << "downward jump at u = " << j.x;
      return os.str();
    }
  }
  return {};
}

std::string MonotoneGraph::check_growth(const GraphCheckOptions& opt) const {
  for (int k = 0; k <= opt.levels; ++k) {
    const double u = opt.u_max * std::ldexp(1.0, -k);
    const Interval v = graph_.eval(u);
    const double bound = growth_constant_ * u * (1.0 + 1e-12);
    if (std::abs(v.lo) > bound || std::abs(v.hi) > bound) {
      std::ostringstream os;
      os << "|beta(" << u << ")| = " << std::max(std::abs(v.lo), std::abs(v.hi)) << " > c u = "
         << growth_constant_ * u;
      return os.str();
    }
  }
  for (const auto& s : graph_.segments()) {
    for (double u : segment_samples(s, opt)) {
      if (u <= 0.0) continue;
      const double v = s.value(u);
      if (std::abs(v) > growth_constant_ * u * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "|beta(" << u << ")| = " << std::abs(v) << " > c u = " << growth_constant_ * u;
        return os.str();
      }
    }
  }
  return {};
}

Interval PhiGraph::eval(double u) const {
  if (!(u >= 0.0)) throw DomainError("Phi evaluated at a negative argument");
  if (u == 0.0) return value_at_zero_;
  return graph_.eval(u);
}

PhiGraph phi_from_beta(const MonotoneGraph& beta) {
  std::vector<Segment> segs;
  for (const auto& s : beta.graph().segments()) {
    Segment t;
    t.lo = s.lo;
    t.hi = s.hi;
    t.value = [f = s.value](double u) {
      if (u <= 0.0) return 0.0;
      return std::sqrt(std::max(f(u), 0.0) / u);
    };
    segs.push_back(std::move(t));
  }
  // liminf / limsup at 0+ from the far tail of a geometric grid
  const auto& first = beta.graph().segments().front();
  double lo = kInf;
  double hi = 0.0;
  for (int k = 900; k <= 1000; k += 4) {
    const double u = std::ldexp(1.0, -k);
    if (u >= first.hi) continue;
    const double phi = std::sqrt(std::max(first.value(u), 0.0) / u);
    lo = std::min(lo, phi);
    hi = std::max(hi, phi);
  }
  if (!std::isfinite(lo)) lo = hi = 0.0;
  auto snap = [](double v) { return v < 1e-100 ? 0.0 : v; };
  return PhiGraph(PiecewiseGraph(std::move(segs)), {snap(lo), snap(hi)});
}

SelectionPolicy parse_selection_policy(const std::string& s) {
  if (s == "right_limit") return SelectionPolicy::right_limit;
  if (s == "left_limit") return SelectionPolicy::left_limit;
  if (s == "midpoint") return SelectionPolicy::midpoint;
  throw ValidationError("unknown selection policy '" + s + "'");
}

std::string to_string(SelectionPolicy p) {
  switch (p) {
    case SelectionPolicy::right_limit: return "right_limit";
    case SelectionPolicy::left_limit: return "left_limit";
    case SelectionPolicy::midpoint: return "midpoint";
  }
  return "?";
}

Selection::Selection(PhiGraph phi, SelectionPolicy policy)
    : eval_([g = std::move(phi)](double u) { return g.eval(u); }), policy_(policy) {}

Selection::Selection(MonotoneGraph beta, SelectionPolicy policy)
    : eval_([g = std::move(beta)](double u) { return g.eval(u); }), policy_(policy) {}

Interval Selection::interval(double u) const { return eval_(u); }

// Right/left limit pick the interval end matching the graph's one-sided limit
// only for monotone graphs; for a general filled interval they pick hi/lo.
double Selection::operator()(double u) const {
  const Interval v = eval_(u);
  switch (policy_) {
    case SelectionPolicy::right_limit: return v.hi;
    case SelectionPolicy::left_limit: return v.lo;
    case SelectionPolicy::midpoint: return v.mid();
  }
  return v.mid();
}

Selection make_selection(const PhiGraph& phi, SelectionPolicy policy) { return Selection(phi, policy); }
Selection make_selection(const MonotoneGraph& beta, SelectionPolicy policy) { return Selection(beta, policy); }

DegeneracyClass classify(const MonotoneGraph& beta, const GraphCheckOptions& opt) {
  const PhiGraph phi = phi_from_beta(beta);
  const auto& segs = beta.graph().segments();

  double inf_phi = phi.value_at_zero().lo;
  for (int k = 0; k <= opt.levels; ++k) {
    const Interval v = phi.eval(opt.u_max * std::ldexp(1.0, -k));
    inf_phi = std::min(inf_phi, v.lo);
  }
  for (const auto& s : segs) {
    for (double u : segment_samples(s, opt)) {
      if (u > 0.0) inf_phi = std::min(inf_phi, phi.eval(u).lo);
    }
  }
  if (inf_phi > 1e-12) return NonDegenerate{inf_phi};

  // leading zero run of beta
  double u_c = 0.0;
  std::size_t first_live = segs.size();
  for (std::size_t k = 0; k < segs.size(); ++k) {
    const auto pts = segment_samples(segs[k], opt);
    bool all_zero = std::all_of(pts.begin(), pts.end(), [&](double u) { return segs[k].value(u) == 0.0; });
    if (std::isfinite(segs[k].hi)) all_zero = all_zero && segs[k].value(std::nextafter(segs[k].hi, 0.0)) == 0.0;
    if (!all_zero) {
      first_live = k;
      break;
    }
    u_c = segs[k].hi;
  }
  if (first_live < segs.size() && u_c > 0.0) {
    bool strict = true;
    for (std::size_t k = first_live; k < segs.size() && strict; ++k) {
      const auto pts = segment_samples(segs[k], opt);
      for (std::size_t j = 1; j < pts.size(); ++j) {
        if (!(segs[k].value(pts[j]) > segs[k].value(pts[j - 1]))) {
          strict = false;
          break;
        }
      }
    }
    if (strict) return StrictlyIncreasingAfterZero{u_c};
  }

  if (phi.value_at_zero().hi == 0.0) return Degenerate{};
  return Unclassified{};
}

std::string describe(const DegeneracyClass& c) {
  struct V {
    std::string operator()(const NonDegenerate& n) const {
      std::ostringstream os;
      os << "non_degenerate(c0=" << n.c0 << ")";
      return os.str();
    }
    std::string operator()(const Degenerate&) const { return "degenerate"; }
    std::string operator()(const StrictlyIncreasingAfterZero& s) const {
      std::ostringstream os;
      os << "strictly_increasing_after_zero(u_c=" << s.u_c << ")";
      return os.str();
    }
    std::string operator()(const Unclassified&) const { return "unclassified"; }
  };
  return std::visit(V{}, c);
}

namespace graphs {

namespace {
Segment affine_segment(double lo, double hi, double v0, double slope) {
  Segment s;
  s.lo = lo;
  s.hi = hi;
  s.affine = true;
  s.value = [lo, v0, slope](double u) { return v0 + slope * (u - lo); };
  s.slope = [slope](double) { return slope; };
  return s;
}
}  // namespace

MonotoneGraph identity() { return MonotoneGraph("identity", {affine_segment(0.0, kInf, 0.0, 1.0)}, 1.0); }

MonotoneGraph power(double m) {
  if (!(m > 0.0)) throw ValidationError("power(m) needs m > 0");
  Segment s;
  s.lo = 0.0;
  s.hi = kInf;
  s.value = [m](double u) { return std::pow(u, m); };
  s.slope = [m](double u) { return u > 0.0 ? m * std::pow(u, m - 1.0) : (m < 1.0 ? kInf : (m == 1.0 ? 1.0 : 0.0)); };
  std::ostringstream name;
  name << "power(" << m << ")";
  MonotoneGraph g(name.str(), {s}, 1.0);
  if (m == 1.0) return g;
  return MonotoneGraph(name.str(), g.graph(), 1.0,
                       {"power(m) with m != 1 has no linear growth bound |beta(u)| <= c u on R+"});
}

MonotoneGraph stopped_linear(double u_c) {
  if (!(u_c >= 0.0)) throw ValidationError("stopped_linear needs u_c >= 0");
  std::ostringstream name;
  name << "stopped_linear(" << u_c << ")";
  if (u_c == 0.0) return MonotoneGraph(name.str(), {affine_segment(0.0, kInf, 0.0, 1.0)}, 1.0);
  if (!std::isfinite(u_c)) return MonotoneGraph(name.str(), {affine_segment(0.0, kInf, 0.0, 0.0)}, 1.0);
  return MonotoneGraph(name.str(), {affine_segment(0.0, u_c, 0.0, 0.0), affine_segment(u_c, kInf, 0.0, 1.0)}, 1.0);
}

MonotoneGraph saturating() {
  Segment s;
  s.lo = 0.0;
  s.hi = kInf;
  s.value = [](double u) { return u * u / (1.0 + u); };
  s.slope = [](double u) { return u * (u + 2.0) / ((1.0 + u) * (1.0 + u)); };
  return MonotoneGraph("saturating", {s}, 1.0);
}

MonotoneGraph jump(double a, double lo, double hi) {
  if (!(a > 0.0) || !(lo >= 0.0) || !(hi >= lo)) throw ValidationError("jump(a, lo, hi) needs a > 0, 0 <= lo <= hi");
  std::ostringstream name;
  name << "jump(" << a << "," << lo << "," << hi << ")";
  return MonotoneGraph(name.str(), {affine_segment(0.0, a, 0.0, lo / a), affine_segment(a, kInf, hi, hi / a)},
                       std::max(hi / a, 1e-300));
}

MonotoneGraph zero() { return stopped_linear(kInf); }

MonotoneGraph table(const std::vector<double>& u, const std::vector<double>& b) {
  if (u.size() != b.size() || u.size() < 2) throw ValidationError("table needs matching u, b with >= 2 points");
  if (u.front() != 0.0 || b.front() != 0.0) throw ValidationError("table must start at (0, 0)");
  std::vector<Segment> segs;
  double c = 0.0;
  double last_slope = 0.0;
  std::size_t k = 0;
  double seg_lo = 0.0;
  double seg_v0 = 0.0;
  while (k + 1 < u.size()) {
    if (u[k + 1] < u[k]) throw ValidationError("table abscissae must be non-decreasing");
    if (b[k + 1] < b[k]) throw ValidationError("table values must be non-decreasing");
    if (u[k + 1] == u[k]) {
      if (k + 2 < u.size() && u[k + 2] == u[k]) throw ValidationError("table has three equal abscissae");
      seg_v0 = b[k + 1];  // jump: next segment starts from the upper limit
      ++k;
      continue;
    }
    last_slope = (b[k + 1] - seg_v0) / (u[k + 1] - u[k]);
    segs.push_back(affine_segment(u[k], u[k + 1], seg_v0, last_slope));
    seg_lo = u[k + 1];
    seg_v0 = b[k + 1];
    ++k;
  }
  for (std::size_t j = 1; j < u.size(); ++j) {
    if (u[j] > 0.0) c = std::max(c, b[j] / u[j]);
  }
  c = std::max(c, last_slope);
  segs.push_back(affine_segment(seg_lo, kInf, seg_v0, last_slope));
  return MonotoneGraph("table", std::move(segs), std::max(c, 1e-300));
}

}  // namespace graphs

}  // namespace hlpm
