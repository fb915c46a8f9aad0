#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace hlpm {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  [[nodiscard]] double mid() const { return 0.5 * (lo + hi); }
  [[nodiscard]] double width() const { return hi - lo; }
  [[nodiscard]] bool contains(double v, double tol = 0.0) const {
    return v >= lo - tol && v <= hi + tol;
  }
  [[nodiscard]] bool is_point() const { return lo == hi; }
};

using ScalarFn = std::function<double(double)>;

// One closed-form piece of a graph, valid on [lo, hi). `slope` is optional;
// when present the resolvent uses safeguarded Newton inside the segment.
struct Segment {
  double lo = 0.0;
  double hi = 0.0;
  ScalarFn value;
  ScalarFn slope;
  bool affine = false;  // value(u) = value(lo) + slope(lo) * (u - lo)
};

struct Jump {
  double x = 0.0;
  double left = 0.0;   // limit from below
  double right = 0.0;  // limit from above
};

// A graph on [0, inf) assembled from segments; at every breakpoint where the
// one-sided limits differ the gap is filled, so eval returns an interval.
class PiecewiseGraph {
 public:
  PiecewiseGraph() = default;
  explicit PiecewiseGraph(std::vector<Segment> segments);

  [[nodiscard]] Interval eval(double u) const;
  [[nodiscard]] double value_right(double u) const;
  [[nodiscard]] double value_left(double u) const;
  [[nodiscard]] std::size_t segment_index(double u) const;

  [[nodiscard]] const std::vector<Segment>& segments() const { return segments_; }
  [[nodiscard]] const std::vector<Jump>& jumps() const { return jumps_; }

  // g(u) = value_scale * f(arg_scale * u), breakpoints moved to x / arg_scale.
  [[nodiscard]] PiecewiseGraph rescaled(double arg_scale, double value_scale) const;

 private:
  std::vector<Segment> segments_;
  std::vector<Jump> jumps_;
};

struct Resolvent {
  double u = 0.0;
  double eta = 0.0;
};

struct GraphCheckOptions {
  double u_max = 1.0e3;
  int levels = 60;  // geometric grid u_max * 2^-k, k = 0..levels
  int per_segment = 64;
};

// Maximal monotone graph beta on R+ with beta(0) = 0 and |beta(u)| <= c u.
// Immutable after construction; copies share the segment callables.
class MonotoneGraph {
 public:
  MonotoneGraph(std::string name, std::vector<Segment> segments, double growth_constant);
  MonotoneGraph(std::string name, PiecewiseGraph graph, double growth_constant,
                std::vector<std::string> warnings);

  [[nodiscard]] const std::string& name() const { return name_; }
  [[nodiscard]] double growth_constant() const { return growth_constant_; }
  [[nodiscard]] const PiecewiseGraph& graph() const { return graph_; }
  [[nodiscard]] const std::vector<Jump>& jumps() const { return graph_.jumps(); }
  [[nodiscard]] const std::vector<std::string>& warnings() const { return warnings_; }

  // [beta(u-), beta(u+)]; throws DomainError for u < 0.
  [[nodiscard]] Interval eval(double u) const;

  // Solves u + mu * eta = y with eta in beta(u). Throws NumericalError when
  // the inner bracketing iteration does not reach tolerance.
  [[nodiscard]] Resolvent resolvent(double mu, double y) const;

  // d eta / d y of the Yosida map y -> (y - J_mu(y)) / mu at a resolvent point.
  [[nodiscard]] double yosida_slope(double mu, const Resolvent& r) const;

  // Sampled monotonicity and growth checks; empty string means pass.
  [[nodiscard]] std::string check_monotone(const GraphCheckOptions& opt = {}) const;
  [[nodiscard]] std::string check_growth(const GraphCheckOptions& opt = {}) const;

  [[nodiscard]] MonotoneGraph rescaled(std::string name, double arg_scale, double value_scale) const;

  static constexpr double kTolerance = 1e-12;
  static constexpr int kMaxIterations = 200;

 private:
  std::string name_;
  PiecewiseGraph graph_;
  double growth_constant_ = 1.0;
  std::vector<std::string> warnings_;
};

// Non-negative graph Phi with beta(u) = Phi(u)^2 u for u > 0. Phi need not be
// monotone. The value at 0 is the interval [liminf, limsup] of Phi at 0+.
class PhiGraph {
 public:
  PhiGraph(PiecewiseGraph graph, Interval value_at_zero)
      : graph_(std::move(graph)), value_at_zero_(value_at_zero) {}

  [[nodiscard]] Interval eval(double u) const;
  [[nodiscard]] Interval value_at_zero() const { return value_at_zero_; }
  [[nodiscard]] const PiecewiseGraph& graph() const { return graph_; }

 private:
  PiecewiseGraph graph_;
  Interval value_at_zero_;
};

[[nodiscard]] PhiGraph phi_from_beta(const MonotoneGraph& beta);

enum class SelectionPolicy { right_limit, left_limit, midpoint };

[[nodiscard]] SelectionPolicy parse_selection_policy(const std::string& s);
[[nodiscard]] std::string to_string(SelectionPolicy p);

// Single-valued selection from a filled graph.
class Selection {
 public:
  Selection(PhiGraph phi, SelectionPolicy policy);
  Selection(MonotoneGraph beta, SelectionPolicy policy);

  [[nodiscard]] double operator()(double u) const;
  [[nodiscard]] Interval interval(double u) const;
  [[nodiscard]] SelectionPolicy policy() const { return policy_; }
  [[nodiscard]] double at_zero() const { return (*this)(0.0); }

 private:
  std::function<Interval(double)> eval_;
  SelectionPolicy policy_;
};

[[nodiscard]] Selection make_selection(const PhiGraph& phi, SelectionPolicy policy);
[[nodiscard]] Selection make_selection(const MonotoneGraph& beta, SelectionPolicy policy);

struct NonDegenerate {
  double c0 = 0.0;
};
struct Degenerate {};
struct StrictlyIncreasingAfterZero {
  double u_c = 0.0;
};
struct Unclassified {};

using DegeneracyClass = std::variant<NonDegenerate, Degenerate, StrictlyIncreasingAfterZero, Unclassified>;

[[nodiscard]] DegeneracyClass classify(const MonotoneGraph& beta, const GraphCheckOptions& opt = {});
[[nodiscard]] std::string describe(const DegeneracyClass& c);

// Built-in catalog.
namespace graphs {
[[nodiscard]] MonotoneGraph identity();
[[nodiscard]] MonotoneGraph power(double m);
[[nodiscard]] MonotoneGraph stopped_linear(double u_c);
[[nodiscard]] MonotoneGraph saturating();
// beta(u) = lo * u / a below a, hi * u / a from a on; filled jump [lo, hi] at a.
[[nodiscard]] MonotoneGraph jump(double a, double lo, double hi);
// beta == 0 (the stopped_linear graph with u_c = infinity).
[[nodiscard]] MonotoneGraph zero();
// Piecewise linear through (u_k, b_k); u_0 = 0, b_0 = 0, repeated u_k is a jump.
// Extended past the last point with the last slope.
[[nodiscard]] MonotoneGraph table(const std::vector<double>& u, const std::vector<double>& b);
}  // namespace graphs

}  // namespace hlpm
