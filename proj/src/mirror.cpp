#include "hlpm/mirror.hpp"

#include <cmath>
#include <sstream>

#include "hlpm/errors.hpp"

namespace hlpm {

namespace {
void require_symmetric(const Grid1D& g, const char* what) {
  if (g.kind() != GridKind::symmetric_whole_line) {
    throw ValidationError(std::string(what) + " needs a symmetric whole-line grid");
  }
}
}  // namespace

DensityField extend_initial(const DensityField& u0) {
  if (u0.grid().kind() != GridKind::half_line) throw ValidationError("extend_initial needs a half-line field");
  if (std::abs(u0.mass() - 1.0) > kUnitMassTolerance) {
    std::ostringstream os;
    os << "extend_initial needs unit mass, got " << u0.mass();
    throw ValidationError(os.str());
  }
  if (u0.min() < 0.0) throw ValidationError("extend_initial needs a non-negative field");
  std::vector<double> half(u0.values().begin(), u0.values().end());
  for (double& v : half) v *= 0.5;
  return DensityField(u0.grid().mirrored(), extend_values(u0.grid(), half), u0.t());
}

MonotoneGraph extend_beta(const MonotoneGraph& beta) {
  return beta.rescaled(beta.name() + "_bar", 2.0, 0.5);
}

PhiGraph extend_phi(const PhiGraph& phi) {
  return PhiGraph(phi.graph().rescaled(2.0, 1.0), phi.value_at_zero());
}

std::vector<double> extend_values(const Grid1D& half, std::span<const double> values) {
  const std::size_t m = half.size();
  std::vector<double> out(2 * m);
  for (std::size_t i = 0; i < m; ++i) {
    out[m + i] = values[i];
    out[m - 1 - i] = values[i];
  }
  return out;
}

std::vector<double> restrict_values(const Grid1D& grid, std::span<const double> values) {
  require_symmetric(grid, "restrict");
  const std::size_t m = grid.half_size();
  std::vector<double> out(m);
  for (std::size_t i = 0; i < m; ++i) out[i] = 2.0 * values[m + i];
  return out;
}

DensityField restrict_solution(const DensityField& u_bar, double tolerance) {
  const double a = check_even(u_bar);
  if (a > tolerance) {
    std::ostringstream os;
    os << "restrict_solution: field is not even (L1 asymmetry " << a << " > " << tolerance << ")";
    throw EvennessError(os.str());
  }
  return DensityField(u_bar.grid().folded(), restrict_values(u_bar.grid(), u_bar.values()), u_bar.t());
}

double asymmetry(const Grid1D& grid, std::span<const double> values) {
  require_symmetric(grid, "check_even");
  const std::size_t m = grid.half_size();
  double s = 0.0;
  for (std::size_t i = 0; i < m; ++i) s += std::abs(values[m + i] - values[m - 1 - i]);
  return s * grid.dx();
}

double check_even(const DensityField& f) { return asymmetry(f.grid(), f.values()); }

DensityField symmetrize(const DensityField& f) {
  require_symmetric(f.grid(), "symmetrize");
  const std::size_t m = f.grid().half_size();
  std::vector<double> v(f.size());
  for (std::size_t i = 0; i < m; ++i) {
    const double a = 0.5 * (f[m + i] + f[m - 1 - i]);
    v[m + i] = a;
    v[m - 1 - i] = a;
  }
  return DensityField(f.grid(), std::move(v), f.t());
}

}  // namespace hlpm
