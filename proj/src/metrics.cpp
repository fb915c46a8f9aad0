#include "hlpm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hlpm/errors.hpp"

namespace hlpm {

namespace {

// exact integral of |F_a - F_b| over one cell where both CDFs are linear
double linear_abs_integral(double d0, double d1, double dx) {
  if ((d0 >= 0.0) == (d1 >= 0.0)) return 0.5 * (std::abs(d0) + std::abs(d1)) * dx;
  const double s = std::abs(d0) + std::abs(d1);
  return 0.5 * (d0 * d0 + d1 * d1) / s * dx;
}

}  // namespace

DensityField resample(const DensityField& f, const Grid1D& target) {
  const Grid1D& src = f.grid();
  std::vector<double> out(target.size(), 0.0);
  const double sdx = src.dx();
  for (std::size_t j = 0; j < target.size(); ++j) {
    const double a = target.lower() + static_cast<double>(j) * target.dx();
    const double b = a + target.dx();
    double acc = 0.0;
    auto lo = static_cast<long long>(std::floor((a - src.lower()) / sdx));
    auto hi = static_cast<long long>(std::ceil((b - src.lower()) / sdx));
    lo = std::max<long long>(lo, 0);
    hi = std::min<long long>(hi, static_cast<long long>(src.size()));
    for (long long i = lo; i < hi; ++i) {
      const double ca = src.lower() + static_cast<double>(i) * sdx;
      const double overlap = std::min(b, ca + sdx) - std::max(a, ca);
      if (overlap > 0.0) acc += f[static_cast<std::size_t>(i)] * overlap;
    }
    out[j] = acc / target.dx();
  }
  return DensityField(target, std::move(out), f.t());
}

DensityDistance compare_densities(const DensityField& a, const DensityField& b, bool allow_resample) {
  if (!(a.grid() == b.grid())) {
    if (!allow_resample) throw ValidationError("compare_densities: grid mismatch (enable resampling)");
    if (a.grid().kind() != b.grid().kind()) throw ValidationError("compare_densities: grid kinds differ");
    const double dx = std::min(a.grid().dx(), b.grid().dx());
    const double ext = std::max(a.grid().extent(), b.grid().extent());
    const auto cells = static_cast<std::size_t>(std::ceil(ext / dx - 1e-9));
    const Grid1D common = a.grid().kind() == GridKind::half_line ? Grid1D::half_line(cells, dx)
                                                                 : Grid1D::symmetric(cells, dx);
    return compare_densities(resample(a, common), resample(b, common), false);
  }
  const double dx = a.grid().dx();
  DensityDistance d;
  double fa = 0.0;
  double fb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d.L1 += std::abs(a[i] - b[i]) * dx;
    const double d0 = fa - fb;
    fa += a[i] * dx;
    fb += b[i] * dx;
    d.W1 += linear_abs_integral(d0, fa - fb, dx);
  }
  return d;
}

}  // namespace hlpm

namespace hlpm {

namespace {

// antiderivative of the standard normal CDF: int Phi = z Phi(z) + phi(z)
double normal_cdf_integral(double z) {
  const double cdf = 0.5 * std::erfc(-z / std::sqrt(2.0));
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
  return z * cdf + pdf;
}

// average over x in [x0, x1] of P(a <= x - G <= b) with G ~ N(0, s^2),
// i.e. the cell average of int_a^b g(x - y) dy
double cell_average_mass(double x0, double x1, double a, double b, double s) {
  auto F = [&](double x) {
    return s * (normal_cdf_integral((x - a) / s) - normal_cdf_integral((x - b) / s));
  };
  return (F(x1) - F(x0)) / (x1 - x0);
}

}  // namespace

DensityField reflected_heat(const DensityField& u0, double t, double diffusivity, const Grid1D* target) {
  if (u0.grid().kind() != GridKind::half_line) throw ValidationError("reflected_heat needs half-line data");
  if (!(t > 0.0) || !(diffusivity > 0.0)) throw DomainError("reflected_heat needs t > 0 and D > 0");
  const Grid1D& src = u0.grid();
  const Grid1D& out_grid = target ? *target : src;
  const double s = std::sqrt(diffusivity * t);
  std::vector<double> v(out_grid.size(), 0.0);
  for (std::size_t j = 0; j < out_grid.size(); ++j) {
    const double x0 = out_grid.lower() + static_cast<double>(j) * out_grid.dx();
    const double x1 = x0 + out_grid.dx();
    double acc = 0.0;
    for (std::size_t i = 0; i < src.size(); ++i) {
      if (u0[i] == 0.0) continue;
      const double a = static_cast<double>(i) * src.dx();
      const double b = a + src.dx();
      // source cell and its mirror image [-b, -a]
      acc += u0[i] * (cell_average_mass(x0, x1, a, b, s) + cell_average_mass(x0, x1, -b, -a, s));
    }
    v[j] = acc;
  }
  return DensityField(out_grid, std::move(v), t);
}

}  // namespace hlpm
