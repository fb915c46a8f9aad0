#include "hlpm/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hlpm/errors.hpp"

namespace hlpm {

Grid1D Grid1D::half_line(std::size_t cells, double dx) {
  if (cells == 0) throw ValidationError("grid needs at least one cell");
  if (!(dx > 0.0) || !std::isfinite(dx)) throw ValidationError("grid spacing dx must be positive");
  return Grid1D(GridKind::half_line, cells, dx);
}

Grid1D Grid1D::symmetric(std::size_t half_cells, double dx) {
  if (half_cells == 0) throw ValidationError("grid needs at least one cell");
  if (!(dx > 0.0) || !std::isfinite(dx)) throw ValidationError("grid spacing dx must be positive");
  return Grid1D(GridKind::symmetric_whole_line, 2 * half_cells, dx);
}

Grid1D Grid1D::half_line_extent(double x_max, double dx) {
  if (!(dx > 0.0)) throw ValidationError("grid spacing dx must be positive");
  if (!(x_max > 0.0)) throw ValidationError("domain extent x_max must be positive");
  const double n = std::round(x_max / dx);
  if (std::abs(n * dx - x_max) > 1e-9 * x_max) {
    throw ValidationError("x_max must be an integer multiple of dx");
  }
  return half_line(static_cast<std::size_t>(n), dx);
}

double Grid1D::extent() const {
  return static_cast<double>(half_size()) * dx_;
}

std::size_t Grid1D::half_size() const { return kind_ == GridKind::half_line ? cells_ : cells_ / 2; }

double Grid1D::center(std::size_t i) const {
  if (kind_ == GridKind::half_line) return (static_cast<double>(i) + 0.5) * dx_;
  const std::size_t m = cells_ / 2;
  if (i >= m) return (static_cast<double>(i - m) + 0.5) * dx_;
  return -(static_cast<double>(m - 1 - i) + 0.5) * dx_;
}

std::vector<double> Grid1D::centers() const {
  std::vector<double> x(cells_);
  for (std::size_t i = 0; i < cells_; ++i) x[i] = center(i);
  return x;
}

std::optional<std::size_t> Grid1D::cell_of(double x) const {
  if (!std::isfinite(x)) return std::nullopt;
  const std::size_t m = half_size();
  const double a = std::abs(x);
  const double k = std::floor(a / dx_);
  if (k >= static_cast<double>(m)) return std::nullopt;
  const auto ki = static_cast<std::size_t>(k);
  if (kind_ == GridKind::half_line) {
    if (x < 0.0) return std::nullopt;
    return ki;
  }
  // x == -0.0 and +0.0 both belong to the right half
  return std::signbit(x) && x != 0.0 ? m - 1 - ki : m + ki;
}

Grid1D Grid1D::mirrored() const {
  if (kind_ != GridKind::half_line) throw ValidationError("mirrored() needs a half-line grid");
  return symmetric(cells_, dx_);
}

Grid1D Grid1D::folded() const {
  if (kind_ != GridKind::symmetric_whole_line) throw ValidationError("folded() needs a symmetric grid");
  return half_line(cells_ / 2, dx_);
}

Grid1D Grid1D::coarsened(std::size_t factor) const {
  if (factor == 0 || half_size() % factor != 0) {
    throw ValidationError("coarsening factor must divide the number of (half) cells");
  }
  const double cdx = dx_ * static_cast<double>(factor);
  return kind_ == GridKind::half_line ? half_line(cells_ / factor, cdx) : symmetric(half_size() / factor, cdx);
}

std::string to_string(GridKind k) { return k == GridKind::half_line ? "half_line" : "symmetric_whole_line"; }

double midpoint_integral(std::span<const double> f, double dx) {
  return std::accumulate(f.begin(), f.end(), 0.0) * dx;
}

DensityField::DensityField(Grid1D grid, std::vector<double> values, double t)
    : grid_(grid), values_(std::move(values)), t_(t) {
  if (values_.size() != grid_.size()) throw ValidationError("density values do not match grid size");
  for (double v : values_) {
    if (!std::isfinite(v)) throw ValidationError("density field has a non-finite value");
  }
  mass_ = midpoint_integral(values_, grid_.dx());
}

double DensityField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double DensityField::max() const { return *std::max_element(values_.begin(), values_.end()); }

double DensityField::at(double x) const {
  auto c = grid_.cell_of(x);
  return c ? values_[*c] : 0.0;
}

DensityField sample_density(const Grid1D& grid, const std::function<double(double)>& f, double t, int subcells) {
  std::vector<double> v(grid.size());
  const double h = grid.dx() / subcells;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double left = grid.center(i) - 0.5 * grid.dx();
    double s = 0.0;
    for (int k = 0; k < subcells; ++k) s += f(left + (k + 0.5) * h);
    v[i] = s / subcells;
  }
  return DensityField(grid, std::move(v), t);
}

DensityField coarsen(const DensityField& f, std::size_t factor) {
  const Grid1D cg = f.grid().coarsened(factor);
  std::vector<double> v(cg.size(), 0.0);
  for (std::size_t i = 0; i < cg.size(); ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < factor; ++k) s += f[i * factor + k];
    v[i] = s / static_cast<double>(factor);
  }
  return DensityField(cg, std::move(v), f.t());
}

}  // namespace hlpm
