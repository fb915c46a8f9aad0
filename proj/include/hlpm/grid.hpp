#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hlpm {

enum class GridKind { half_line, symmetric_whole_line };

// Uniform cell-centred grid. Half-line grids cover [0, n dx) with centres
// (i + 1/2) dx. Symmetric grids cover [-X, X) with 2m cells and centres
// +-(i + 1/2) dx, so cell m + i and cell m - 1 - i are mirror images.
class Grid1D {
 public:
  static Grid1D half_line(std::size_t cells, double dx);
  static Grid1D symmetric(std::size_t half_cells, double dx);
  static Grid1D half_line_extent(double x_max, double dx);

  [[nodiscard]] GridKind kind() const { return kind_; }
  [[nodiscard]] std::size_t size() const { return cells_; }
  [[nodiscard]] double dx() const { return dx_; }
  [[nodiscard]] double extent() const;  // X_max
  [[nodiscard]] double lower() const { return kind_ == GridKind::half_line ? 0.0 : -extent(); }
  [[nodiscard]] double center(std::size_t i) const;
  [[nodiscard]] std::vector<double> centers() const;
  [[nodiscard]] std::size_t half_size() const;

  // Cell containing x, or nullopt when x lies outside the grid. Symmetric
  // grids locate |x| first, so cell_of(-x) is the mirror of cell_of(x).
  [[nodiscard]] std::optional<std::size_t> cell_of(double x) const;
  [[nodiscard]] std::size_t mirror(std::size_t i) const { return cells_ - 1 - i; }

  [[nodiscard]] Grid1D mirrored() const;  // half -> symmetric with the same cells
  [[nodiscard]] Grid1D folded() const;    // symmetric -> half
  [[nodiscard]] Grid1D coarsened(std::size_t factor) const;

  friend bool operator==(const Grid1D&, const Grid1D&) = default;

 private:
  Grid1D(GridKind kind, std::size_t cells, double dx) : kind_(kind), cells_(cells), dx_(dx) {}
  GridKind kind_ = GridKind::half_line;
  std::size_t cells_ = 0;
  double dx_ = 0.0;
};

[[nodiscard]] std::string to_string(GridKind k);

// Gridded density: cell averages of a probability density at time t.
class DensityField {
 public:
  DensityField(Grid1D grid, std::vector<double> values, double t = 0.0);

  [[nodiscard]] const Grid1D& grid() const { return grid_; }
  [[nodiscard]] std::span<const double> values() const { return values_; }
  [[nodiscard]] double operator[](std::size_t i) const { return values_[i]; }
  [[nodiscard]] std::size_t size() const { return values_.size(); }
  [[nodiscard]] double t() const { return t_; }
  [[nodiscard]] double mass() const { return mass_; }
  [[nodiscard]] double min() const;
  [[nodiscard]] double max() const;

  // Piecewise-constant lookup; 0 outside the grid.
  [[nodiscard]] double at(double x) const;

 private:
  Grid1D grid_;
  std::vector<double> values_;
  double t_ = 0.0;
  double mass_ = 0.0;
};

// Midpoint-rule integral sum_i f_i dx.
[[nodiscard]] double midpoint_integral(std::span<const double> f, double dx);

// Cell averages of a function given by its integral over each cell
// (exact for piecewise-constant data).
[[nodiscard]] DensityField sample_density(const Grid1D& grid, const std::function<double(double)>& f,
                                          double t = 0.0, int subcells = 16);

// Conservative coarsening: average of `factor` consecutive cells.
[[nodiscard]] DensityField coarsen(const DensityField& f, std::size_t factor);

}  // namespace hlpm
