#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace interpark {

/// Masses of probability measures must sum to 1 within this tolerance.
inline constexpr double kProbabilityTolerance = 1e-12;

/// Flat storage for a list of points in R^d.
class PointCloud {
 public:
  PointCloud() = default;
  explicit PointCloud(std::size_t dim) : dim_(dim) {}
  PointCloud(std::size_t dim, std::vector<double> coords);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return dim_ == 0 ? 0 : coords_.size() / dim_; }
  bool empty() const { return size() == 0; }

  std::span<const double> operator[](std::size_t i) const {
    return {coords_.data() + i * dim_, dim_};
  }
  void push_back(std::span<const double> p);
  const std::vector<double>& coords() const { return coords_; }

 private:
  std::size_t dim_ = 0;
  std::vector<double> coords_;
};

struct BBox {
  double xmin = 0.0;
  double xmax = 1.0;
  double ymin = 0.0;
  double ymax = 1.0;
};

/// Uniform nx-by-ny cell grid over an axis-aligned rectangle. Cells are
/// indexed row-major: index = iy * nx + ix.
class GridSpec {
 public:
  GridSpec(BBox box, std::size_t nx, std::size_t ny);

  const BBox& bbox() const { return box_; }
  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  std::size_t size() const { return nx_ * ny_; }
  double dx() const { return (box_.xmax - box_.xmin) / static_cast<double>(nx_); }
  double dy() const { return (box_.ymax - box_.ymin) / static_cast<double>(ny_); }
  double cell_area() const { return dx() * dy(); }

  std::size_t index(std::size_t ix, std::size_t iy) const { return iy * nx_ + ix; }
  std::array<double, 2> center(std::size_t cell) const;
  PointCloud centers() const;

  /// Index of the cell whose center is nearest to (x, y); ties go to the
  /// smallest row-major index.
  std::size_t nearest_cell(double x, double y) const;

  bool operator==(const GridSpec& other) const;

 private:
  BBox box_;
  std::size_t nx_;
  std::size_t ny_;
};

GridSpec build_grid(BBox box, std::size_t nx, std::size_t ny);

/// Nonnegative weights (masses, not densities) on a support. When `grid` is
/// set the support is the grid's cell centers in row-major order.
struct DiscreteMeasure {
  PointCloud support;
  std::vector<double> weights;
  std::optional<GridSpec> grid;

  std::size_t size() const { return weights.size(); }
  /// Density of cell i; requires a grid support.
  double density(std::size_t i) const;
};

DiscreteMeasure make_point_measure(PointCloud support, std::vector<double> weights);
DiscreteMeasure make_grid_measure(const GridSpec& grid, std::vector<double> weights);

using DensityFn = std::function<double(double, double)>;

DiscreteMeasure measure_from_density(const GridSpec& grid, const DensityFn& density,
                                     bool normalize_flag);

/// Full mass on the support point nearest to `point` (smallest index on ties).
DiscreteMeasure dirac(const GridSpec& grid, std::span<const double> point, double mass = 1.0);
DiscreteMeasure dirac(const PointCloud& points, std::span<const double> point,
                      double mass = 1.0);

double total_mass(const DiscreteMeasure& m);
double total_mass(std::span<const double> weights);
DiscreteMeasure normalize(const DiscreteMeasure& m);

/// Keeps only support points with positive weight.
DiscreteMeasure compress(const DiscreteMeasure& m);

/// Boolean cell indicator of a location constraint K.
class SupportMask {
 public:
  SupportMask(GridSpec grid, std::vector<std::uint8_t> inside);

  const GridSpec& grid() const { return grid_; }
  bool contains(std::size_t cell) const { return inside_[cell] != 0; }
  /// Cells of the mask with an 8-neighbour outside the mask (or off-grid).
  bool on_boundary(std::size_t cell) const { return band_[cell] != 0; }
  std::size_t count() const { return cells_.size(); }

  /// Grid indices of the mask cells, ascending.
  const std::vector<std::size_t>& cells() const { return cells_; }
  /// Centers of mask cells in the order of cells().
  PointCloud points() const;
  /// Chebyshev distance (in cells) from a mask cell to the nearest
  /// non-mask cell; off-grid counts as outside. The search stops after
  /// `max_rings` rings and then returns max_rings + 1.
  std::size_t depth(std::size_t cell, std::size_t max_rings = 1u << 20) const;

 private:
  GridSpec grid_;
  std::vector<std::uint8_t> inside_;
  std::vector<std::uint8_t> band_;
  std::vector<std::size_t> cells_;
};

SupportMask full_mask(const GridSpec& grid);
SupportMask mask_from_predicate(const GridSpec& grid,
                                const std::function<bool(double, double)>& inside);

/// Upper bound on the pivot density (mass per unit area), one value per cell.
class DensityBound {
 public:
  DensityBound(GridSpec grid, std::vector<double> cap);

  const GridSpec& grid() const { return grid_; }
  double cap(std::size_t cell) const { return cap_[cell]; }
  double cell_mass_cap(std::size_t cell) const { return cap_[cell] * grid_.cell_area(); }
  double total_cap_mass() const;
  const std::vector<double>& caps() const { return cap_; }

 private:
  GridSpec grid_;
  std::vector<double> cap_;
};

DensityBound constant_bound(const GridSpec& grid, double cap);

/// Spreads a measure living on the points of `mask` back onto the full grid.
DiscreteMeasure scatter_to_grid(const SupportMask& mask, std::span<const double> weights);

void write_measure_csv(std::ostream& os, const DiscreteMeasure& m);
void write_grid_text(std::ostream& os, const DiscreteMeasure& m);
DiscreteMeasure read_measure_csv(std::istream& is);

}  // namespace interpark
