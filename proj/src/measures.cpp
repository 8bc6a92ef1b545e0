#include "interpark/measures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace interpark {

PointCloud::PointCloud(std::size_t dim, std::vector<double> coords)
    : dim_(dim), coords_(std::move(coords)) {
  if (dim_ == 0) throw std::invalid_argument("PointCloud: dimension must be positive");
  if (coords_.size() % dim_ != 0)
    throw std::invalid_argument("PointCloud: coordinate count not a multiple of dim");
}

void PointCloud::push_back(std::span<const double> p) {
  if (dim_ == 0) dim_ = p.size();
  if (p.size() != dim_) throw std::invalid_argument("PointCloud: dimension mismatch");
  coords_.insert(coords_.end(), p.begin(), p.end());
}

GridSpec::GridSpec(BBox box, std::size_t nx, std::size_t ny) : box_(box), nx_(nx), ny_(ny) {
  if (nx == 0 || ny == 0) throw std::invalid_argument("GridSpec: nx and ny must be >= 1");
  if (!(box.xmax > box.xmin) || !(box.ymax > box.ymin))
    throw std::invalid_argument("GridSpec: degenerate bounding box");
  if (!std::isfinite(box.xmin) || !std::isfinite(box.xmax) || !std::isfinite(box.ymin) ||
      !std::isfinite(box.ymax))
    throw std::invalid_argument("GridSpec: non-finite bounding box");
}

std::array<double, 2> GridSpec::center(std::size_t cell) const {
  const std::size_t ix = cell % nx_;
  const std::size_t iy = cell / nx_;
  return {box_.xmin + (static_cast<double>(ix) + 0.5) * dx(),
          box_.ymin + (static_cast<double>(iy) + 0.5) * dy()};
}

PointCloud GridSpec::centers() const {
  std::vector<double> coords;
  coords.reserve(2 * size());
  for (std::size_t c = 0; c < size(); ++c) {
    const auto p = center(c);
    coords.push_back(p[0]);
    coords.push_back(p[1]);
  }
  return PointCloud(2, std::move(coords));
}

std::size_t GridSpec::nearest_cell(double x, double y) const {
  // Brute force keeps the tie-break exact; grids are small enough.
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < size(); ++c) {
    const auto p = center(c);
    const double d = (p[0] - x) * (p[0] - x) + (p[1] - y) * (p[1] - y);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

bool GridSpec::operator==(const GridSpec& o) const {
  return nx_ == o.nx_ && ny_ == o.ny_ && box_.xmin == o.box_.xmin && box_.xmax == o.box_.xmax &&
         box_.ymin == o.box_.ymin && box_.ymax == o.box_.ymax;
}

GridSpec build_grid(BBox box, std::size_t nx, std::size_t ny) { return GridSpec(box, nx, ny); }

double DiscreteMeasure::density(std::size_t i) const {
  if (!grid) throw std::logic_error("density: measure has no grid support");
  return weights[i] / grid->cell_area();
}

DiscreteMeasure make_point_measure(PointCloud support, std::vector<double> weights) {
  if (support.size() != weights.size())
    throw std::invalid_argument("measure: support and weight sizes differ");
  for (double w : weights)
    if (!(w >= 0.0) || !std::isfinite(w))
      throw std::invalid_argument("measure: weights must be finite and nonnegative");
  return DiscreteMeasure{std::move(support), std::move(weights), std::nullopt};
}

DiscreteMeasure make_grid_measure(const GridSpec& grid, std::vector<double> weights) {
  auto m = make_point_measure(grid.centers(), std::move(weights));
  m.grid = grid;
  return m;
}

DiscreteMeasure measure_from_density(const GridSpec& grid, const DensityFn& density,
                                     bool normalize_flag) {
  std::vector<double> w(grid.size());
  const double area = grid.cell_area();
  for (std::size_t c = 0; c < grid.size(); ++c) {
    const auto p = grid.center(c);
    const double rho = density(p[0], p[1]);
    if (!(rho >= 0.0)) throw std::invalid_argument("measure_from_density: negative density");
    w[c] = rho * area;
  }
  auto m = make_grid_measure(grid, std::move(w));
  return normalize_flag ? normalize(m) : m;
}

DiscreteMeasure dirac(const GridSpec& grid, std::span<const double> point, double mass) {
  if (!(mass >= 0.0)) throw std::invalid_argument("dirac: mass must be nonnegative");
  if (point.size() != 2) throw std::invalid_argument("dirac: grid supports are 2-D");
  std::vector<double> w(grid.size(), 0.0);
  w[grid.nearest_cell(point[0], point[1])] = mass;
  return make_grid_measure(grid, std::move(w));
}

DiscreteMeasure dirac(const PointCloud& points, std::span<const double> point, double mass) {
  if (!(mass >= 0.0)) throw std::invalid_argument("dirac: mass must be nonnegative");
  if (points.empty()) throw std::invalid_argument("dirac: empty support");
  if (point.size() != points.dim()) throw std::invalid_argument("dirac: dimension mismatch");
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.size(); ++i) {
    double d = 0.0;
    for (std::size_t k = 0; k < point.size(); ++k) {
      const double t = points[i][k] - point[k];
      d += t * t;
    }
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  std::vector<double> w(points.size(), 0.0);
  w[best] = mass;
  return make_point_measure(points, std::move(w));
}

double total_mass(std::span<const double> weights) {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

double total_mass(const DiscreteMeasure& m) { return total_mass(m.weights); }

DiscreteMeasure normalize(const DiscreteMeasure& m) {
  const double s = total_mass(m);
  if (!(s > 0.0)) throw std::invalid_argument("normalize: measure has zero mass");
  DiscreteMeasure out = m;
  // Probability measures are returned untouched, which also makes normalize
  // idempotent bit-for-bit.
  if (std::abs(s - 1.0) <= kProbabilityTolerance) return out;
  for (double& w : out.weights) w /= s;
  return out;
}

DiscreteMeasure compress(const DiscreteMeasure& m) {
  PointCloud pts(m.support.dim());
  std::vector<double> w;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m.weights[i] > 0.0) {
      pts.push_back(m.support[i]);
      w.push_back(m.weights[i]);
    }
  }
  return make_point_measure(std::move(pts), std::move(w));
}

SupportMask::SupportMask(GridSpec grid, std::vector<std::uint8_t> inside)
    : grid_(grid), inside_(std::move(inside)) {
  if (inside_.size() != grid_.size()) throw std::invalid_argument("SupportMask: size mismatch");
  for (std::size_t c = 0; c < inside_.size(); ++c)
    if (inside_[c]) cells_.push_back(c);
  if (cells_.empty()) throw std::invalid_argument("SupportMask: empty mask");
  band_.assign(inside_.size(), 0);
  for (std::size_t c : cells_) band_[c] = depth(c, 1) <= 1 ? 1 : 0;
}

std::size_t SupportMask::depth(std::size_t cell, std::size_t max_rings) const {
  if (!inside_[cell]) return 0;
  const auto nx = static_cast<long>(grid_.nx());
  const auto ny = static_cast<long>(grid_.ny());
  const long ix = static_cast<long>(cell % grid_.nx());
  const long iy = static_cast<long>(cell / grid_.nx());
  const long max_r = std::min<long>(std::max(nx, ny), static_cast<long>(max_rings));
  for (long r = 1; r <= max_r; ++r) {
    for (long dy = -r; dy <= r; ++dy) {
      for (long dx = -r; dx <= r; ++dx) {
        if (std::max(std::abs(dx), std::abs(dy)) != r) continue;
        const long jx = ix + dx;
        const long jy = iy + dy;
        if (jx < 0 || jy < 0 || jx >= nx || jy >= ny) return static_cast<std::size_t>(r);
        if (!inside_[static_cast<std::size_t>(jy * nx + jx)]) return static_cast<std::size_t>(r);
      }
    }
  }
  return static_cast<std::size_t>(max_r + 1);
}

PointCloud SupportMask::points() const {
  std::vector<double> coords;
  coords.reserve(2 * cells_.size());
  for (std::size_t c : cells_) {
    const auto p = grid_.center(c);
    coords.push_back(p[0]);
    coords.push_back(p[1]);
  }
  return PointCloud(2, std::move(coords));
}

SupportMask full_mask(const GridSpec& grid) {
  return SupportMask(grid, std::vector<std::uint8_t>(grid.size(), 1));
}

SupportMask mask_from_predicate(const GridSpec& grid,
                                const std::function<bool(double, double)>& inside) {
  std::vector<std::uint8_t> m(grid.size());
  for (std::size_t c = 0; c < grid.size(); ++c) {
    const auto p = grid.center(c);
    m[c] = inside(p[0], p[1]) ? 1 : 0;
  }
  return SupportMask(grid, std::move(m));
}

DensityBound::DensityBound(GridSpec grid, std::vector<double> cap)
    : grid_(grid), cap_(std::move(cap)) {
  if (cap_.size() != grid_.size()) throw std::invalid_argument("DensityBound: size mismatch");
  for (double c : cap_)
    if (!(c >= 0.0) || !std::isfinite(c))
      throw std::invalid_argument("DensityBound: caps must be finite and nonnegative");
}

double DensityBound::total_cap_mass() const {
  return total_mass(cap_) * grid_.cell_area();
}

DensityBound constant_bound(const GridSpec& grid, double cap) {
  return DensityBound(grid, std::vector<double>(grid.size(), cap));
}

DiscreteMeasure scatter_to_grid(const SupportMask& mask, std::span<const double> weights) {
  if (weights.size() != mask.count())
    throw std::invalid_argument("scatter_to_grid: weight count differs from mask size");
  std::vector<double> w(mask.grid().size(), 0.0);
  for (std::size_t k = 0; k < weights.size(); ++k) w[mask.cells()[k]] = weights[k];
  return make_grid_measure(mask.grid(), std::move(w));
}

void write_measure_csv(std::ostream& os, const DiscreteMeasure& m) {
  os << std::setprecision(17);
  if (m.support.dim() != 2) {
    os << "x";
    for (std::size_t k = 1; k < m.support.dim(); ++k) os << ",x" << k;
    os << ",weight\n";
  } else {
    os << "x,y,weight\n";
  }
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (double v : m.support[i]) os << v << ',';
    os << m.weights[i] << '\n';
  }
}

void write_grid_text(std::ostream& os, const DiscreteMeasure& m) {
  if (!m.grid) throw std::invalid_argument("write_grid_text: measure has no grid support");
  const auto& g = *m.grid;
  os << std::setprecision(17);
  os << "bbox " << g.bbox().xmin << ' ' << g.bbox().xmax << ' ' << g.bbox().ymin << ' '
     << g.bbox().ymax << '\n';
  os << "size " << g.nx() << ' ' << g.ny() << '\n';
  for (std::size_t iy = 0; iy < g.ny(); ++iy) {
    for (std::size_t ix = 0; ix < g.nx(); ++ix) {
      if (ix) os << ' ';
      os << m.weights[g.index(ix, iy)];
    }
    os << '\n';
  }
}

DiscreteMeasure read_measure_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("measure csv: missing header");
  const auto dim = static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
  if (dim == 0) throw std::runtime_error("measure csv: malformed header");
  PointCloud pts(dim);
  std::vector<double> w;
  std::vector<double> row(dim + 1);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string field;
    std::size_t k = 0;
    while (std::getline(ss, field, ',')) {
      if (k > dim) throw std::runtime_error("measure csv: too many fields");
      char* end = nullptr;
      row[k] = std::strtod(field.c_str(), &end);
      if (field.empty() || end != field.c_str() + field.size())
        throw std::runtime_error("measure csv: bad number '" + field + "'");
      ++k;
    }
    if (k != dim + 1) throw std::runtime_error("measure csv: too few fields");
    pts.push_back(std::span<const double>(row.data(), dim));
    w.push_back(row[dim]);
  }
  return make_point_measure(std::move(pts), std::move(w));
}

}  // namespace interpark
