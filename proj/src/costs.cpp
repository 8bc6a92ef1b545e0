#include "interpark/costs.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace interpark {

void CostSpec::validate() const {
  if (!(exponent > 0.0) || !std::isfinite(exponent))
    throw std::invalid_argument("CostSpec: exponent must be positive");
  if (!(scale > 0.0) || !std::isfinite(scale))
    throw std::invalid_argument("CostSpec: scale must be positive");
}

namespace {

double dist2(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double t = x[k] - y[k];
    s += t * t;
  }
  return s;
}

// Works on squared distances so that p = 2 stays exact.
double power_of_dist2(double d2, double p) {
  if (d2 == 0.0) return 0.0;
  if (p == 2.0) return d2;
  if (p == 1.0) return std::sqrt(d2);
  return std::pow(d2, 0.5 * p);
}

void require_same_dim(const PointCloud& a, const PointCloud& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("cost: support dimensions differ");
}

}  // namespace

double eval_cost(const CostSpec& spec, std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("eval_cost: dimension mismatch");
  return spec.scale * power_of_dist2(dist2(x, y), spec.exponent);
}

CostMatrix::CostMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) throw std::invalid_argument("CostMatrix: size mismatch");
}

double CostMatrix::max_entry() const {
  return data_.empty() ? 0.0 : *std::max_element(data_.begin(), data_.end());
}

CostMatrix CostMatrix::transposed() const {
  std::vector<double> t(data_.size());
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t[c * rows_ + r] = data_[r * cols_ + c];
  return CostMatrix(cols_, rows_, std::move(t));
}

CostMatrix cost_matrix(const CostSpec& spec, const PointCloud& a, const PointCloud& b) {
  spec.validate();
  if (a.empty() || b.empty()) throw std::invalid_argument("cost_matrix: empty support");
  require_same_dim(a, b);
  std::vector<double> data(a.size() * b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      const double v = eval_cost(spec, a[i], b[j]);
      if (!std::isfinite(v)) throw std::overflow_error("cost_matrix: non-finite entry");
      data[i * b.size() + j] = v;
    }
  }
  return CostMatrix(a.size(), b.size(), std::move(data));
}

ReducedCostResult reduced_interpolation_cost(const CostSpec& c0, const CostSpec& c1,
                                             const PointCloud& x0s, const PointCloud& x1s,
                                             const PointCloud& k_points) {
  if (k_points.empty()) throw std::invalid_argument("reduced cost: empty pivot set K");
  if (k_points.size() > std::numeric_limits<std::uint32_t>::max())
    throw std::invalid_argument("reduced cost: pivot set too large");
  const CostMatrix to_k = cost_matrix(c0, x0s, k_points);
  const CostMatrix from_k = cost_matrix(c1, k_points, x1s).transposed();  // x1 x K

  const std::size_t n0 = x0s.size();
  const std::size_t n1 = x1s.size();
  const std::size_t nk = k_points.size();
  std::vector<double> data(n0 * n1);
  std::vector<std::uint32_t> arg(n0 * n1);
  for (std::size_t r = 0; r < n0; ++r) {
    const auto a = to_k.row(r);
    for (std::size_t c = 0; c < n1; ++c) {
      const auto b = from_k.row(c);
      double best = std::numeric_limits<double>::infinity();
      std::uint32_t best_k = 0;
      for (std::size_t k = 0; k < nk; ++k) {
        const double v = a[k] + b[k];
        if (v < best) {
          best = v;
          best_k = static_cast<std::uint32_t>(k);
        }
      }
      data[r * n1 + c] = best;
      arg[r * n1 + c] = best_k;
    }
  }
  return {CostMatrix(n0, n1, std::move(data)), std::move(arg)};
}

ParkingCostResult parking_effective_cost(const CostSpec& c0, const CostSpec& c1,
                                         const PointCloud& x0s, const PointCloud& x1s,
                                         const PointCloud& k_points) {
  ReducedCostResult drive = reduced_interpolation_cost(c0, c1, x0s, x1s, k_points);
  const CostMatrix walk = cost_matrix(c1, x0s, x1s);
  std::vector<double> data(walk.data().size());
  std::vector<std::uint8_t> flag(data.size());
  for (std::size_t e = 0; e < data.size(); ++e) {
    const double w = walk.data()[e];
    const double d = drive.matrix.data()[e];
    flag[e] = w <= d ? 1 : 0;
    data[e] = flag[e] ? w : d;
  }
  return {CostMatrix(walk.rows(), walk.cols(), std::move(data)), std::move(flag),
          std::move(drive.argmin_map)};
}

BBox coercivity_box(const PointCloud& a, const PointCloud& b, double padding_factor) {
  if (a.empty() && b.empty()) throw std::invalid_argument("coercivity_box: empty supports");
  if (a.dim() != 2 && b.dim() != 2) throw std::invalid_argument("coercivity_box: 2-D only");
  BBox box{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
           std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const PointCloud* pc : {&a, &b}) {
    for (std::size_t i = 0; i < pc->size(); ++i) {
      const auto p = (*pc)[i];
      box.xmin = std::min(box.xmin, p[0]);
      box.xmax = std::max(box.xmax, p[0]);
      box.ymin = std::min(box.ymin, p[1]);
      box.ymax = std::max(box.ymax, p[1]);
    }
  }
  double diam = std::hypot(box.xmax - box.xmin, box.ymax - box.ymin);
  if (diam == 0.0) diam = 1.0;
  const double pad = padding_factor * diam;
  box.xmin -= pad;
  box.xmax += pad;
  box.ymin -= pad;
  box.ymax += pad;
  return box;
}

void write_cost_csv(std::ostream& os, const CostMatrix& m) {
  os << std::setprecision(17);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (c) os << ',';
      os << m(r, c);
    }
    os << '\n';
  }
}

}  // namespace interpark
