#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "interpark/measures.hpp"

namespace interpark {

/// c(x, y) = scale * |x - y|^exponent with the Euclidean norm.
struct CostSpec {
  double exponent = 2.0;
  double scale = 1.0;

  void validate() const;
};

double eval_cost(const CostSpec& spec, std::span<const double> x, std::span<const double> y);

/// Dense row-major cost matrix; rows index support A, columns support B.
class CostMatrix {
 public:
  CostMatrix() = default;
  CostMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  const std::vector<double>& data() const { return data_; }
  double max_entry() const;
  CostMatrix transposed() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

CostMatrix cost_matrix(const CostSpec& spec, const PointCloud& a, const PointCloud& b);

struct ReducedCostResult {
  CostMatrix matrix;
  /// Index into K_points of a minimizing pivot, per (row, col), row-major.
  std::vector<std::uint32_t> argmin_map;

  std::uint32_t pivot(std::size_t r, std::size_t c) const {
    return argmin_map[r * matrix.cols() + c];
  }
};

/// min over k in K of c0(x0, k) + c1(k, x1) for every pair, smallest k on ties.
ReducedCostResult reduced_interpolation_cost(const CostSpec& c0, const CostSpec& c1,
                                             const PointCloud& x0s, const PointCloud& x1s,
                                             const PointCloud& k_points);

struct ParkingCostResult {
  CostMatrix matrix;
  /// 1 where walking directly attains the minimum.
  std::vector<std::uint8_t> walk_flag;
  /// Best pivot per entry; meaningful only where walk_flag is 0.
  std::vector<std::uint32_t> park_map;

  bool walks(std::size_t r, std::size_t c) const { return walk_flag[r * matrix.cols() + c] != 0; }
  std::uint32_t pivot(std::size_t r, std::size_t c) const {
    return park_map[r * matrix.cols() + c];
  }
};

/// C = min{c1(x0, x1), min_k c0(x0, k) + c1(k, x1)}; ties resolved as walking.
ParkingCostResult parking_effective_cost(const CostSpec& c0, const CostSpec& c1,
                                         const PointCloud& x0s, const PointCloud& x1s,
                                         const PointCloud& k_points);

/// Bounding box of both supports padded by `padding_factor` times its diagonal.
/// The default factor of 1 is a heuristic for the coercivity compact.
BBox coercivity_box(const PointCloud& a, const PointCloud& b, double padding_factor = 1.0);

void write_cost_csv(std::ostream& os, const CostMatrix& m);

}  // namespace interpark
