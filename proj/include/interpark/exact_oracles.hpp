#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "interpark/costs.hpp"
#include "interpark/measures.hpp"

namespace interpark {

struct PlanEntry {
  std::uint32_t row;
  std::uint32_t col;
  double mass;
};

/// Sparse coupling between two supports.
struct TransportPlan {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<PlanEntry> entries;

  std::vector<double> row_sums() const;
  std::vector<double> col_sums() const;
  double mass() const;
  double cost(const CostMatrix& c) const;
};

struct ExactOtResult {
  TransportPlan plan;
  double value = 0.0;
  /// LP dual: f_i + g_j <= cost(i, j), with equality on the plan's support.
  std::vector<double> dual_source;
  std::vector<double> dual_target;
  double dual_value = 0.0;
};

/// Exact discrete optimal transport by successive shortest paths with
/// potentials on the complete bipartite graph. Masses must balance within
/// 1e-9; b is rescaled proportionally to match a exactly.
ExactOtResult exact_ot(const CostMatrix& cost, std::span<const double> a, std::span<const double> b);

/// Quantile-coupling value of sum |g1(s) - g0(s)|^p ds for measures on a
/// line (1-D supports, or 2-D supports sharing one y coordinate). Falls back
/// to exact_ot when p < 1.
double quantile_ot_1d(const DiscreteMeasure& mu0, const DiscreteMeasure& mu1, double p);

struct ReductionResult {
  double value = 0.0;
  /// Pivot measure on the K points (same order as the K point cloud).
  DiscreteMeasure pivot;
  TransportPlan plan;
};

/// Solves the interpolation problem over a finite pivot set K exactly by
/// transporting mu0 to mu1 with the reduced cost and pushing the optimal plan
/// through the argmin map.
ReductionResult interpolation_via_reduction(const DiscreteMeasure& mu0, const DiscreteMeasure& mu1,
                                            const CostSpec& c0, const CostSpec& c1,
                                            const PointCloud& k_points);

struct DriveEntry {
  std::uint32_t source;
  std::uint32_t pivot;
  std::uint32_t target;
  double mass;
};

struct ExactParkingSolution {
  TransportPlan walk_plan;
  std::vector<DriveEntry> drive_plan;
  DiscreteMeasure parking_measure;
  double driving_fraction = 0.0;
  double walk_cost = 0.0;
  double drive_cost = 0.0;  // c0 leg
  double park_walk_cost = 0.0;  // c1 leg from the parking spot
  double total_cost = 0.0;
};

ExactParkingSolution parking_via_reduction(const DiscreteMeasure& nu0, const DiscreteMeasure& nu1,
                                           const CostSpec& c0, const CostSpec& c1,
                                           const PointCloud& k_points);

struct LevelSetResult {
  double alpha = 0.0;
  std::vector<std::uint8_t> region;  // per quadrature cell
  double level = 0.0;
};

/// Density-capped parking for two Diracs (residents at x0, services at the
/// origin) by quadrature of f(x) = |x-x0|^p + lambda|x|^p - lambda|x0|^p.
LevelSetResult parking_level_set(double p, double lambda, std::array<double, 2> x0, double cap,
                                 const GridSpec& quadrature_grid);

/// pi |x0|^2 lambda^2 / (lambda+1)^2, valid while the zero level set of the
/// p = 2 parking function has area below one.
double alpha_closed_form_p2(double lambda, double x0_norm);

void write_plan_csv(std::ostream& os, const TransportPlan& plan);

}  // namespace interpark
