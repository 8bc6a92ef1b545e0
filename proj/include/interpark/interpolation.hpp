#pragma once

#include <cstddef>
#include <cstdint>
#include <variant>
#include <vector>

#include "interpark/costs.hpp"
#include "interpark/entropic_core.hpp"
#include "interpark/exact_oracles.hpp"
#include "interpark/measures.hpp"

namespace interpark {

struct FreeConstraint {};

using PivotConstraint = std::variant<FreeConstraint, SupportMask, DensityBound>;

struct InterpolationProblem {
  DiscreteMeasure mu0;
  DiscreteMeasure mu1;
  CostSpec c0;
  CostSpec c1;
  GridSpec pivot_grid;
  PivotConstraint constraint;
  SolverConfig config;
};

/// Cells of the pivot grid where the pivot may carry mass, with their mass
/// caps (infinite when there is no density bound).
struct PivotDomain {
  GridSpec grid;
  std::vector<std::uint32_t> cells;
  PointCloud points;
  std::vector<double> cap_mass;
  bool capped = false;

  double cell_area() const { return grid.cell_area(); }
  std::size_t size() const { return cells.size(); }
};

/// With `require_unit_capacity`, throws when a density bound cannot hold a
/// unit of mass.
PivotDomain make_pivot_domain(const GridSpec& grid, const PivotConstraint& constraint,
                              bool require_unit_capacity = true);

/// Gibbs data of the two legs: c0 is (mu0 points x active cells) and c1 is
/// (mu1 points x active cells). Points of zero mass are dropped; `index0`
/// and `index1` map back to the original support.
struct InterpolationKernels {
  PivotDomain domain;
  CostMatrix c0;
  CostMatrix c1;
  std::vector<double> a;
  std::vector<double> b;
  std::vector<std::uint32_t> index0;
  std::vector<std::uint32_t> index1;
};

InterpolationKernels build_interpolation_kernels(const InterpolationProblem& problem,
                                                 bool require_unit_capacity = true);

struct InterpolationSolution {
  /// Masses per cell of the pivot grid.
  DiscreteMeasure pivot;
  /// Rows index mu0's support, columns the pivot grid cells.
  TransportPlan gamma0;
  /// Rows index the pivot grid cells, columns mu1's support.
  TransportPlan gamma1;
  /// phi0/phi1 follow the compressed supports of kernels.index0/index1;
  /// psi0/psi1 follow the active pivot cells.
  DualPotentials duals;
  double primal_value = 0.0;
  double dual_value = 0.0;
  EntropicReport report;
};

InterpolationSolution solve_interpolation(const InterpolationProblem& problem);

/// Geometric mean of the two pivot marginals exp(psi_i) h A_i, computed in
/// log space at the given epsilon. Returned on the full pivot grid.
DiscreteMeasure pivot_from_duals(const DualPotentials& duals, const InterpolationKernels& kernels,
                                 double epsilon);

/// Entropic dual objective, dimensionless (divide cost-unit values by epsilon).
double dual_objective_interpolation(const DualPotentials& duals, const InterpolationProblem& problem);
double dual_objective_interpolation(const DualPotentials& duals, const InterpolationKernels& kernels,
                                    double epsilon);

}  // namespace interpark
