#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "interpark/costs.hpp"
#include "interpark/exact_oracles.hpp"
#include "interpark/measures.hpp"

namespace interpark {

inline constexpr double kNegativeGapTolerance = 1e-9;

struct Band {
  double lo = 0.05;
  double hi = 0.95;
};

/// Share of the pivot mass sitting in cells whose density-to-cap ratio lies
/// strictly inside the band. A zero pivot gives 0.
double bang_bang_fraction(const DiscreteMeasure& pivot, const DensityBound& bound, Band band = {});

/// Share of the pivot mass on mask cells touching the complement.
double boundary_mass_fraction(const DiscreteMeasure& pivot, const SupportMask& mask);

struct GapCheck {
  double gap = 0.0;
  /// Set when the gap is below -kNegativeGapTolerance, which signals a bug.
  bool negative = false;
};

GapCheck duality_gap(double primal_value, double dual_value);

/// Strong-convexity and smoothness constants of F(z) = s|z|^2 over both costs.
std::pair<double, double> quadratic_cost_scales(const CostSpec& c0, const CostSpec& c1);

/// Largest pivot density over cells at Chebyshev depth >= min_depth in the
/// mask, divided by |mu0|_inf 2^d (Lambda/lambda)^d with d = 2.
double interior_density_bound_check(const DiscreteMeasure& pivot, const DiscreteMeasure& mu0,
                                    std::pair<double, double> scales, const SupportMask& mask,
                                    std::size_t min_depth = 2);
double interior_density_bound_check(const DiscreteMeasure& pivot, const DiscreteMeasure& mu0,
                                    const CostSpec& c0, const CostSpec& c1, const SupportMask& mask,
                                    std::size_t min_depth = 2);

/// L1 distance between the plan's marginals and the targets (either may be
/// empty to skip that side).
double marginal_violation(const TransportPlan& plan, std::span<const double> rows,
                          std::span<const double> cols);

/// Total-variation distance sum |p - q| / 2.
double tv_distance(std::span<const double> p, std::span<const double> q);

struct DiagnosticsReport {
  std::string run;
  double bang_bang_fraction = -1.0;
  double boundary_mass_fraction = -1.0;
  double duality_gap = 0.0;
  std::vector<std::pair<std::string, double>> marginal_violations;
  double interior_density_ratio = -1.0;

  /// Unset quantities (negative fractions or ratio) are written as "na".
  void write_key_values(std::ostream& os) const;
  static std::string csv_header();
  std::string csv_row() const;
};

}  // namespace interpark
