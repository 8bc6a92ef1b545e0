#pragma once

#include <tuple>

#include "interpark/interpolation.hpp"

namespace interpark {

/// Residents nu0 either walk to the services nu1 at cost c1, or drive (c0)
/// to a parking spot in the pivot domain and walk from there (c1).
/// c1 must be lambda * c0 with lambda >= 1.
struct ParkingProblem {
  DiscreteMeasure nu0;
  DiscreteMeasure nu1;
  CostSpec c0;
  CostSpec c1;
  GridSpec pivot_grid;
  PivotConstraint constraint;
  SolverConfig config;
  /// When false every resident drives, which turns the problem into the
  /// interpolation problem.
  bool allow_walking = true;
};

struct ParkingPlans {
  /// nu0 support x nu1 support.
  TransportPlan walk;
  /// nu0 support x pivot grid cells.
  TransportPlan drive_to_pivot;
  /// Pivot grid cells x nu1 support.
  TransportPlan pivot_to_service;
};

struct ParkingEntropicSolution {
  ParkingPlans plans;
  DiscreteMeasure parking_measure;
  DiscreteMeasure mu0_driving;
  DiscreteMeasure mu1_driving;
  double alpha = 0.0;
  double primal_value = 0.0;
  double walk_cost = 0.0;
  double drive_cost = 0.0;
  double park_walk_cost = 0.0;
  double dual_value = 0.0;
  DualPotentials duals;
  EntropicReport report;
};

/// Ratio c1 / c0 after checking that both costs share the exponent.
double parking_lambda(const CostSpec& c0, const CostSpec& c1);

ParkingEntropicSolution solve_parking(const ParkingProblem& problem);

/// <c1, walk> + <c0, drive_to_pivot> + <c1, pivot_to_service>, with plan
/// indices referring to the problem's supports and pivot grid.
double parking_objective(const ParkingPlans& plans, const ParkingProblem& problem);
double parking_objective(const ParkingEntropicSolution& solution, const ParkingProblem& problem);

/// Plans of an exact solution on the pivot point set `k_cells` (grid cell
/// index of every K point used by parking_via_reduction).
ParkingPlans plans_of(const ExactParkingSolution& exact, std::size_t n0, std::size_t n1,
                      std::size_t grid_cells, const std::vector<std::uint32_t>& k_cells);

/// Driving parts of nu0 and nu1 and the driving fraction.
std::tuple<DiscreteMeasure, DiscreteMeasure, double> split_driving_walking(
    const ParkingPlans& plans, const ParkingProblem& problem);

}  // namespace interpark
