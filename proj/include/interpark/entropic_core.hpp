#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "interpark/costs.hpp"
#include "interpark/exact_oracles.hpp"

namespace interpark {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct SolverConfig {
  double epsilon = 5e-4;
  /// Iteration budget per stage of the epsilon schedule.
  std::size_t max_iter = 200000;
  /// L1 tolerance on the marginal violation.
  double marginal_tol = 1e-10;
  /// Explicit decreasing schedule ending at epsilon. When empty and
  /// use_schedule is set, epsilon is reached by halving from 0.1.
  std::vector<double> epsilon_schedule;
  bool use_schedule = true;

  void validate() const;
  std::vector<double> resolved_schedule() const;
};

std::vector<double> default_epsilon_schedule(double target, double start = 0.1);

/// Dimensionless log-scalings: a plan is exp(phi + psi) times its reference
/// measure. psi0/psi1 are indexed by the active pivot cells and are empty
/// for plain two-marginal problems.
struct DualPotentials {
  std::vector<double> phi0;
  std::vector<double> phi1;
  std::vector<double> psi0;
  std::vector<double> psi1;
};

struct EntropicReport {
  /// Unregularized transport cost of the returned plans.
  double primal_cost = 0.0;
  /// epsilon * sum H(plan | reference), in cost units.
  double entropic_objective = 0.0;
  /// epsilon * (dual objective), in cost units.
  double dual_value = 0.0;
  double marginal_violation_L1 = 0.0;
  std::size_t iterations_used = 0;
  bool converged = false;
  double final_epsilon = 0.0;
  std::vector<double> stage_epsilons;
  std::vector<double> stage_primal_costs;
};

/// sum_i P_i (log(P_i / Q_i) - 1) with 0 log 0 = 0; +infinity when P is not
/// absolutely continuous with respect to Q.
double relative_entropy(std::span<const double> p, std::span<const double> q);

/// log sum_j exp(log_weights_j + log_kernel_j), max-shifted; -inf when every
/// term is -inf.
double stabilized_update(std::span<const double> log_weights, std::span<const double> log_kernel);

double log_sum_exp(std::span<const double> terms);
double log_add_exp(double a, double b);

/// out_i = log sum_j exp(col_pot_j - cost(i, j) * inv_eps)
void row_log_sum_exp(const CostMatrix& cost, double inv_eps, std::span<const double> col_pot,
                     std::span<double> out);
/// out_j = log sum_i exp(row_pot_i - cost(i, j) * inv_eps)
void col_log_sum_exp(const CostMatrix& cost, double inv_eps, std::span<const double> row_pot,
                     std::span<double> out);

std::vector<double> log_weights(std::span<const double> w);

struct SinkhornResult {
  TransportPlan plan;
  DualPotentials duals;
  EntropicReport report;
};

/// Entropic transport with reference a (x) b, log-domain alternating updates.
SinkhornResult sinkhorn_standard(const CostMatrix& cost, std::span<const double> a,
                                 std::span<const double> b, const SolverConfig& config);

}  // namespace interpark
