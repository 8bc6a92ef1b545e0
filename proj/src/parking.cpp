#include "interpark/parking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace interpark {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

InterpolationProblem as_interpolation(const ParkingProblem& p) {
  return {p.nu0, p.nu1, p.c0, p.c1, p.pivot_grid, p.constraint, p.config};
}

std::span<const double> pivot_point(const GridSpec& grid, std::uint32_t cell, std::array<double, 2>& buf) {
  buf = grid.center(cell);
  return buf;
}

}  // namespace

double parking_lambda(const CostSpec& c0, const CostSpec& c1) {
  c0.validate();
  c1.validate();
  if (c0.exponent != c1.exponent)
    throw std::invalid_argument("parking: walking and driving costs must share the exponent");
  const double lambda = c1.scale / c0.scale;
  if (lambda < 1.0 - 1e-12) throw std::invalid_argument("parking: lambda must be at least 1");
  return lambda;
}

ParkingEntropicSolution solve_parking(const ParkingProblem& problem) {
  parking_lambda(problem.c0, problem.c1);
  const auto schedule = problem.config.resolved_schedule();
  const bool walking = problem.allow_walking;
  const InterpolationKernels k = build_interpolation_kernels(as_interpolation(problem), !walking);
  const std::size_t n0 = k.a.size();
  const std::size_t n1 = k.b.size();
  const std::size_t nk = k.domain.size();

  PointCloud p0(problem.nu0.support.dim()), p1(problem.nu1.support.dim());
  for (auto i : k.index0) p0.push_back(problem.nu0.support[i]);
  for (auto j : k.index1) p1.push_back(problem.nu1.support[j]);
  const CostMatrix walk = walking ? cost_matrix(problem.c1, p0, p1) : CostMatrix();

  const double log_h = std::log(k.domain.cell_area());
  const auto la = log_weights(k.a);
  const auto lb = log_weights(k.b);
  std::vector<double> log_cap(nk);
  for (std::size_t x = 0; x < nk; ++x)
    log_cap[x] = k.domain.cap_mass[x] == kInf ? kInf : std::log(k.domain.cap_mass[x]);

  DualPotentials d{std::vector<double>(n0, 0.0), std::vector<double>(n1, 0.0),
                   std::vector<double>(nk, 0.0), std::vector<double>(nk, 0.0)};
  std::vector<double> pot_k(nk), pot0(n0), pot1(n1), ld0(n0), ld1(n1), lw0(n0, kNegInf),
      lw1(n1, kNegInf), la0(nk), la1(nk);

  ParkingEntropicSolution sol;
  EntropicReport& rep = sol.report;
  double prev_eps = schedule.front();
  double viol = kInf;
  bool converged = false;
  CostMatrix walk_scaled;
  for (double eps : schedule) {
    const double r = prev_eps / eps;
    for (auto* v : {&d.phi0, &d.phi1, &d.psi0, &d.psi1})
      for (double& x : *v) x *= r;
    prev_eps = eps;
    const double inv = 1.0 / eps;
    // The walking kernel is small, so it is kept pre-divided by epsilon.
    if (walking) {
      std::vector<double> w(walk.data());
      for (double& v : w) v *= inv;
      walk_scaled = CostMatrix(walk.rows(), walk.cols(), std::move(w));
    }
    const CostMatrix& wk = walk_scaled;
    auto walk_rows_eps = [&] {
      if (!walking) return;
      for (std::size_t j = 0; j < n1; ++j) pot1[j] = d.phi1[j] + lb[j];
      row_log_sum_exp(wk, 1.0, pot1, lw0);
    };
    auto walk_cols_eps = [&] {
      if (!walking) return;
      for (std::size_t i = 0; i < n0; ++i) pot0[i] = d.phi0[i] + la[i];
      col_log_sum_exp(wk, 1.0, pot0, lw1);
    };
    converged = false;
    for (std::size_t it = 0;; ++it) {
      for (std::size_t x = 0; x < nk; ++x) pot_k[x] = d.psi0[x] + log_h;
      row_log_sum_exp(k.c0, inv, pot_k, ld0);
      for (std::size_t x = 0; x < nk; ++x) pot_k[x] = d.psi1[x] + log_h;
      row_log_sum_exp(k.c1, inv, pot_k, ld1);
      walk_rows_eps();
      walk_cols_eps();
      viol = 0.0;
      for (std::size_t i = 0; i < n0; ++i)
        viol += k.a[i] * std::abs(std::expm1(d.phi0[i] + log_add_exp(lw0[i], ld0[i])));
      for (std::size_t j = 0; j < n1; ++j)
        viol += k.b[j] * std::abs(std::expm1(d.phi1[j] + log_add_exp(lw1[j], ld1[j])));
      if (it > 0 && viol <= problem.config.marginal_tol) {
        converged = true;
        rep.iterations_used += it;
        break;
      }
      if (it == problem.config.max_iter) {
        rep.iterations_used += it;
        break;
      }
      for (std::size_t i = 0; i < n0; ++i) d.phi0[i] = -log_add_exp(lw0[i], ld0[i]);
      walk_cols_eps();
      for (std::size_t j = 0; j < n1; ++j) d.phi1[j] = -log_add_exp(lw1[j], ld1[j]);

      for (std::size_t i = 0; i < n0; ++i) pot0[i] = d.phi0[i] + la[i];
      for (std::size_t j = 0; j < n1; ++j) pot1[j] = d.phi1[j] + lb[j];
      col_log_sum_exp(k.c0, inv, pot0, la0);
      col_log_sum_exp(k.c1, inv, pot1, la1);
      for (std::size_t x = 0; x < nk; ++x) {
        const double lm = std::min(log_cap[x], log_h + 0.5 * (la0[x] + la1[x]));
        d.psi0[x] = lm - log_h - la0[x];
        d.psi1[x] = lm - log_h - la1[x];
      }
    }
    double primal = 0.0;
    for (std::size_t i = 0; i < n0; ++i) {
      for (std::size_t x = 0; x < nk; ++x)
        primal += k.c0(i, x) * std::exp(d.phi0[i] + d.psi0[x] - k.c0(i, x) * inv + la[i] + log_h);
      if (walking)
        for (std::size_t j = 0; j < n1; ++j)
          primal += walk(i, j) * std::exp(d.phi0[i] + d.phi1[j] - wk(i, j) + la[i] + lb[j]);
    }
    for (std::size_t j = 0; j < n1; ++j)
      for (std::size_t x = 0; x < nk; ++x)
        primal += k.c1(j, x) * std::exp(d.phi1[j] + d.psi1[x] - k.c1(j, x) * inv + lb[j] + log_h);
    rep.stage_epsilons.push_back(eps);
    rep.stage_primal_costs.push_back(primal);
  }

  const double eps = schedule.back();
  const double inv = 1.0 / eps;
  const std::size_t ncell = k.domain.grid.size();
  const std::size_t N0 = problem.nu0.size();
  const std::size_t N1 = problem.nu1.size();
  auto& pl = sol.plans;
  pl.walk = {N0, N1, {}};
  pl.drive_to_pivot = {N0, ncell, {}};
  pl.pivot_to_service = {ncell, N1, {}};
  double h_sum = 0.0, mass = 0.0;
  std::vector<double> park(ncell, 0.0), d0(N0, 0.0), d1(N1, 0.0);
  for (std::size_t i = 0; i < n0; ++i) {
    if (walking) {
      for (std::size_t j = 0; j < n1; ++j) {
        const double g = d.phi0[i] + d.phi1[j];
        const double v = std::exp(g - walk(i, j) * inv + la[i] + lb[j]);
        if (v > 0.0) {
          pl.walk.entries.push_back({k.index0[i], k.index1[j], v});
          h_sum += v * (g - 1.0);
          mass += v;
          sol.walk_cost += v * walk(i, j);
        }
      }
    }
    for (std::size_t x = 0; x < nk; ++x) {
      const double g = d.phi0[i] + d.psi0[x];
      const double v = std::exp(g - k.c0(i, x) * inv + la[i] + log_h);
      if (v > 0.0) {
        pl.drive_to_pivot.entries.push_back({k.index0[i], k.domain.cells[x], v});
        h_sum += v * (g - 1.0);
        mass += v;
        sol.drive_cost += v * k.c0(i, x);
        d0[k.index0[i]] += v;
      }
    }
  }
  for (std::size_t x = 0; x < nk; ++x) {
    for (std::size_t j = 0; j < n1; ++j) {
      const double g = d.phi1[j] + d.psi1[x];
      const double v = std::exp(g - k.c1(j, x) * inv + lb[j] + log_h);
      if (v > 0.0) {
        pl.pivot_to_service.entries.push_back({k.domain.cells[x], k.index1[j], v});
        h_sum += v * (g - 1.0);
        mass += v;
        sol.park_walk_cost += v * k.c1(j, x);
        park[k.domain.cells[x]] += v;
        d1[k.index1[j]] += v;
      }
    }
  }

  double dual = -mass;
  for (std::size_t i = 0; i < n0; ++i) dual += d.phi0[i] * k.a[i];
  for (std::size_t j = 0; j < n1; ++j) dual += d.phi1[j] * k.b[j];
  if (k.domain.capped)
    for (std::size_t x = 0; x < nk; ++x) dual += k.domain.cap_mass[x] * std::min(0.0, d.psi0[x] + d.psi1[x]);

  sol.parking_measure = make_grid_measure(k.domain.grid, std::move(park));
  sol.alpha = total_mass(sol.parking_measure);
  sol.mu0_driving = make_point_measure(problem.nu0.support, std::move(d0));
  sol.mu1_driving = make_point_measure(problem.nu1.support, std::move(d1));
  sol.primal_value = sol.walk_cost + sol.drive_cost + sol.park_walk_cost;
  sol.dual_value = eps * dual;
  rep.primal_cost = sol.primal_value;
  rep.entropic_objective = eps * h_sum;
  rep.dual_value = sol.dual_value;
  rep.marginal_violation_L1 = viol;
  rep.final_epsilon = eps;
  // The pivot is read off the second leg; the first leg must carry the same mass.
  const double alpha0 = pl.drive_to_pivot.mass();
  rep.converged = converged && std::abs(alpha0 - sol.alpha) <= problem.config.marginal_tol;
  sol.duals = std::move(d);
  return sol;
}

double parking_objective(const ParkingPlans& plans, const ParkingProblem& problem) {
  const auto& grid = problem.pivot_grid;
  std::array<double, 2> buf{};
  double v = 0.0;
  for (const auto& e : plans.walk.entries)
    v += e.mass * eval_cost(problem.c1, problem.nu0.support[e.row], problem.nu1.support[e.col]);
  for (const auto& e : plans.drive_to_pivot.entries)
    v += e.mass * eval_cost(problem.c0, problem.nu0.support[e.row], pivot_point(grid, e.col, buf));
  for (const auto& e : plans.pivot_to_service.entries)
    v += e.mass * eval_cost(problem.c1, pivot_point(grid, e.row, buf), problem.nu1.support[e.col]);
  return v;
}

double parking_objective(const ParkingEntropicSolution& solution, const ParkingProblem& problem) {
  return parking_objective(solution.plans, problem);
}

ParkingPlans plans_of(const ExactParkingSolution& exact, std::size_t n0, std::size_t n1,
                      std::size_t grid_cells, const std::vector<std::uint32_t>& k_cells) {
  ParkingPlans pl{exact.walk_plan, {n0, grid_cells, {}}, {grid_cells, n1, {}}};
  for (const auto& e : exact.drive_plan) {
    if (e.pivot >= k_cells.size()) throw std::invalid_argument("plans_of: pivot index out of range");
    pl.drive_to_pivot.entries.push_back({e.source, k_cells[e.pivot], e.mass});
    pl.pivot_to_service.entries.push_back({k_cells[e.pivot], e.target, e.mass});
  }
  return pl;
}

std::tuple<DiscreteMeasure, DiscreteMeasure, double> split_driving_walking(
    const ParkingPlans& plans, const ParkingProblem& problem) {
  std::vector<double> d0(problem.nu0.size(), 0.0), d1(problem.nu1.size(), 0.0);
  for (const auto& e : plans.drive_to_pivot.entries) d0[e.row] += e.mass;
  for (const auto& e : plans.pivot_to_service.entries) d1[e.col] += e.mass;
  const double alpha = plans.pivot_to_service.mass();
  return {make_point_measure(problem.nu0.support, std::move(d0)),
          make_point_measure(problem.nu1.support, std::move(d1)), alpha};
}

}  // namespace interpark
