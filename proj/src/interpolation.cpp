#include "interpark/interpolation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace interpark {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

PointCloud points_of(const GridSpec& grid, const std::vector<std::uint32_t>& cells) {
  PointCloud pc(2);
  for (auto c : cells) {
    const auto p = grid.center(c);
    pc.push_back(p);
  }
  return pc;
}

void check_probability(const DiscreteMeasure& m, const char* what) {
  for (double w : m.weights)
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument(std::string(what) + ": invalid weight");
  if (std::abs(total_mass(m) - 1.0) > 1e-9)
    throw std::invalid_argument(std::string(what) + ": must be a probability measure");
}

void positive_part(const DiscreteMeasure& m, std::vector<double>& w, std::vector<std::uint32_t>& idx,
                   PointCloud& pts) {
  pts = PointCloud(m.support.dim());
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m.weights[i] > 0.0) {
      w.push_back(m.weights[i]);
      idx.push_back(static_cast<std::uint32_t>(i));
      pts.push_back(m.support[i]);
    }
  }
}

struct Scratch {
  std::vector<double> pot_k, pot_0, pot_1, lse0, lse1, log_a0, log_a1;
};

// Pivot-side log sums: log A_i(x) = log sum_j w_j exp(phi_j - c(j, x) / eps).
void pivot_sums(const InterpolationKernels& k, const DualPotentials& d, const std::vector<double>& la,
                const std::vector<double>& lb, double inv, Scratch& s) {
  for (std::size_t i = 0; i < la.size(); ++i) s.pot_0[i] = d.phi0[i] + la[i];
  for (std::size_t j = 0; j < lb.size(); ++j) s.pot_1[j] = d.phi1[j] + lb[j];
  col_log_sum_exp(k.c0, inv, s.pot_0, s.log_a0);
  col_log_sum_exp(k.c1, inv, s.pot_1, s.log_a1);
}

double log_or_inf(double v) { return v == kInf ? kInf : std::log(v); }

}  // namespace

PivotDomain make_pivot_domain(const GridSpec& grid, const PivotConstraint& constraint,
                              bool require_unit_capacity) {
  PivotDomain dom{grid, {}, {}, {}, false};
  if (std::holds_alternative<FreeConstraint>(constraint)) {
    for (std::size_t c = 0; c < grid.size(); ++c) dom.cells.push_back(static_cast<std::uint32_t>(c));
  } else if (const auto* mask = std::get_if<SupportMask>(&constraint)) {
    if (!(mask->grid() == grid)) throw std::invalid_argument("support mask grid differs from pivot grid");
    for (auto c : mask->cells()) dom.cells.push_back(static_cast<std::uint32_t>(c));
  } else {
    const auto& bound = std::get<DensityBound>(constraint);
    if (!(bound.grid() == grid)) throw std::invalid_argument("density bound grid differs from pivot grid");
    if (require_unit_capacity && !(bound.total_cap_mass() > 1.0))
      throw std::invalid_argument("density bound is infeasible: total cap mass must exceed 1");
    dom.capped = true;
    for (std::size_t c = 0; c < grid.size(); ++c) {
      if (bound.cap(c) > 0.0) {
        dom.cells.push_back(static_cast<std::uint32_t>(c));
        dom.cap_mass.push_back(bound.cell_mass_cap(c));
      }
    }
  }
  if (dom.cells.empty()) throw std::invalid_argument("pivot domain is empty");
  if (!dom.capped) dom.cap_mass.assign(dom.cells.size(), kInf);
  dom.points = points_of(grid, dom.cells);
  return dom;
}

InterpolationKernels build_interpolation_kernels(const InterpolationProblem& problem,
                                                 bool require_unit_capacity) {
  check_probability(problem.mu0, "mu0");
  check_probability(problem.mu1, "mu1");
  problem.config.validate();
  InterpolationKernels k{
      make_pivot_domain(problem.pivot_grid, problem.constraint, require_unit_capacity), {}, {}, {}, {}, {}, {}};
  PointCloud p0, p1;
  positive_part(problem.mu0, k.a, k.index0, p0);
  positive_part(problem.mu1, k.b, k.index1, p1);
  k.c0 = cost_matrix(problem.c0, p0, k.domain.points);
  k.c1 = cost_matrix(problem.c1, p1, k.domain.points);
  return k;
}

DiscreteMeasure pivot_from_duals(const DualPotentials& duals, const InterpolationKernels& k,
                                 double epsilon) {
  const std::size_t nk = k.domain.size();
  if (duals.phi0.size() != k.a.size() || duals.phi1.size() != k.b.size())
    throw std::invalid_argument("pivot_from_duals: potential sizes do not match kernels");
  const auto la = log_weights(k.a);
  const auto lb = log_weights(k.b);
  Scratch s{{}, std::vector<double>(k.a.size()), std::vector<double>(k.b.size()), {}, {},
            std::vector<double>(nk), std::vector<double>(nk)};
  pivot_sums(k, duals, la, lb, 1.0 / epsilon, s);
  const double log_h = std::log(k.domain.cell_area());
  std::vector<double> w(k.domain.grid.size(), 0.0);
  for (std::size_t x = 0; x < nk; ++x) {
    const double p0 = duals.psi0.empty() ? 0.0 : duals.psi0[x];
    const double p1 = duals.psi1.empty() ? 0.0 : duals.psi1[x];
    const double lg = log_h + 0.5 * (p0 + s.log_a0[x] + p1 + s.log_a1[x]);
    w[k.domain.cells[x]] = std::exp(lg);
  }
  return make_grid_measure(k.domain.grid, std::move(w));
}

double dual_objective_interpolation(const DualPotentials& duals, const InterpolationKernels& k,
                                    double epsilon) {
  const std::size_t nk = k.domain.size();
  DualPotentials d = duals;
  if (d.phi0.empty()) d.phi0.assign(k.a.size(), 0.0);
  if (d.phi1.empty()) d.phi1.assign(k.b.size(), 0.0);
  if (d.psi0.empty()) d.psi0.assign(nk, 0.0);
  if (d.psi1.empty()) d.psi1.assign(nk, 0.0);
  if (d.phi0.size() != k.a.size() || d.phi1.size() != k.b.size() || d.psi0.size() != nk ||
      d.psi1.size() != nk)
    throw std::invalid_argument("dual_objective_interpolation: potential sizes do not match");
  const auto la = log_weights(k.a);
  const auto lb = log_weights(k.b);
  Scratch s{{}, std::vector<double>(k.a.size()), std::vector<double>(k.b.size()), {}, {},
            std::vector<double>(nk), std::vector<double>(nk)};
  pivot_sums(k, d, la, lb, 1.0 / epsilon, s);
  const double h = k.domain.cell_area();
  double val = 0.0;
  for (std::size_t x = 0; x < nk; ++x) {
    val -= h * (std::exp(d.psi0[x] + s.log_a0[x]) + std::exp(d.psi1[x] + s.log_a1[x]));
    if (k.domain.capped) val += k.domain.cap_mass[x] * std::min(0.0, d.psi0[x] + d.psi1[x]);
  }
  for (std::size_t i = 0; i < k.a.size(); ++i) val += d.phi0[i] * k.a[i];
  for (std::size_t j = 0; j < k.b.size(); ++j) val += d.phi1[j] * k.b[j];
  return val;
}

double dual_objective_interpolation(const DualPotentials& duals, const InterpolationProblem& problem) {
  return dual_objective_interpolation(duals, build_interpolation_kernels(problem),
                                      problem.config.epsilon);
}

InterpolationSolution solve_interpolation(const InterpolationProblem& problem) {
  const auto schedule = problem.config.resolved_schedule();
  const InterpolationKernels k = build_interpolation_kernels(problem);
  const std::size_t n0 = k.a.size();
  const std::size_t n1 = k.b.size();
  const std::size_t nk = k.domain.size();
  const double log_h = std::log(k.domain.cell_area());
  const auto la = log_weights(k.a);
  const auto lb = log_weights(k.b);
  std::vector<double> log_cap(nk);
  for (std::size_t x = 0; x < nk; ++x) log_cap[x] = log_or_inf(k.domain.cap_mass[x]);

  DualPotentials d{std::vector<double>(n0, 0.0), std::vector<double>(n1, 0.0),
                   std::vector<double>(nk, 0.0), std::vector<double>(nk, 0.0)};
  Scratch s{std::vector<double>(nk), std::vector<double>(n0), std::vector<double>(n1),
            std::vector<double>(n0), std::vector<double>(n1), std::vector<double>(nk),
            std::vector<double>(nk)};

  InterpolationSolution sol;
  EntropicReport& rep = sol.report;
  double prev_eps = schedule.front();
  double viol = kInf;
  bool converged = false;
  for (double eps : schedule) {
    const double r = prev_eps / eps;
    for (auto* v : {&d.phi0, &d.phi1, &d.psi0, &d.psi1})
      for (double& x : *v) x *= r;
    prev_eps = eps;
    const double inv = 1.0 / eps;
    converged = false;
    for (std::size_t it = 0;; ++it) {
      // The two phi updates only see psi, so both marginal errors of the
      // current state come out of the same log-sum-exp pass.
      for (std::size_t x = 0; x < nk; ++x) s.pot_k[x] = d.psi0[x] + log_h;
      row_log_sum_exp(k.c0, inv, s.pot_k, s.lse0);
      for (std::size_t x = 0; x < nk; ++x) s.pot_k[x] = d.psi1[x] + log_h;
      row_log_sum_exp(k.c1, inv, s.pot_k, s.lse1);
      viol = 0.0;
      for (std::size_t i = 0; i < n0; ++i) viol += k.a[i] * std::abs(std::expm1(d.phi0[i] + s.lse0[i]));
      for (std::size_t j = 0; j < n1; ++j) viol += k.b[j] * std::abs(std::expm1(d.phi1[j] + s.lse1[j]));
      if (it > 0 && viol <= problem.config.marginal_tol) {
        converged = true;
        rep.iterations_used += it;
        break;
      }
      if (it == problem.config.max_iter) {
        rep.iterations_used += it;
        break;
      }
      for (std::size_t i = 0; i < n0; ++i) d.phi0[i] = -s.lse0[i];
      for (std::size_t j = 0; j < n1; ++j) d.phi1[j] = -s.lse1[j];
      pivot_sums(k, d, la, lb, inv, s);
      // Joint psi step: the pivot is the geometric mean of the unscaled
      // marginals clipped at the cap, and each psi_i matches its leg to it.
      for (std::size_t x = 0; x < nk; ++x) {
        const double lm = std::min(log_cap[x], log_h + 0.5 * (s.log_a0[x] + s.log_a1[x]));
        d.psi0[x] = lm - log_h - s.log_a0[x];
        d.psi1[x] = lm - log_h - s.log_a1[x];
      }
    }
    double primal = 0.0;
    for (std::size_t i = 0; i < n0; ++i)
      for (std::size_t x = 0; x < nk; ++x)
        primal += k.c0(i, x) * std::exp(d.phi0[i] + d.psi0[x] - k.c0(i, x) * inv + la[i] + log_h);
    for (std::size_t j = 0; j < n1; ++j)
      for (std::size_t x = 0; x < nk; ++x)
        primal += k.c1(j, x) * std::exp(d.phi1[j] + d.psi1[x] - k.c1(j, x) * inv + lb[j] + log_h);
    rep.stage_epsilons.push_back(eps);
    rep.stage_primal_costs.push_back(primal);
  }

  const double eps = schedule.back();
  const double inv = 1.0 / eps;
  const std::size_t ncell = k.domain.grid.size();
  sol.gamma0.rows = problem.mu0.size();
  sol.gamma0.cols = ncell;
  sol.gamma1.rows = ncell;
  sol.gamma1.cols = problem.mu1.size();
  double h_sum = 0.0, cost = 0.0;
  for (std::size_t i = 0; i < n0; ++i) {
    for (std::size_t x = 0; x < nk; ++x) {
      const double g = d.phi0[i] + d.psi0[x];
      const double v = std::exp(g - k.c0(i, x) * inv + la[i] + log_h);
      if (v > 0.0) {
        sol.gamma0.entries.push_back({k.index0[i], k.domain.cells[x], v});
        h_sum += v * (g - 1.0);
        cost += v * k.c0(i, x);
      }
    }
  }
  std::vector<double> pivot(ncell, 0.0);
  for (std::size_t x = 0; x < nk; ++x) {
    for (std::size_t j = 0; j < n1; ++j) {
      const double g = d.phi1[j] + d.psi1[x];
      const double v = std::exp(g - k.c1(j, x) * inv + lb[j] + log_h);
      if (v > 0.0) {
        sol.gamma1.entries.push_back({k.domain.cells[x], k.index1[j], v});
        h_sum += v * (g - 1.0);
        cost += v * k.c1(j, x);
        pivot[k.domain.cells[x]] += v;
      }
    }
  }
  sol.pivot = make_grid_measure(k.domain.grid, std::move(pivot));
  sol.primal_value = cost;
  sol.dual_value = eps * dual_objective_interpolation(d, k, eps);
  rep.primal_cost = cost;
  rep.entropic_objective = eps * h_sum;
  rep.dual_value = sol.dual_value;
  rep.marginal_violation_L1 = viol;
  rep.converged = converged;
  rep.final_epsilon = eps;
  sol.duals = std::move(d);
  return sol;
}

}  // namespace interpark
