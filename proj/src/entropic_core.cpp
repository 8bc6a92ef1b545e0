#include "interpark/entropic_core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace interpark {

void SolverConfig::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw std::invalid_argument("SolverConfig: epsilon must be positive");
  if (!(marginal_tol > 0.0)) throw std::invalid_argument("SolverConfig: marginal_tol must be positive");
  if (max_iter == 0) throw std::invalid_argument("SolverConfig: max_iter must be positive");
  if (!epsilon_schedule.empty()) {
    for (std::size_t k = 1; k < epsilon_schedule.size(); ++k)
      if (!(epsilon_schedule[k] < epsilon_schedule[k - 1]))
        throw std::invalid_argument("SolverConfig: epsilon schedule must be strictly decreasing");
    if (epsilon_schedule.back() != epsilon)
      throw std::invalid_argument("SolverConfig: epsilon schedule must end at epsilon");
    if (!(epsilon_schedule.front() > 0.0))
      throw std::invalid_argument("SolverConfig: epsilon schedule entries must be positive");
  }
}

std::vector<double> default_epsilon_schedule(double target, double start) {
  std::vector<double> s;
  for (double e = start; e > target; e *= 0.5) s.push_back(e);
  s.push_back(target);
  return s;
}

std::vector<double> SolverConfig::resolved_schedule() const {
  validate();
  if (!epsilon_schedule.empty()) return epsilon_schedule;
  if (use_schedule) return default_epsilon_schedule(epsilon);
  return {epsilon};
}

double relative_entropy(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::invalid_argument("relative_entropy: size mismatch");
  double h = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) return std::numeric_limits<double>::infinity();
    h += p[i] * (std::log(p[i] / q[i]) - 1.0);
  }
  return h;
}

double log_sum_exp(std::span<const double> terms) {
  double m = kNegInf;
  for (double t : terms) m = std::max(m, t);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double t : terms) s += std::exp(t - m);
  return m + std::log(s);
}

double log_add_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

double stabilized_update(std::span<const double> log_weights, std::span<const double> log_kernel) {
  if (log_weights.size() != log_kernel.size())
    throw std::invalid_argument("stabilized_update: size mismatch");
  double m = kNegInf;
  for (std::size_t j = 0; j < log_weights.size(); ++j) m = std::max(m, log_weights[j] + log_kernel[j]);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (std::size_t j = 0; j < log_weights.size(); ++j) s += std::exp(log_weights[j] + log_kernel[j] - m);
  return m + std::log(s);
}

void row_log_sum_exp(const CostMatrix& cost, double inv_eps, std::span<const double> col_pot,
                     std::span<double> out) {
  const std::size_t n = cost.rows();
  const std::size_t m = cost.cols();
  std::vector<double> buf(m);
  for (std::size_t i = 0; i < n; ++i) {
    const double* c = cost.row(i).data();
    double mx = kNegInf;
    for (std::size_t j = 0; j < m; ++j) {
      buf[j] = col_pot[j] - c[j] * inv_eps;
      mx = std::max(mx, buf[j]);
    }
    if (mx == kNegInf) {
      out[i] = kNegInf;
      continue;
    }
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) s += std::exp(buf[j] - mx);
    out[i] = mx + std::log(s);
  }
}

void col_log_sum_exp(const CostMatrix& cost, double inv_eps, std::span<const double> row_pot,
                     std::span<double> out) {
  const std::size_t n = cost.rows();
  const std::size_t m = cost.cols();
  std::vector<double> mx(m, kNegInf);
  for (std::size_t i = 0; i < n; ++i) {
    if (row_pot[i] == kNegInf) continue;
    const double* c = cost.row(i).data();
    const double r = row_pot[i];
    for (std::size_t j = 0; j < m; ++j) mx[j] = std::max(mx[j], r - c[j] * inv_eps);
  }
  std::vector<double> s(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (row_pot[i] == kNegInf) continue;
    const double* c = cost.row(i).data();
    const double r = row_pot[i];
    for (std::size_t j = 0; j < m; ++j) s[j] += std::exp(r - c[j] * inv_eps - mx[j]);
  }
  for (std::size_t j = 0; j < m; ++j) out[j] = mx[j] == kNegInf ? kNegInf : mx[j] + std::log(s[j]);
}

std::vector<double> log_weights(std::span<const double> w) {
  std::vector<double> out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) out[i] = w[i] > 0.0 ? std::log(w[i]) : kNegInf;
  return out;
}

namespace {

void rescale_potential(std::vector<double>& pot, double factor) {
  for (double& v : pot)
    if (std::isfinite(v)) v *= factor;
}

}  // namespace

SinkhornResult sinkhorn_standard(const CostMatrix& cost, std::span<const double> a,
                                 std::span<const double> b, const SolverConfig& config) {
  const auto schedule = config.resolved_schedule();
  if (a.size() != cost.rows() || b.size() != cost.cols())
    throw std::invalid_argument("sinkhorn_standard: weight sizes do not match cost");
  const double sa = total_mass(a);
  const double sb = total_mass(b);
  if (!(sa > 0.0) || std::abs(sa - sb) > 1e-9 * std::max(1.0, sa))
    throw std::invalid_argument("sinkhorn_standard: masses must be positive and equal");

  const std::size_t n = a.size();
  const std::size_t m = b.size();
  const auto la = log_weights(a);
  const auto lb = log_weights(b);
  std::vector<double> f(n, 0.0), g(m, 0.0), lse_row(n), lse_col(m), pot_col(m), pot_row(n);

  SinkhornResult res;
  auto& rep = res.report;
  double prev_eps = schedule.front();
  double viol = std::numeric_limits<double>::infinity();
  bool converged = false;
  for (double eps : schedule) {
    rescale_potential(f, prev_eps / eps);
    rescale_potential(g, prev_eps / eps);
    prev_eps = eps;
    const double inv = 1.0 / eps;
    converged = false;
    for (std::size_t it = 0;; ++it) {
      for (std::size_t j = 0; j < m; ++j) pot_col[j] = g[j] + lb[j];
      row_log_sum_exp(cost, inv, pot_col, lse_row);
      viol = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        if (a[i] > 0.0) viol += std::abs(a[i] * std::exp(f[i] + lse_row[i]) - a[i]);
      if (it > 0 && viol <= config.marginal_tol) {
        converged = true;
        rep.iterations_used += it;
        break;
      }
      if (it == config.max_iter) {
        rep.iterations_used += it;
        break;
      }
      for (std::size_t i = 0; i < n; ++i) f[i] = a[i] > 0.0 ? -lse_row[i] : 0.0;
      for (std::size_t i = 0; i < n; ++i) pot_row[i] = f[i] + la[i];
      col_log_sum_exp(cost, inv, pot_row, lse_col);
      for (std::size_t j = 0; j < m; ++j) g[j] = b[j] > 0.0 ? -lse_col[j] : 0.0;
    }
    double primal = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (a[i] == 0.0) continue;
      for (std::size_t j = 0; j < m; ++j) {
        if (b[j] == 0.0) continue;
        primal += cost(i, j) * std::exp(f[i] + g[j] - cost(i, j) * inv + la[i] + lb[j]);
      }
    }
    rep.stage_epsilons.push_back(eps);
    rep.stage_primal_costs.push_back(primal);
  }

  const double eps = schedule.back();
  const double inv = 1.0 / eps;
  res.plan.rows = n;
  res.plan.cols = m;
  double h = 0.0, mass = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i] == 0.0) continue;
    for (std::size_t j = 0; j < m; ++j) {
      if (b[j] == 0.0) continue;
      const double v = std::exp(f[i] + g[j] - cost(i, j) * inv + la[i] + lb[j]);
      if (v > 0.0) {
        res.plan.entries.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), v});
        h += v * (f[i] + g[j] - 1.0);
        mass += v;
      }
    }
  }
  double dual = -mass;
  for (std::size_t i = 0; i < n; ++i)
    if (a[i] > 0.0) dual += f[i] * a[i];
  for (std::size_t j = 0; j < m; ++j)
    if (b[j] > 0.0) dual += g[j] * b[j];

  rep.primal_cost = res.plan.cost(cost);
  rep.entropic_objective = eps * h;
  rep.dual_value = eps * dual;
  rep.marginal_violation_L1 = viol;
  rep.converged = converged;
  rep.final_epsilon = eps;
  res.duals.phi0 = std::move(f);
  res.duals.phi1 = std::move(g);
  return res;
}

}  // namespace interpark
