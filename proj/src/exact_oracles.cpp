#include "interpark/exact_oracles.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <queue>
#include <stdexcept>
#include <utility>

namespace interpark {

std::vector<double> TransportPlan::row_sums() const {
  std::vector<double> s(rows, 0.0);
  for (const auto& e : entries) s[e.row] += e.mass;
  return s;
}

std::vector<double> TransportPlan::col_sums() const {
  std::vector<double> s(cols, 0.0);
  for (const auto& e : entries) s[e.col] += e.mass;
  return s;
}

double TransportPlan::mass() const {
  double s = 0.0;
  for (const auto& e : entries) s += e.mass;
  return s;
}

double TransportPlan::cost(const CostMatrix& c) const {
  double s = 0.0;
  for (const auto& e : entries) s += c(e.row, e.col) * e.mass;
  return s;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kBalanceTolerance = 1e-9;

// Primal-dual successive shortest paths on the residual graph of the dense
// transportation problem restricted to positive-mass nodes.
class ShortestPathTransport {
 public:
  ShortestPathTransport(const CostMatrix& cost, std::vector<std::size_t> src,
                        std::vector<std::size_t> dst, std::vector<double> supply,
                        std::vector<double> demand)
      : cost_(cost),
        src_(std::move(src)),
        dst_(std::move(dst)),
        supply_(std::move(supply)),
        demand_(std::move(demand)),
        pi_s_(src_.size(), 0.0),
        pi_t_(dst_.size(), kInf),
        inflow_(dst_.size()) {
    for (std::size_t i = 0; i < src_.size(); ++i)
      for (std::size_t j = 0; j < dst_.size(); ++j) pi_t_[j] = std::min(pi_t_[j], c(i, j));
    const double total = std::accumulate(supply_.begin(), supply_.end(), 0.0);
    mass_eps_ = 1e-14 * std::max(total, 1e-300);
  }

  void run() {
    while (true) {
      bool any_supply = false;
      for (double s : supply_) any_supply |= s > mass_eps_;
      bool any_demand = false;
      for (double d : demand_) any_demand |= d > mass_eps_;
      if (!any_supply || !any_demand) break;
      if (!augment()) break;
    }
  }

  double c(std::size_t i, std::size_t j) const { return cost_(src_[i], dst_[j]); }
  const std::vector<std::vector<std::pair<std::size_t, double>>>& inflow() const { return inflow_; }
  const std::vector<double>& pi_s() const { return pi_s_; }
  const std::vector<double>& pi_t() const { return pi_t_; }

 private:
  bool augment() {
    const std::size_t n = src_.size();
    const std::size_t m = dst_.size();
    std::vector<double> ds(n, kInf), dt(m, kInf);
    std::vector<char> done_s(n, 0), done_t(m, 0);
    std::vector<std::ptrdiff_t> parent_s(n, -1), parent_t(m, -1);
    for (std::size_t i = 0; i < n; ++i)
      if (supply_[i] > mass_eps_) ds[i] = 0.0;

    using Item = std::pair<double, std::size_t>;  // (distance, node); sinks offset by n
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    for (std::size_t i = 0; i < n; ++i)
      if (ds[i] == 0.0) heap.emplace(0.0, i);

    std::ptrdiff_t target = -1;
    double reach = kInf;
    while (!heap.empty()) {
      const auto [best, node] = heap.top();
      heap.pop();
      if (node >= n) {
        const std::size_t u = node - n;
        if (done_t[u] || best > dt[u]) continue;
        done_t[u] = 1;
        if (demand_[u] > mass_eps_) {
          target = static_cast<std::ptrdiff_t>(u);
          reach = best;
          break;
        }
        for (const auto& [i, f] : inflow_[u]) {
          if (done_s[i]) continue;
          const double rc = std::max(0.0, -c(i, u) - pi_s_[i] + pi_t_[u]);
          if (best + rc < ds[i]) {
            ds[i] = best + rc;
            parent_s[i] = static_cast<std::ptrdiff_t>(u);
            heap.emplace(ds[i], i);
          }
        }
      } else {
        const std::size_t u = node;
        if (done_s[u] || best > ds[u]) continue;
        done_s[u] = 1;
        for (std::size_t j = 0; j < m; ++j) {
          if (done_t[j]) continue;
          const double rc = std::max(0.0, c(u, j) + pi_s_[u] - pi_t_[j]);
          if (best + rc < dt[j]) {
            dt[j] = best + rc;
            parent_t[j] = static_cast<std::ptrdiff_t>(u);
            heap.emplace(dt[j], j + n);
          }
        }
      }
    }
    if (target < 0) return false;

    for (std::size_t i = 0; i < n; ++i) pi_s_[i] += std::min(done_s[i] ? ds[i] : reach, reach);
    for (std::size_t j = 0; j < m; ++j) pi_t_[j] += std::min(done_t[j] ? dt[j] : reach, reach);

    // Bottleneck along the path sink <- source <- sink <- ... <- root source.
    auto t = static_cast<std::size_t>(target);
    double delta = demand_[t];
    std::size_t root = 0;
    for (std::size_t j = t;;) {
      const auto i = static_cast<std::size_t>(parent_t[j]);
      if (parent_s[i] < 0) {
        root = i;
        break;
      }
      const auto jp = static_cast<std::size_t>(parent_s[i]);
      delta = std::min(delta, flow(i, jp));
      j = jp;
    }
    delta = std::min(delta, supply_[root]);

    for (std::size_t j = t;;) {
      const auto i = static_cast<std::size_t>(parent_t[j]);
      add_flow(i, j, delta);
      if (parent_s[i] < 0) break;
      const auto jp = static_cast<std::size_t>(parent_s[i]);
      add_flow(i, jp, -delta);
      j = jp;
    }
    supply_[root] -= delta;
    demand_[t] -= delta;
    return true;
  }

  double flow(std::size_t i, std::size_t j) const {
    for (const auto& [k, f] : inflow_[j])
      if (k == i) return f;
    return 0.0;
  }

  void add_flow(std::size_t i, std::size_t j, double delta) {
    auto& in = inflow_[j];
    for (auto it = in.begin(); it != in.end(); ++it) {
      if (it->first == i) {
        it->second += delta;
        if (it->second <= mass_eps_) in.erase(it);
        return;
      }
    }
    if (delta > mass_eps_) in.emplace_back(i, delta);
  }

  const CostMatrix& cost_;
  std::vector<std::size_t> src_, dst_;
  std::vector<double> supply_, demand_;
  std::vector<double> pi_s_, pi_t_;
  std::vector<std::vector<std::pair<std::size_t, double>>> inflow_;
  double mass_eps_ = 0.0;
};

void check_weights(std::span<const double> w, const char* what) {
  for (double v : w)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument(std::string("exact_ot: invalid ") + what + " weights");
}

}  // namespace

ExactOtResult exact_ot(const CostMatrix& cost, std::span<const double> a,
                       std::span<const double> b) {
  if (a.size() != cost.rows() || b.size() != cost.cols())
    throw std::invalid_argument("exact_ot: weight sizes do not match cost matrix");
  check_weights(a, "source");
  check_weights(b, "target");
  for (double v : cost.data())
    if (!std::isfinite(v)) throw std::invalid_argument("exact_ot: non-finite cost");
  const double sa = total_mass(a);
  const double sb = total_mass(b);
  if (std::abs(sa - sb) > kBalanceTolerance)
    throw std::invalid_argument("exact_ot: unbalanced masses");

  std::vector<std::size_t> src, dst;
  std::vector<double> supply, demand;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] > 0.0) {
      src.push_back(i);
      supply.push_back(a[i]);
    }
  const double rescale = sb > 0.0 ? sa / sb : 1.0;
  for (std::size_t j = 0; j < b.size(); ++j)
    if (b[j] > 0.0) {
      dst.push_back(j);
      demand.push_back(b[j] * rescale);
    }

  ExactOtResult out;
  out.plan.rows = a.size();
  out.plan.cols = b.size();
  out.dual_source.assign(a.size(), kInf);
  out.dual_target.assign(b.size(), kInf);
  if (src.empty() || dst.empty()) {
    std::fill(out.dual_source.begin(), out.dual_source.end(), 0.0);
    for (std::size_t j = 0; j < b.size(); ++j)
      for (std::size_t i = 0; i < a.size(); ++i)
        out.dual_target[j] = std::min(out.dual_target[j], cost(i, j));
    return out;
  }

  ShortestPathTransport solver(cost, src, dst, supply, demand);
  solver.run();

  for (std::size_t j = 0; j < dst.size(); ++j)
    for (const auto& [i, f] : solver.inflow()[j])
      out.plan.entries.push_back(
          {static_cast<std::uint32_t>(src[i]), static_cast<std::uint32_t>(dst[j]), f});
  std::sort(out.plan.entries.begin(), out.plan.entries.end(),
            [](const PlanEntry& x, const PlanEntry& y) {
              return x.row != y.row ? x.row < y.row : x.col < y.col;
            });
  out.value = out.plan.cost(cost);

  // Potentials of the flow: f_i = -pi_s, g_j = pi_t. Zero-mass nodes get
  // c-transforms so that the dual stays feasible on every arc.
  for (std::size_t i = 0; i < src.size(); ++i) out.dual_source[src[i]] = -solver.pi_s()[i];
  for (std::size_t j = 0; j < dst.size(); ++j) out.dual_target[dst[j]] = solver.pi_t()[j];
  for (std::size_t j = 0; j < b.size(); ++j) {
    if (b[j] > 0.0) continue;
    for (std::size_t i : src) out.dual_target[j] = std::min(out.dual_target[j], cost(i, j) - out.dual_source[i]);
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > 0.0) continue;
    for (std::size_t j = 0; j < b.size(); ++j)
      out.dual_source[i] = std::min(out.dual_source[i], cost(i, j) - out.dual_target[j]);
  }
  for (std::size_t i = 0; i < a.size(); ++i) out.dual_value += a[i] * out.dual_source[i];
  for (std::size_t j = 0; j < b.size(); ++j) out.dual_value += b[j] * rescale * out.dual_target[j];
  return out;
}

namespace {

std::vector<double> line_coordinates(const DiscreteMeasure& m, double& shared_y, bool& have_y) {
  std::vector<double> xs(m.size());
  if (m.support.dim() == 1) {
    for (std::size_t i = 0; i < m.size(); ++i) xs[i] = m.support[i][0];
    return xs;
  }
  if (m.support.dim() != 2) throw std::invalid_argument("quantile_ot_1d: support is not 1-D");
  for (std::size_t i = 0; i < m.size(); ++i) {
    const auto p = m.support[i];
    if (!have_y) {
      shared_y = p[1];
      have_y = true;
    } else if (p[1] != shared_y) {
      throw std::invalid_argument("quantile_ot_1d: support is not on a horizontal line");
    }
    xs[i] = p[0];
  }
  return xs;
}

}  // namespace

double quantile_ot_1d(const DiscreteMeasure& mu0, const DiscreteMeasure& mu1, double p) {
  if (!(p > 0.0)) throw std::invalid_argument("quantile_ot_1d: exponent must be positive");
  double y = 0.0;
  bool have_y = false;
  const auto x0 = line_coordinates(mu0, y, have_y);
  const auto x1 = line_coordinates(mu1, y, have_y);
  const double s0 = total_mass(mu0);
  const double s1 = total_mass(mu1);
  if (std::abs(s0 - s1) > kBalanceTolerance)
    throw std::invalid_argument("quantile_ot_1d: unbalanced masses");

  if (p < 1.0) {
    // Monotone coupling is not optimal for concave costs; use the LP.
    PointCloud a(1, x0), b(1, x1);
    return exact_ot(cost_matrix({p, 1.0}, a, b), mu0.weights, mu1.weights).value;
  }

  auto order = [](const std::vector<double>& xs) {
    std::vector<std::size_t> idx(xs.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return xs[i] < xs[j]; });
    return idx;
  };
  const auto o0 = order(x0);
  const auto o1 = order(x1);
  const double rescale = s1 > 0.0 ? s0 / s1 : 1.0;

  double value = 0.0;
  std::size_t i = 0, j = 0;
  double r0 = o0.empty() ? 0.0 : mu0.weights[o0[0]];
  double r1 = o1.empty() ? 0.0 : mu1.weights[o1[0]] * rescale;
  while (i < o0.size() && j < o1.size()) {
    const double ds = std::min(r0, r1);
    if (ds > 0.0) value += std::pow(std::abs(x1[o1[j]] - x0[o0[i]]), p) * ds;
    r0 -= ds;
    r1 -= ds;
    if (r0 <= r1) {
      if (++i < o0.size()) r0 = mu0.weights[o0[i]];
    } else {
      if (++j < o1.size()) r1 = mu1.weights[o1[j]] * rescale;
    }
  }
  return value;
}

ReductionResult interpolation_via_reduction(const DiscreteMeasure& mu0, const DiscreteMeasure& mu1,
                                            const CostSpec& c0, const CostSpec& c1,
                                            const PointCloud& k_points) {
  const auto reduced = reduced_interpolation_cost(c0, c1, mu0.support, mu1.support, k_points);
  auto ot = exact_ot(reduced.matrix, mu0.weights, mu1.weights);
  std::vector<double> pivot(k_points.size(), 0.0);
  for (const auto& e : ot.plan.entries) pivot[reduced.pivot(e.row, e.col)] += e.mass;
  return {ot.value, make_point_measure(k_points, std::move(pivot)), std::move(ot.plan)};
}

ExactParkingSolution parking_via_reduction(const DiscreteMeasure& nu0, const DiscreteMeasure& nu1,
                                           const CostSpec& c0, const CostSpec& c1,
                                           const PointCloud& k_points) {
  const auto eff = parking_effective_cost(c0, c1, nu0.support, nu1.support, k_points);
  const auto ot = exact_ot(eff.matrix, nu0.weights, nu1.weights);

  ExactParkingSolution sol;
  sol.walk_plan.rows = nu0.size();
  sol.walk_plan.cols = nu1.size();
  std::vector<double> parking(k_points.size(), 0.0);
  for (const auto& e : ot.plan.entries) {
    if (eff.walks(e.row, e.col)) {
      sol.walk_plan.entries.push_back(e);
      sol.walk_cost += eval_cost(c1, nu0.support[e.row], nu1.support[e.col]) * e.mass;
    } else {
      const std::uint32_t k = eff.pivot(e.row, e.col);
      sol.drive_plan.push_back({e.row, k, e.col, e.mass});
      parking[k] += e.mass;
      sol.driving_fraction += e.mass;
      sol.drive_cost += eval_cost(c0, nu0.support[e.row], k_points[k]) * e.mass;
      sol.park_walk_cost += eval_cost(c1, k_points[k], nu1.support[e.col]) * e.mass;
    }
  }
  sol.parking_measure = make_point_measure(k_points, std::move(parking));
  sol.total_cost = sol.walk_cost + sol.drive_cost + sol.park_walk_cost;
  return sol;
}

LevelSetResult parking_level_set(double p, double lambda, std::array<double, 2> x0, double cap,
                                 const GridSpec& grid) {
  if (!(cap > 0.0)) throw std::invalid_argument("parking_level_set: cap must be positive");
  if (!(p > 0.0) || !(lambda > 0.0))
    throw std::invalid_argument("parking_level_set: p and lambda must be positive");
  const double r0 = std::hypot(x0[0], x0[1]);
  if (r0 == 0.0) throw std::invalid_argument("parking_level_set: x0 must differ from the origin");

  const double base = lambda * std::pow(r0, p);
  std::vector<double> f(grid.size());
  for (std::size_t c = 0; c < grid.size(); ++c) {
    const auto x = grid.center(c);
    f[c] = std::pow(std::hypot(x[0] - x0[0], x[1] - x0[1]), p) +
           lambda * std::pow(std::hypot(x[0], x[1]), p) - base;
  }
  const double area = grid.cell_area();
  auto region_area = [&](double level) {
    std::size_t n = 0;
    for (double v : f) n += v <= level ? 1 : 0;
    return static_cast<double>(n) * area;
  };

  LevelSetResult out;
  if (cap * region_area(0.0) < 1.0) {
    out.level = 0.0;
    out.alpha = cap * region_area(0.0);
  } else {
    double lo = *std::min_element(f.begin(), f.end());
    double hi = 0.0;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (cap * region_area(mid) >= 1.0)
        hi = mid;
      else
        lo = mid;
    }
    out.level = hi;
    out.alpha = 1.0;
  }
  out.region.resize(grid.size());
  for (std::size_t c = 0; c < grid.size(); ++c) {
    out.region[c] = f[c] <= out.level ? 1 : 0;
    if (!out.region[c]) continue;
    const std::size_t ix = c % grid.nx();
    const std::size_t iy = c / grid.nx();
    if (ix == 0 || iy == 0 || ix + 1 == grid.nx() || iy + 1 == grid.ny())
      throw std::invalid_argument("parking_level_set: quadrature grid does not cover the region");
  }
  return out;
}

double alpha_closed_form_p2(double lambda, double x0_norm) {
  if (!(lambda > 0.0) || !(x0_norm >= 0.0))
    throw std::invalid_argument("alpha_closed_form_p2: invalid arguments");
  const double threshold = (lambda + 1.0) / (lambda * std::sqrt(std::numbers::pi));
  if (!(x0_norm < threshold))
    throw std::domain_error("alpha_closed_form_p2: every resident drives in this regime");
  return std::numbers::pi * x0_norm * x0_norm * lambda * lambda / ((lambda + 1.0) * (lambda + 1.0));
}

void write_plan_csv(std::ostream& os, const TransportPlan& plan) {
  os << std::setprecision(17) << "i,j,mass\n";
  for (const auto& e : plan.entries) os << e.row << ',' << e.col << ',' << e.mass << '\n';
}

}  // namespace interpark
