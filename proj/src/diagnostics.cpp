#include "interpark/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace interpark {

namespace {

void require_grid(const DiscreteMeasure& m, const GridSpec& grid, const char* what) {
  if (!m.grid || !(*m.grid == grid)) throw std::invalid_argument(std::string(what) + ": grid mismatch");
}

std::string fmt(double v, bool set = true) {
  if (!set) return "na";
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

}  // namespace

double bang_bang_fraction(const DiscreteMeasure& pivot, const DensityBound& bound, Band band) {
  require_grid(pivot, bound.grid(), "bang_bang_fraction");
  if (!(band.lo >= 0.0 && band.lo < band.hi)) throw std::invalid_argument("bang_bang_fraction: bad band");
  double total = 0.0, mid = 0.0;
  for (std::size_t c = 0; c < pivot.size(); ++c) {
    const double w = pivot.weights[c];
    if (w <= 0.0) continue;
    total += w;
    const double cap = bound.cap(c);
    if (cap <= 0.0) continue;
    const double ratio = pivot.density(c) / cap;
    if (ratio > band.lo && ratio < band.hi) mid += w;
  }
  return total > 0.0 ? mid / total : 0.0;
}

double boundary_mass_fraction(const DiscreteMeasure& pivot, const SupportMask& mask) {
  require_grid(pivot, mask.grid(), "boundary_mass_fraction");
  double total = 0.0, band = 0.0;
  for (std::size_t c = 0; c < pivot.size(); ++c) {
    total += pivot.weights[c];
    if (mask.contains(c) && mask.on_boundary(c)) band += pivot.weights[c];
  }
  return total > 0.0 ? band / total : 0.0;
}

GapCheck duality_gap(double primal_value, double dual_value) {
  if (!std::isfinite(primal_value) || !std::isfinite(dual_value))
    throw std::invalid_argument("duality_gap: non-finite input");
  const double gap = primal_value - dual_value;
  return {gap, gap < -kNegativeGapTolerance};
}

std::pair<double, double> quadratic_cost_scales(const CostSpec& c0, const CostSpec& c1) {
  if (c0.exponent != 2.0 || c1.exponent != 2.0)
    throw std::invalid_argument("interior density bound needs quadratic costs");
  return {2.0 * std::min(c0.scale, c1.scale), 2.0 * std::max(c0.scale, c1.scale)};
}

double interior_density_bound_check(const DiscreteMeasure& pivot, const DiscreteMeasure& mu0,
                                    std::pair<double, double> scales, const SupportMask& mask,
                                    std::size_t min_depth) {
  require_grid(pivot, mask.grid(), "interior_density_bound_check");
  if (!mu0.grid) throw std::invalid_argument("interior_density_bound_check: mu0 needs a grid density");
  const auto [lo, hi] = scales;
  if (!(lo > 0.0) || !(hi >= lo)) throw std::invalid_argument("interior_density_bound_check: bad scales");
  double mu0_max = 0.0;
  for (std::size_t c = 0; c < mu0.size(); ++c) mu0_max = std::max(mu0_max, mu0.density(c));
  const double bound = mu0_max * 4.0 * (hi / lo) * (hi / lo);
  double top = 0.0;
  for (auto c : mask.cells())
    if (mask.depth(c, min_depth) >= min_depth) top = std::max(top, pivot.density(c));
  if (top == 0.0) return 0.0;
  return top / bound;
}

double interior_density_bound_check(const DiscreteMeasure& pivot, const DiscreteMeasure& mu0,
                                    const CostSpec& c0, const CostSpec& c1, const SupportMask& mask,
                                    std::size_t min_depth) {
  return interior_density_bound_check(pivot, mu0, quadratic_cost_scales(c0, c1), mask, min_depth);
}

double marginal_violation(const TransportPlan& plan, std::span<const double> rows,
                          std::span<const double> cols) {
  double v = 0.0;
  if (!rows.empty()) {
    const auto r = plan.row_sums();
    if (r.size() != rows.size()) throw std::invalid_argument("marginal_violation: row size mismatch");
    for (std::size_t i = 0; i < r.size(); ++i) v += std::abs(r[i] - rows[i]);
  }
  if (!cols.empty()) {
    const auto c = plan.col_sums();
    if (c.size() != cols.size()) throw std::invalid_argument("marginal_violation: column size mismatch");
    for (std::size_t j = 0; j < c.size(); ++j) v += std::abs(c[j] - cols[j]);
  }
  return v;
}

double tv_distance(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::invalid_argument("tv_distance: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

void DiagnosticsReport::write_key_values(std::ostream& os) const {
  os << "run = " << run << '\n';
  os << "bang_bang_fraction = " << fmt(bang_bang_fraction, bang_bang_fraction >= 0.0) << '\n';
  os << "boundary_mass_fraction = " << fmt(boundary_mass_fraction, boundary_mass_fraction >= 0.0) << '\n';
  os << "duality_gap = " << fmt(duality_gap) << '\n';
  for (const auto& [name, v] : marginal_violations) os << "marginal_violation." << name << " = " << fmt(v) << '\n';
  os << "interior_density_ratio = " << fmt(interior_density_ratio, interior_density_ratio >= 0.0) << '\n';
}

std::string DiagnosticsReport::csv_header() {
  return "run,bang_bang_fraction,boundary_mass_fraction,duality_gap,max_marginal_violation,"
         "interior_density_ratio";
}

std::string DiagnosticsReport::csv_row() const {
  double worst = 0.0;
  for (const auto& mv : marginal_violations) worst = std::max(worst, mv.second);
  std::ostringstream os;
  os << run << ',' << fmt(bang_bang_fraction, bang_bang_fraction >= 0.0) << ','
     << fmt(boundary_mass_fraction, boundary_mass_fraction >= 0.0) << ',' << fmt(duality_gap) << ','
     << fmt(worst) << ',' << fmt(interior_density_ratio, interior_density_ratio >= 0.0);
  return os.str();
}

}  // namespace interpark
