#include <doctest.h>

#include <cmath>

#include "interpark/interpolation.hpp"

using namespace interpark;

namespace {

const GridSpec kLine(BBox{0, 6, 0, 1}, 300, 1);

DiscreteMeasure indicator(const GridSpec& g, double a, double b) {
  return measure_from_density(g, [=](double x, double) { return x > a && x < b ? 1.0 : 0.0; }, true);
}

InterpolationProblem line_problem(double p, double t, PivotConstraint constraint) {
  return {indicator(kLine, 0, 1), indicator(kLine, 5, 6), {p, 1 - t}, {p, t}, kLine, std::move(constraint), {}};
}

double tv(const std::vector<double>& p, const std::vector<double>& q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return s / 2;
}

double mass_center(const DiscreteMeasure& m) {
  double c = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) c += m.support[i][0] * m.weights[i];
  return c / total_mass(m);
}

SupportMask interval_mask(double a, double b) {
  return mask_from_predicate(kLine, [=](double x, double) { return x > a && x < b; });
}

}  // namespace

TEST_SUITE("interpolation") {

TEST_CASE("distance costs pick the cheaper endpoint") {
  const auto sol = solve_interpolation(line_problem(1, 0.7, FreeConstraint{}));
  CHECK(sol.report.converged);
  CHECK(tv(sol.pivot.weights, indicator(kLine, 5, 6).weights) <= 0.05);
  CHECK(sol.primal_value == doctest::Approx(1.5).epsilon(0.01));
}

TEST_CASE("quadratic costs follow the geodesic") {
  const auto sol = solve_interpolation(line_problem(2, 0.3, FreeConstraint{}));
  CHECK(mass_center(sol.pivot) == doctest::Approx(2.0).epsilon(0.005));
  CHECK(tv(sol.pivot.weights, indicator(kLine, 1.5, 2.5).weights) <= 0.05);
}

TEST_CASE("density cap spreads the pivot") {
  const double theta = 0.75;
  const DensityBound cap(kLine, [&] {
    std::vector<double> c(kLine.size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = kLine.center(i)[0] > 2 && kLine.center(i)[0] < 4 ? theta : 0.0;
    return c;
  }());
  const auto sol = solve_interpolation(line_problem(1, 0.3, cap));
  CHECK(tv(sol.pivot.weights, indicator(kLine, 2, 2 + 1 / theta).weights) <= 0.05);
  for (std::size_t c = 0; c < kLine.size(); ++c) CHECK(sol.pivot.weights[c] <= cap.cell_mass_cap(c) * (1 + 1e-6));
  for (std::size_t x = 0; x < sol.duals.psi0.size(); ++x) CHECK(sol.duals.psi0[x] + sol.duals.psi1[x] <= 1e-12);
}

TEST_CASE("support constraint that is not binding") {
  const auto mask = interval_mask(2, 4);
  const auto sol = solve_interpolation(line_problem(2, 0.5, mask));
  CHECK(mass_center(sol.pivot) == doctest::Approx(3.0).epsilon(0.005));
  CHECK(tv(sol.pivot.weights, indicator(kLine, 2.5, 3.5).weights) <= 0.05);
  double outside = 0.0;
  for (std::size_t c = 0; c < kLine.size(); ++c)
    if (!mask.contains(c)) outside += sol.pivot.weights[c];
  CHECK(outside <= 1e-8);
}

TEST_CASE("coinciding diracs") {
  const GridSpec g(BBox{0, 1, 0, 1}, 11, 11);
  const auto d = make_point_measure(PointCloud(2, {0.5, 0.5}), {1.0});
  const InterpolationProblem prob{d, d, {2, 1}, {2, 1}, g, full_mask(g), {}};
  const auto sol = solve_interpolation(prob);
  CHECK(sol.pivot.weights[g.nearest_cell(0.5, 0.5)] == doctest::Approx(1.0));
  CHECK(sol.primal_value <= 1e-6);
}

TEST_CASE("mirror symmetric data give a symmetric pivot") {
  const GridSpec g(BBox{-1, 1, -0.5, 0.5}, 20, 10);
  const auto mu0 = make_point_measure(PointCloud(2, {-0.6, 0.1, -0.4, -0.2}), {0.5, 0.5});
  const auto mu1 = make_point_measure(PointCloud(2, {0.6, 0.1, 0.4, -0.2}), {0.5, 0.5});
  const auto mask = mask_from_predicate(g, [](double x, double y) { return x * x + y * y > 0.01; });
  SolverConfig cfg;
  cfg.epsilon = 2e-3;
  const auto sol = solve_interpolation({mu0, mu1, {2, 1}, {2, 1}, g, mask, cfg});
  double asym = 0.0;
  for (std::size_t iy = 0; iy < g.ny(); ++iy)
    for (std::size_t ix = 0; ix < g.nx(); ++ix)
      asym += std::abs(sol.pivot.weights[g.index(ix, iy)] - sol.pivot.weights[g.index(g.nx() - 1 - ix, iy)]);
  CHECK(asym / 2 <= 1e-8);
}

TEST_CASE("plans agree with the pivot at convergence") {
  const GridSpec g(BBox{0, 1, 0, 1}, 16, 16);
  const auto mu0 = make_point_measure(PointCloud(2, {0.1, 0.2, 0.3, 0.9}), {0.4, 0.6});
  const auto mu1 = make_point_measure(PointCloud(2, {0.8, 0.5, 0.9, 0.1, 0.6, 0.7}), {0.2, 0.3, 0.5});
  SolverConfig cfg;
  cfg.epsilon = 1e-3;
  const InterpolationProblem prob{mu0, mu1, {2, 1}, {2, 1.5}, g, FreeConstraint{}, cfg};
  const auto sol = solve_interpolation(prob);
  REQUIRE(sol.report.converged);
  const auto left = sol.gamma0.col_sums(), right = sol.gamma1.row_sums();
  CHECK(2 * tv(left, sol.pivot.weights) <= cfg.marginal_tol);
  CHECK(2 * tv(right, sol.pivot.weights) <= cfg.marginal_tol);
  const auto rows = sol.gamma0.row_sums();
  CHECK(2 * tv(rows, mu0.weights) <= cfg.marginal_tol);

  const double gap = sol.report.entropic_objective - sol.dual_value;
  CHECK(gap >= -1e-9);
  CHECK(gap <= 1e-6 * (1 + std::abs(sol.primal_value)));

  const auto kernels = build_interpolation_kernels(prob);
  const auto from_duals = pivot_from_duals(sol.duals, kernels, sol.report.final_epsilon);
  CHECK(tv(from_duals.weights, sol.pivot.weights) <= 1e-8);
}

TEST_CASE("one cell pivot grid") {
  const GridSpec g(BBox{0, 1, 0, 1}, 1, 1);
  const auto mu0 = make_point_measure(PointCloud(2, {0.1, 0.2, 0.3, 0.9}), {0.4, 0.6});
  const auto mu1 = make_point_measure(PointCloud(2, {0.8, 0.5}), {1.0});
  const auto sol = solve_interpolation({mu0, mu1, {2, 1}, {2, 1}, g, FreeConstraint{}, {}});
  CHECK(sol.pivot.weights[0] == doctest::Approx(1.0));
}

TEST_CASE("dual objective at zero and under gauge shifts") {
  const GridSpec g(BBox{0, 1, 0, 1}, 6, 6);
  const auto mu0 = make_point_measure(PointCloud(2, {0.1, 0.2, 0.7, 0.4}), {0.3, 0.7});
  const auto mu1 = make_point_measure(PointCloud(2, {0.9, 0.9, 0.5, 0.1}), {0.5, 0.5});
  const InterpolationProblem prob{mu0, mu1, {2, 1}, {1, 2}, g, FreeConstraint{}, {}};
  const auto k = build_interpolation_kernels(prob);
  const double eps = 0.05, h = g.cell_area();
  DualPotentials zero{std::vector<double>(2, 0.0), std::vector<double>(2, 0.0), std::vector<double>(k.domain.size(), 0.0),
                      std::vector<double>(k.domain.size(), 0.0)};
  double mass = 0.0;
  for (std::size_t c = 0; c < g.size(); ++c) {
    const auto x = g.center(c);
    for (std::size_t i = 0; i < 2; ++i) mass += std::exp(-eval_cost(prob.c0, mu0.support[i], x) / eps) * mu0.weights[i] * h;
    for (std::size_t j = 0; j < 2; ++j) mass += std::exp(-eval_cost(prob.c1, x, mu1.support[j]) / eps) * mu1.weights[j] * h;
  }
  CHECK(dual_objective_interpolation(zero, k, eps) == doctest::Approx(-mass));

  DualPotentials d{{0.3, -0.2}, {0.1, 0.5}, std::vector<double>(k.domain.size(), 0.2),
                   std::vector<double>(k.domain.size(), -0.4)};
  const double base = dual_objective_interpolation(d, k, eps);
  const double s = 0.7;
  for (auto& v : d.phi0) v += s;
  for (auto& v : d.phi1) v -= s;
  for (auto& v : d.psi0) v -= s;
  for (auto& v : d.psi1) v += s;
  CHECK(dual_objective_interpolation(d, k, eps) == doctest::Approx(base));
}

TEST_CASE("invalid problems") {
  const GridSpec g(BBox{0, 1, 0, 1}, 4, 4);
  const auto mu = make_point_measure(PointCloud(2, {0.5, 0.5}), {1.0});
  const auto half = make_point_measure(PointCloud(2, {0.5, 0.5}), {0.5});
  CHECK_THROWS(solve_interpolation({half, mu, {2, 1}, {2, 1}, g, FreeConstraint{}, {}}));
  CHECK_THROWS(solve_interpolation({mu, mu, {2, 1}, {2, 1}, g, constant_bound(g, 0.5), {}}));
  const GridSpec other(BBox{0, 2, 0, 1}, 4, 4);
  CHECK_THROWS(solve_interpolation({mu, mu, {2, 1}, {2, 1}, g, full_mask(other), {}}));
  SolverConfig bad;
  bad.epsilon = -1;
  CHECK_THROWS(solve_interpolation({mu, mu, {2, 1}, {2, 1}, g, FreeConstraint{}, bad}));
}

}
