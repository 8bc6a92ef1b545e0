#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "interpark/exact_oracles.hpp"

using namespace interpark;

namespace {

DiscreteMeasure uniform_interval(double a, double b, std::size_t cells) {
  const GridSpec g(BBox{a, b, 0.0, 1.0}, cells, 1);
  return measure_from_density(g, [](double, double) { return 1.0; }, true);
}

DiscreteMeasure on_line(const GridSpec& g, double a, double b) {
  return measure_from_density(g, [=](double x, double) { return x > a && x < b ? 1.0 : 0.0; }, true);
}

double tv(const std::vector<double>& p, const std::vector<double>& q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return s / 2;
}

}  // namespace

TEST_SUITE("exact_oracles") {

TEST_CASE("single source splits between two targets") {
  const CostMatrix c(1, 3, {1.0, 4.0, 2.0});
  const std::vector<double> a = {1.0}, b = {0.5, 0.0, 0.5};
  const auto r = exact_ot(c, a, b);
  CHECK(r.value == doctest::Approx(1.5));
  CHECK(r.plan.mass() == doctest::Approx(1.0));
  const auto cols = r.plan.col_sums();
  CHECK(cols[0] == doctest::Approx(0.5));
  CHECK(cols[2] == doctest::Approx(0.5));
}

TEST_CASE("identical measures with zero diagonal") {
  const PointCloud pts(2, {0, 0, 1, 0, 0, 1, 1, 1});
  const auto c = cost_matrix({2, 1}, pts, pts);
  const std::vector<double> w = {0.1, 0.2, 0.3, 0.4};
  const auto r = exact_ot(c, w, w);
  CHECK(r.value == doctest::Approx(0.0));
  for (const auto& e : r.plan.entries) CHECK(e.row == e.col);
}

TEST_CASE("lp duals certify optimality") {
  const PointCloud xs(2, {0, 0, 1, 2, 3, 1}), ys(2, {2, 2, 0, 1, 4, 0, 1, 1});
  const auto c = cost_matrix({2, 1}, xs, ys);
  const std::vector<double> a = {0.2, 0.5, 0.3}, b = {0.1, 0.4, 0.25, 0.25};
  const auto r = exact_ot(c, a, b);
  CHECK(std::abs(r.value - r.dual_value) <= 1e-9);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 4; ++j) CHECK(r.dual_source[i] + r.dual_target[j] <= c(i, j) + 1e-9);
}

TEST_CASE("unbalanced inputs are rejected") {
  const CostMatrix c(1, 1, {1.0});
  const std::vector<double> a = {1.0}, b = {0.5};
  CHECK_THROWS(exact_ot(c, a, b));
}

TEST_CASE("translated uniforms") {
  const auto m0 = uniform_interval(0, 1, 200), m1 = uniform_interval(5, 6, 200);
  const auto lp = exact_ot(cost_matrix({1, 1}, m0.support, m1.support), m0.weights, m1.weights);
  CHECK(std::abs(lp.value - 5.0) <= 1.0 / 200);
  CHECK(quantile_ot_1d(m0, m1, 1.0) == doctest::Approx(5.0));
  CHECK(quantile_ot_1d(m0, m1, 2.0) == doctest::Approx(25.0));
  CHECK(quantile_ot_1d(m0, m0, 2.0) == doctest::Approx(0.0));
}

TEST_CASE("reduction reproduces the distance threshold") {
  const GridSpec g(BBox{0, 6, 0, 1}, 300, 1);
  const auto m0 = on_line(g, 0, 1), m1 = on_line(g, 5, 6);
  const auto r = interpolation_via_reduction(m0, m1, {1, 0.3}, {1, 0.7}, g.centers());
  CHECK(r.value == doctest::Approx(0.3 * 5.0).epsilon(1e-9));
  CHECK(tv(r.pivot.weights, m1.weights) <= 2 * g.dx());
}

TEST_CASE("reduction reproduces the quadratic geodesic") {
  const GridSpec g(BBox{0, 6, 0, 1}, 300, 1);
  const auto m0 = on_line(g, 0, 1), m1 = on_line(g, 5, 6);
  const auto r = interpolation_via_reduction(m0, m1, {2, 0.7}, {2, 0.3}, g.centers());
  double center = 0.0, inside = 0.0;
  for (std::size_t c = 0; c < g.size(); ++c) {
    const double x = g.center(c)[0];
    center += x * r.pivot.weights[c];
    if (x > 1.5 - g.dx() && x < 2.5 + g.dx()) inside += r.pivot.weights[c];
  }
  CHECK(center == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(inside == doctest::Approx(1.0));
}

TEST_CASE("coinciding diracs stay put") {
  const GridSpec g(BBox{0, 1, 0, 1}, 5, 5);
  const double z[2] = {0.5, 0.5};
  const auto d = dirac(g.centers(), z);
  const auto r = interpolation_via_reduction(d, d, {2, 1}, {2, 1}, g.centers());
  CHECK(r.value == 0.0);
  CHECK(r.pivot.weights[12] == doctest::Approx(1.0));
}

TEST_CASE("parking is useless with equal distance costs") {
  const GridSpec g(BBox{0, 1, 0, 1}, 6, 6);
  const auto nu0 = make_point_measure(PointCloud(2, {0.1, 0.1, 0.8, 0.3}), {0.5, 0.5});
  const auto nu1 = make_point_measure(PointCloud(2, {0.5, 0.9, 0.2, 0.6}), {0.3, 0.7});
  const auto r = parking_via_reduction(nu0, nu1, {1, 1}, {1, 1}, g.centers());
  const auto w = exact_ot(cost_matrix({1, 1}, nu0.support, nu1.support), nu0.weights, nu1.weights);
  CHECK(r.driving_fraction == 0.0);
  CHECK(total_mass(r.parking_measure) == 0.0);
  CHECK(r.total_cost == doctest::Approx(w.value));
}

TEST_CASE("two diracs drive to a third of the way") {
  const GridSpec g(BBox{-0.05, 1.05, -0.55, 0.55}, 11, 11);
  const auto nu0 = make_point_measure(PointCloud(2, {0.9, 0.0}), {1.0});
  const auto nu1 = make_point_measure(PointCloud(2, {0.0, 0.0}), {1.0});
  const auto r = parking_via_reduction(nu0, nu1, {2, 1}, {2, 2}, g.centers());
  CHECK(r.driving_fraction == doctest::Approx(1.0));
  const std::size_t cell = g.nearest_cell(0.3, 0.0);
  CHECK(r.parking_measure.weights[cell] == doctest::Approx(1.0));
  CHECK(r.total_cost == doctest::Approx(0.6 * 0.6 + 2.0 * 0.3 * 0.3).epsilon(1e-9));
}

TEST_CASE("no traffic when residents live at the services") {
  const GridSpec g(BBox{0, 1, 0, 1}, 4, 4);
  const auto nu = make_point_measure(PointCloud(2, {0.2, 0.2, 0.7, 0.9}), {0.4, 0.6});
  const auto r = parking_via_reduction(nu, nu, {2, 1}, {2, 2}, g.centers());
  CHECK(r.driving_fraction == 0.0);
  CHECK(r.total_cost == doctest::Approx(0.0));
}

TEST_CASE("level sets of the two-dirac parking function") {
  const auto grid = [](double r) { return GridSpec(BBox{-1.05 * r, 1.05 * r, -1.05 * r, 1.05 * r}, 400, 400); };
  const auto half = parking_level_set(2, 2, {0.5, 0}, 1.0, grid(0.5));
  CHECK(half.alpha == doctest::Approx(std::numbers::pi / 9).epsilon(0.01));
  CHECK(half.level == 0.0);
  // The region is the disk around x0 / 3 of radius 2 |x0| / 3.
  const GridSpec g = grid(0.5);
  std::size_t wrong = 0, inside = 0;
  for (std::size_t c = 0; c < g.size(); ++c) {
    const auto p = g.center(c);
    const bool disk = std::hypot(p[0] - 0.5 / 3, p[1]) <= 1.0 / 3;
    inside += disk;
    wrong += disk != (half.region[c] != 0);
  }
  CHECK(static_cast<double>(wrong) <= 0.02 * static_cast<double>(inside));

  CHECK(parking_level_set(2, 2, {1, 0}, 1.0, grid(1)).alpha == doctest::Approx(1.0));
  CHECK(std::abs(parking_level_set(1, 2, {1, 0}, 1.0, grid(1)).alpha - 0.97) <= 0.01);
  CHECK(std::abs(parking_level_set(1, 2, {0.5, 0}, 1.0, grid(0.5)).alpha - 0.24) <= 0.01);
}

TEST_CASE("closed form parked fraction") {
  CHECK(alpha_closed_form_p2(2, 0.5) == doctest::Approx(0.34907).epsilon(1e-4));
  CHECK(alpha_closed_form_p2(2, 1e-8) == doctest::Approx(0.0));
  CHECK(alpha_closed_form_p2(2, 0.8) == doctest::Approx(std::numbers::pi * 0.64 * 4 / 9));
  const GridSpec g(BBox{-0.84, 0.84, -0.84, 0.84}, 600, 600);
  CHECK(parking_level_set(2, 2, {0.8, 0}, 1.0, g).alpha == doctest::Approx(alpha_closed_form_p2(2, 0.8)).epsilon(2e-3));
}

TEST_CASE("plan csv lists every entry") {
  TransportPlan p;
  p.rows = 2;
  p.cols = 2;
  p.entries = {{0, 1, 0.25}, {1, 0, 0.75}};
  std::ostringstream os;
  write_plan_csv(os, p);
  const std::string s = os.str();
  CHECK(std::count(s.begin(), s.end(), '\n') == 3);
  CHECK(p.mass() == doctest::Approx(1.0));
}

}
