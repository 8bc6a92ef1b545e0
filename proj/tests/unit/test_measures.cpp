#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "interpark/measures.hpp"

using namespace interpark;

TEST_SUITE("measures") {

TEST_CASE("two by two grid centers and area") {
  const GridSpec g(BBox{0, 1, 0, 1}, 2, 2);
  CHECK(g.size() == 4);
  CHECK(g.cell_area() == doctest::Approx(0.25));
  for (std::size_t c = 0; c < 4; ++c) {
    const auto p = g.center(c);
    CHECK((p[0] == doctest::Approx(0.25) || p[0] == doctest::Approx(0.75)));
    CHECK((p[1] == doctest::Approx(0.25) || p[1] == doctest::Approx(0.75)));
  }
  CHECK(g.center(1)[0] == doctest::Approx(0.75));
  CHECK(g.center(2)[1] == doctest::Approx(0.75));
}

TEST_CASE("line-like grid spacing") {
  const GridSpec g(BBox{0, 6, 0, 1}, 600, 1);
  CHECK(g.dx() == doctest::Approx(0.01));
  CHECK(g.size() == 600);
}

TEST_CASE("empty grid is rejected") {
  CHECK_THROWS(GridSpec(BBox{0, 1, 0, 1}, 0, 3));
  CHECK_THROWS(GridSpec(BBox{1, 0, 0, 1}, 2, 2));
}

TEST_CASE("constant density normalizes to uniform weights") {
  const GridSpec g(BBox{0, 1, 0, 1}, 8, 4);
  const auto m = measure_from_density(g, [](double, double) { return 1.0; }, true);
  for (double w : m.weights) CHECK(w == doctest::Approx(1.0 / 32.0));
  CHECK(m.density(5) == doctest::Approx(1.0));
}

TEST_CASE("ball indicator is uniform on the ball cells") {
  const GridSpec g(BBox{2, 4, -1, 1}, 40, 40);
  const auto m = measure_from_density(
      g, [](double x, double y) { return std::hypot(x - 3.0, y) <= 1.0 ? 1.0 : 0.0; }, true);
  std::size_t inside = 0;
  for (double w : m.weights) inside += w > 0.0;
  for (double w : m.weights)
    if (w > 0.0) CHECK(w == doctest::Approx(1.0 / static_cast<double>(inside)));
  CHECK(total_mass(m) == doctest::Approx(1.0));
  CHECK(static_cast<double>(inside) * g.cell_area() == doctest::Approx(std::numbers::pi).epsilon(0.03));
}

TEST_CASE("zero density cannot be normalized") {
  const GridSpec g(BBox{0, 1, 0, 1}, 3, 3);
  CHECK_THROWS(measure_from_density(g, [](double, double) { return 0.0; }, true));
}

TEST_CASE("dirac on the grid breaks ties toward the smallest index") {
  const GridSpec g(BBox{0, 1, 0, 1}, 2, 2);
  const double p[2] = {0.5, 0.5};
  const auto m = dirac(g, p);
  CHECK(m.weights[0] == 1.0);
  CHECK(m.support[0][0] == doctest::Approx(0.25));
  CHECK(m.support[0][1] == doctest::Approx(0.25));
}

TEST_CASE("dirac on an explicit point list is exact") {
  const PointCloud pts(2, {0.1, 0.1, 0.5, 0.5, 0.9, 0.9});
  const double p[2] = {0.5, 0.5};
  const auto m = dirac(pts, p);
  CHECK(m.weights[1] == 1.0);
  CHECK(m.support[1][0] == 0.5);
  CHECK(m.weights[0] + m.weights[2] == 0.0);
}

TEST_CASE("four resident atoms sum to one") {
  const auto m = make_point_measure(PointCloud(2, {0.5, 0.1, 0.5, 0.9, 0.1, 0.5, 0.9, 0.5}), {0.25, 0.25, 0.25, 0.25});
  CHECK(total_mass(m) == doctest::Approx(1.0));
}

TEST_CASE("total mass and normalization") {
  const auto m = make_point_measure(PointCloud(1, {0.0, 1.0}), {0.2, 0.3});
  CHECK(total_mass(m) == doctest::Approx(0.5));
  const auto n = normalize(m);
  CHECK(n.weights[0] == doctest::Approx(0.4));
  CHECK(n.weights[1] == doctest::Approx(0.6));
  const auto again = normalize(n);
  CHECK(again.weights == n.weights);
  const DiscreteMeasure empty;
  CHECK(total_mass(empty) == 0.0);
  CHECK_THROWS(normalize(empty));
}

TEST_CASE("negative weights are rejected") {
  CHECK_THROWS(make_point_measure(PointCloud(1, {0.0, 1.0}), {0.5, -0.1}));
}

TEST_CASE("compress drops empty atoms") {
  const auto m = compress(make_point_measure(PointCloud(1, {0.0, 1.0, 2.0}), {0.5, 0.0, 0.5}));
  REQUIRE(m.size() == 2);
  CHECK(m.support[1][0] == 2.0);
}

TEST_CASE("mask boundary band and depth") {
  const GridSpec g(BBox{0, 1, 0, 1}, 10, 10);
  const auto mask = full_mask(g);
  std::size_t band = 0;
  for (auto c : mask.cells()) band += mask.on_boundary(c);
  CHECK(band == 36);
  CHECK(mask.depth(g.index(0, 5)) == 1);
  CHECK(mask.depth(g.index(4, 4)) == 5);
  CHECK(mask.depth(g.index(4, 4), 2) == 3);
}

TEST_CASE("predicate mask and scatter") {
  const GridSpec g(BBox{0, 4, 0, 1}, 4, 1);
  const auto mask = mask_from_predicate(g, [](double x, double) { return x > 1.0 && x < 3.0; });
  CHECK(mask.count() == 2);
  const std::vector<double> w = {0.25, 0.75};
  const auto m = scatter_to_grid(mask, w);
  CHECK(m.weights == std::vector<double>{0.0, 0.25, 0.75, 0.0});
}

TEST_CASE("density bound capacity") {
  const GridSpec g(BBox{0, 2, 0, 1}, 4, 1);
  const auto b = constant_bound(g, 0.75);
  CHECK(b.total_cap_mass() == doctest::Approx(1.5));
  CHECK(b.cell_mass_cap(0) == doctest::Approx(0.375));
  CHECK_THROWS(DensityBound(g, {1.0, -1.0, 1.0, 1.0}));
}

TEST_CASE("measure csv round trip") {
  const GridSpec g(BBox{0, 1, 0, 1}, 3, 2);
  const auto m = measure_from_density(g, [](double x, double y) { return x + y; }, true);
  std::stringstream ss;
  write_measure_csv(ss, m);
  const auto back = read_measure_csv(ss);
  REQUIRE(back.size() == m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    CHECK(back.weights[i] == m.weights[i]);
    CHECK(back.support[i][0] == m.support[i][0]);
  }
}

}
