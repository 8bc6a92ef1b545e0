#include <doctest.h>

#include <cmath>
#include <limits>

#include "interpark/entropic_core.hpp"

using namespace interpark;

namespace {

DiscreteMeasure uniform_interval(double a, double b, std::size_t cells) {
  const GridSpec g(BBox{a, b, 0.0, 1.0}, cells, 1);
  return measure_from_density(g, [](double, double) { return 1.0; }, true);
}

}  // namespace

TEST_SUITE("entropic_core") {

TEST_CASE("relative entropy conventions") {
  const std::vector<double> p = {0.3, 0.7};
  CHECK(relative_entropy(p, p) == doctest::Approx(-1.0));
  const std::vector<double> atom = {1.0, 0.0}, half = {0.5, 0.5}, other = {0.0, 1.0};
  CHECK(relative_entropy(atom, half) == doctest::Approx(std::log(2.0) - 1.0));
  CHECK(relative_entropy(atom, other) == std::numeric_limits<double>::infinity());
}

TEST_CASE("log sum exp") {
  const double a = std::log(0.3);
  CHECK(log_sum_exp(std::vector<double>{a}) == doctest::Approx(a));
  CHECK(log_sum_exp(std::vector<double>{a, a}) == doctest::Approx(std::log(0.6)));
  CHECK(log_sum_exp(std::vector<double>{kNegInf, kNegInf}) == kNegInf);
  CHECK(log_sum_exp(std::vector<double>{1000.0, 1000.0}) == doctest::Approx(1000.0 + std::log(2.0)));
  CHECK(log_add_exp(kNegInf, 2.0) == 2.0);
  CHECK(log_add_exp(-800.0, -800.0) == doctest::Approx(-800.0 + std::log(2.0)));
}

TEST_CASE("stabilized update") {
  const std::vector<double> w = {std::log(0.25), std::log(0.75)}, k = {-2000.0, -2001.0};
  CHECK(stabilized_update(w, k) == doctest::Approx(-2000.0 + std::log(0.25 + 0.75 * std::exp(-1.0))));
  const std::vector<double> none = {kNegInf, kNegInf};
  CHECK(stabilized_update(none, k) == kNegInf);
}

TEST_CASE("schedules") {
  const auto s = default_epsilon_schedule(5e-4);
  CHECK(s.front() == doctest::Approx(0.1));
  CHECK(s.back() == 5e-4);
  for (std::size_t i = 1; i < s.size(); ++i) CHECK(s[i] < s[i - 1]);

  SolverConfig c;
  c.epsilon = 0.01;
  c.epsilon_schedule = {0.04, 0.02, 0.01};
  CHECK_NOTHROW(c.validate());
  CHECK(c.resolved_schedule() == c.epsilon_schedule);
  c.epsilon_schedule = {0.02, 0.04, 0.01};
  CHECK_THROWS(c.validate());
  c.epsilon_schedule = {0.04, 0.02};
  CHECK_THROWS(c.validate());
  c.epsilon_schedule.clear();
  c.use_schedule = false;
  CHECK(c.resolved_schedule() == std::vector<double>{0.01});
  c.epsilon = 0.0;
  CHECK_THROWS(c.validate());
  c.epsilon = 0.01;
  c.marginal_tol = -1.0;
  CHECK_THROWS(c.validate());
}

TEST_CASE("diracs have a single feasible plan") {
  const CostMatrix cost(2, 3, {1, 2, 3, 4, 5, 6});
  const std::vector<double> a = {0.0, 1.0}, b = {0.0, 0.0, 1.0};
  SolverConfig cfg;
  cfg.epsilon = 0.05;
  const auto r = sinkhorn_standard(cost, a, b, cfg);
  CHECK(r.report.converged);
  CHECK(r.plan.mass() == doctest::Approx(1.0));
  CHECK(r.report.primal_cost == doctest::Approx(6.0));
}

TEST_CASE("zero cost gives the product plan") {
  const CostMatrix cost(3, 3, std::vector<double>(9, 0.0));
  const std::vector<double> a = {0.2, 0.3, 0.5};
  SolverConfig cfg;
  cfg.epsilon = 0.1;
  const auto r = sinkhorn_standard(cost, a, a, cfg);
  CHECK(r.report.primal_cost == 0.0);
  REQUIRE(r.plan.entries.size() == 9);
  for (const auto& e : r.plan.entries) CHECK(e.mass == doctest::Approx(a[e.row] * a[e.col]));
}

TEST_CASE("translated uniforms with quadratic cost") {
  const auto m0 = uniform_interval(0, 1, 200), m1 = uniform_interval(5, 6, 200);
  const auto cost = cost_matrix({2, 1}, m0.support, m1.support);
  const SolverConfig cfg;
  const auto r = sinkhorn_standard(cost, m0.weights, m1.weights, cfg);
  CHECK(r.report.converged);
  CHECK(r.report.primal_cost >= 25.0);
  CHECK(r.report.primal_cost <= 25.2);
  CHECK(r.report.marginal_violation_L1 <= cfg.marginal_tol);
  const double gap = r.report.entropic_objective - r.report.dual_value;
  CHECK(gap >= -1e-9);
  CHECK(gap <= 1e-6 * (1.0 + r.report.entropic_objective));
  REQUIRE(r.report.stage_primal_costs.size() == r.report.stage_epsilons.size());
}

}
