#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "interpark/cli.hpp"

namespace interpark::cli {

std::vector<std::string> split(std::string_view s, char sep);
double parse_double(std::string_view text, std::string_view what);
/// `count` of 0 accepts any number of values.
std::vector<double> parse_doubles(std::string_view text, std::size_t count, std::string_view what);

struct Shape {
  std::function<bool(double, double)> inside;
  std::optional<BBox> bbox;
};

Shape parse_shape(std::string_view spec);
DiscreteMeasure parse_measure(std::string_view spec, const std::optional<GridSpec>& pivot_grid);
CostSpec parse_cost(const RunConfig& cfg, const std::string& prefix);
SolverConfig parse_solver(const RunConfig& cfg);

struct ProblemData {
  DiscreteMeasure mu0;
  DiscreteMeasure mu1;
  CostSpec c0;
  CostSpec c1;
  GridSpec grid;
  PivotConstraint constraint;
  SolverConfig solver;
};

ProblemData parse_problem(const RunConfig& cfg);

}  // namespace interpark::cli
