#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "cli_internal.hpp"
#include "interpark/diagnostics.hpp"
#include "interpark/exact_oracles.hpp"

namespace interpark::cli {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(15) << v;
  return os.str();
}

class Summary {
 public:
  void add(const std::string& key, const std::string& value) { os_ << key << " = " << value << '\n'; }
  void add(const std::string& key, double value) { add(key, fmt(value)); }
  void add_bool(const std::string& key, bool value) { add(key, std::string(value ? "true" : "false")); }
  std::string str() const { return os_.str(); }

 private:
  std::ostringstream os_;
};

struct Output {
  std::vector<std::pair<std::string, std::string>> files;
  std::string config_echo;
  double pgm_scale = 0.0;
  bool converged = true;

  template <class F>
  void add(const std::string& name, F&& writer) {
    std::ostringstream os;
    writer(os);
    files.emplace_back(name, os.str());
  }
};

std::string echo(const RunConfig& cfg) {
  std::ostringstream os;
  for (const auto& [k, v] : cfg.values()) os << "config." << k << " = " << v << '\n';
  return os.str();
}

void add_grid_info(Summary& s, const GridSpec& g) {
  const auto& b = g.bbox();
  s.add("grid.bbox", fmt(b.xmin) + "," + fmt(b.xmax) + "," + fmt(b.ymin) + "," + fmt(b.ymax));
  s.add("grid.size", std::to_string(g.nx()) + "x" + std::to_string(g.ny()));
}

void add_report(Summary& s, const EntropicReport& r) {
  s.add("epsilon", r.final_epsilon);
  s.add("entropic_objective", r.entropic_objective);
  s.add("iterations", std::to_string(r.iterations_used));
  s.add_bool("converged", r.converged);
  s.add("marginal_violation_L1", r.marginal_violation_L1);
  for (std::size_t i = 0; i < r.stage_epsilons.size(); ++i) {
    s.add("stage." + std::to_string(i) + ".epsilon", r.stage_epsilons[i]);
    s.add("stage." + std::to_string(i) + ".primal", r.stage_primal_costs[i]);
  }
}

void add_pivot_files(Output& out, const std::string& stem, const DiscreteMeasure& m) {
  out.add(stem + ".csv", [&](std::ostream& os) { write_measure_csv(os, m); });
  out.add(stem + "_grid.txt", [&](std::ostream& os) { write_grid_text(os, m); });
  out.add(stem + ".pgm", [&](std::ostream& os) { out.pgm_scale = write_pgm(os, m); });
}

void add_plan(Output& out, const std::string& name, const TransportPlan& plan) {
  out.add(name, [&](std::ostream& os) { write_plan_csv(os, plan); });
}

void add_diagnostics(Output& out, const DiagnosticsReport& d) {
  out.add("diagnostics.txt", [&](std::ostream& os) { d.write_key_values(os); });
  out.add("diagnostics.csv", [&](std::ostream& os) { os << DiagnosticsReport::csv_header() << '\n' << d.csv_row() << '\n'; });
}

void fill_shape_diagnostics(DiagnosticsReport& d, const DiscreteMeasure& pivot, const DiscreteMeasure& mu0,
                            const CostSpec& c0, const CostSpec& c1, const PivotConstraint& constraint) {
  if (const auto* b = std::get_if<DensityBound>(&constraint)) d.bang_bang_fraction = bang_bang_fraction(pivot, *b);
  const auto* mask = std::get_if<SupportMask>(&constraint);
  if (mask) d.boundary_mass_fraction = boundary_mass_fraction(pivot, *mask);
  if (mu0.grid && c0.exponent == 2.0 && c1.exponent == 2.0 && !std::holds_alternative<DensityBound>(constraint)) {
    const SupportMask m = mask ? *mask : full_mask(*pivot.grid);
    try {
      d.interior_density_ratio = interior_density_bound_check(pivot, mu0, c0, c1, m);
    } catch (const std::invalid_argument&) {
      d.interior_density_ratio = -1.0;
    }
  }
}

std::vector<double> pivot_weights(const TransportPlan& plan, bool by_columns) {
  return by_columns ? plan.col_sums() : plan.row_sums();
}

void run_interpolate(const RunConfig& cfg, Output& out) {
  const InterpolationProblem problem = build_interpolation_problem(cfg);
  const InterpolationSolution sol = solve_interpolation(problem);
  Summary s;
  s.add("subcommand", "interpolate");
  add_grid_info(s, problem.pivot_grid);
  s.add("primal_value", sol.primal_value);
  s.add("dual_value", sol.dual_value);
  s.add("duality_gap", sol.report.entropic_objective - sol.dual_value);
  s.add("pivot_mass", total_mass(sol.pivot));
  add_report(s, sol.report);
  out.converged = sol.report.converged;
  out.files.emplace_back("summary.txt", out.config_echo + s.str());

  add_pivot_files(out, "pivot", sol.pivot);
  add_plan(out, "gamma0.csv", sol.gamma0);
  add_plan(out, "gamma1.csv", sol.gamma1);

  DiagnosticsReport d;
  d.run = "interpolate";
  d.duality_gap = sol.report.entropic_objective - sol.dual_value;
  d.marginal_violations = {
      {"gamma0", marginal_violation(sol.gamma0, problem.mu0.weights, {})},
      {"gamma1", marginal_violation(sol.gamma1, {}, problem.mu1.weights)},
      {"pivot", 2.0 * tv_distance(pivot_weights(sol.gamma0, true), pivot_weights(sol.gamma1, false))}};
  fill_shape_diagnostics(d, sol.pivot, problem.mu0, problem.c0, problem.c1, problem.constraint);
  add_diagnostics(out, d);
}

void add_driving_files(Output& out, const ParkingPlans& plans, const ParkingProblem& problem) {
  const auto [m0, m1, alpha] = split_driving_walking(plans, problem);
  out.add("mu0_driving.csv", [&](std::ostream& os) { write_measure_csv(os, m0); });
  out.add("mu1_driving.csv", [&](std::ostream& os) { write_measure_csv(os, m1); });
  (void)alpha;
}

void run_park(const RunConfig& cfg, Output& out) {
  const ParkingProblem problem = build_parking_problem(cfg);
  const ParkingEntropicSolution sol = solve_parking(problem);
  Summary s;
  s.add("subcommand", "park");
  add_grid_info(s, problem.pivot_grid);
  s.add("primal_value", sol.primal_value);
  s.add("dual_value", sol.dual_value);
  s.add("duality_gap", sol.report.entropic_objective - sol.dual_value);
  s.add("alpha", sol.alpha);
  s.add("walk_cost", sol.walk_cost);
  s.add("drive_cost", sol.drive_cost);
  s.add("park_walk_cost", sol.park_walk_cost);
  s.add("pivot_mass", total_mass(sol.parking_measure));
  add_report(s, sol.report);
  out.converged = sol.report.converged;
  out.files.emplace_back("summary.txt", out.config_echo + s.str());

  add_pivot_files(out, "pivot", sol.parking_measure);
  add_plan(out, "walk.csv", sol.plans.walk);
  add_plan(out, "drive_to_pivot.csv", sol.plans.drive_to_pivot);
  add_plan(out, "pivot_to_service.csv", sol.plans.pivot_to_service);
  out.add("mu0_driving.csv", [&](std::ostream& os) { write_measure_csv(os, sol.mu0_driving); });
  out.add("mu1_driving.csv", [&](std::ostream& os) { write_measure_csv(os, sol.mu1_driving); });

  DiagnosticsReport d;
  d.run = "park";
  d.duality_gap = sol.report.entropic_objective - sol.dual_value;
  auto rows = sol.plans.walk.row_sums();
  const auto drive_rows = sol.plans.drive_to_pivot.row_sums();
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] += drive_rows[i];
  auto cols = sol.plans.walk.col_sums();
  const auto service_cols = sol.plans.pivot_to_service.col_sums();
  for (std::size_t j = 0; j < cols.size(); ++j) cols[j] += service_cols[j];
  d.marginal_violations = {
      {"nu0", 2.0 * tv_distance(rows, problem.nu0.weights)},
      {"nu1", 2.0 * tv_distance(cols, problem.nu1.weights)},
      {"pivot", 2.0 * tv_distance(pivot_weights(sol.plans.drive_to_pivot, true),
                                  pivot_weights(sol.plans.pivot_to_service, false))}};
  fill_shape_diagnostics(d, sol.parking_measure, problem.nu0, problem.c0, problem.c1, problem.constraint);
  add_diagnostics(out, d);
}

DiscreteMeasure to_grid(const GridSpec& grid, const std::vector<std::uint32_t>& cells, const DiscreteMeasure& on_k) {
  std::vector<double> w(grid.size(), 0.0);
  for (std::size_t k = 0; k < cells.size(); ++k) w[cells[k]] += on_k.weights[k];
  return make_grid_measure(grid, std::move(w));
}

void run_oracle(const RunConfig& cfg, Output& out) {
  const std::string kind = cfg.get("problem", "interpolation");
  if (kind != "interpolation" && kind != "parking") throw InputError("problem must be interpolation or parking");
  if (cfg.get("constraint", "free") == "density")
    throw InputError("the exact oracle handles free and support constraints only");
  const ProblemData d = parse_problem(cfg);
  const PivotDomain domain = make_pivot_domain(d.grid, d.constraint);
  const bool parking = kind == "parking" && cfg.get_bool("allow_walking", true);
  if (kind == "parking") {
    try {
      parking_lambda(d.c0, d.c1);
    } catch (const std::invalid_argument& e) {
      throw InputError(e.what());
    }
  }
  Summary s;
  s.add("subcommand", "oracle");
  s.add("problem", kind);
  add_grid_info(s, d.grid);
  DiagnosticsReport diag;
  diag.run = "oracle";
  DiscreteMeasure pivot;
  if (parking) {
    const ExactParkingSolution sol = parking_via_reduction(d.mu0, d.mu1, d.c0, d.c1, domain.points);
    pivot = to_grid(d.grid, domain.cells, sol.parking_measure);
    s.add("primal_value", sol.total_cost);
    s.add("alpha", sol.driving_fraction);
    s.add("walk_cost", sol.walk_cost);
    s.add("drive_cost", sol.drive_cost);
    s.add("park_walk_cost", sol.park_walk_cost);
    const ParkingPlans plans = plans_of(sol, d.mu0.size(), d.mu1.size(), d.grid.size(), domain.cells);
    add_plan(out, "walk.csv", plans.walk);
    add_plan(out, "drive_to_pivot.csv", plans.drive_to_pivot);
    add_plan(out, "pivot_to_service.csv", plans.pivot_to_service);
    const ParkingProblem problem{d.mu0, d.mu1, d.c0, d.c1, d.grid, d.constraint, d.solver, true};
    add_driving_files(out, plans, problem);
  } else {
    const ReductionResult sol = interpolation_via_reduction(d.mu0, d.mu1, d.c0, d.c1, domain.points);
    pivot = to_grid(d.grid, domain.cells, sol.pivot);
    const DiscreteMeasure a = compress(d.mu0), b = compress(d.mu1);
    const ReducedCostResult reduced = reduced_interpolation_cost(d.c0, d.c1, a.support, b.support, domain.points);
    const ExactOtResult lp = exact_ot(reduced.matrix, a.weights, b.weights);
    s.add("primal_value", sol.value);
    s.add("dual_value", lp.dual_value);
    s.add("duality_gap", sol.value - lp.dual_value);
    diag.duality_gap = sol.value - lp.dual_value;
    if (kind == "parking") s.add("alpha", 1.0);
    add_plan(out, "plan.csv", sol.plan);
  }
  s.add("pivot_mass", total_mass(pivot));
  s.add_bool("converged", true);
  out.files.insert(out.files.begin(), {"summary.txt", out.config_echo + s.str()});
  add_pivot_files(out, "pivot", pivot);
  fill_shape_diagnostics(diag, pivot, d.mu0, d.c0, d.c1, d.constraint);
  add_diagnostics(out, diag);
}

void run_analytic(const RunConfig& cfg, Output& out) {
  const CostSpec c0 = parse_cost(cfg, "c0"), c1 = parse_cost(cfg, "c1");
  double lambda = 0.0;
  try {
    lambda = parking_lambda(c0, c1);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  const double r = cfg.get_double("analytic.x0");
  if (!(r > 0.0)) throw InputError("analytic.x0 must be positive");
  const double cap = cfg.get_double("density.cap", 1.0);
  if (!(cap > 0.0)) throw InputError("density.cap must be positive");
  const std::size_t n = cfg.get_size("analytic.grid", 800);
  const GridSpec grid(BBox{-1.05 * r, 1.05 * r, -1.05 * r, 1.05 * r}, n, n);
  const LevelSetResult res = parking_level_set(c0.exponent, lambda, {r, 0.0}, cap, grid);

  Summary s;
  s.add("subcommand", "analytic");
  add_grid_info(s, grid);
  s.add("p", c0.exponent);
  s.add("lambda", lambda);
  s.add("x0", r);
  s.add("alpha", res.alpha);
  s.add("level", res.level);
  if (c0.exponent == 2.0 && cap == 1.0) {
    const double closed = alpha_closed_form_p2(lambda, r);
    if (closed < 1.0) s.add("alpha_closed_form", closed);
  }
  s.add_bool("converged", true);
  out.files.emplace_back("summary.txt", out.config_echo + s.str());

  std::vector<double> w(grid.size());
  for (std::size_t c = 0; c < w.size(); ++c) w[c] = res.region[c] ? cap * grid.cell_area() : 0.0;
  add_pivot_files(out, "region", make_grid_measure(grid, std::move(w)));
}

void write_outputs(const Output& out, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ostringstream manifest;
  manifest << out.config_echo;
  manifest << "pgm.max_density = " << fmt(out.pgm_scale) << '\n';
  for (const auto& [name, content] : out.files) {
    std::ofstream f(dir / name, std::ios::binary);
    f << content;
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    manifest << "sha256." << name << " = " << sha256_hex(content) << '\n';
  }
  std::ofstream f(dir / "manifest.txt", std::ios::binary);
  f << manifest.str();
  if (!f) throw std::runtime_error("cannot write manifest");
}

std::map<std::string, std::string> read_summary(const std::filesystem::path& dir) {
  std::ifstream in(dir / "summary.txt");
  if (!in) throw InputError("missing " + (dir / "summary.txt").string());
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find(" = ");
    if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return kv;
}

DiscreteMeasure read_pivot(const std::filesystem::path& dir) {
  for (const char* name : {"pivot.csv", "region.csv"}) {
    std::ifstream in(dir / name);
    if (in) return read_measure_csv(in);
  }
  throw InputError("missing pivot.csv in " + dir.string());
}

double summary_value(const std::map<std::string, std::string>& kv, const std::string& key,
                     const std::filesystem::path& dir) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw InputError(dir.string() + ": summary has no " + key);
  return parse_double(it->second, key);
}

}  // namespace

int run(Subcommand sub, const RunConfig& config, const std::filesystem::path& out_dir, std::ostream& err) {
  Output out;
  out.config_echo = echo(config);
  try {
    switch (sub) {
      case Subcommand::Interpolate: run_interpolate(config, out); break;
      case Subcommand::Park: run_park(config, out); break;
      case Subcommand::Oracle: run_oracle(config, out); break;
      case Subcommand::Analytic: run_analytic(config, out); break;
      case Subcommand::Compare: throw InputError("compare takes two run directories");
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
  try {
    write_outputs(out, out_dir);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
  if (!out.converged) {
    err << "warning: solver did not reach the marginal tolerance\n";
    return kExitNotConverged;
  }
  return kExitConverged;
}

ComparisonReport compare_runs(const std::filesystem::path& a, const std::filesystem::path& b,
                              const CompareTolerances& tol) {
  const auto sa = read_summary(a), sb = read_summary(b);
  if (sa.count("grid.bbox") == 0 || sb.count("grid.bbox") == 0 || sa.at("grid.bbox") != sb.at("grid.bbox") ||
      sa.at("grid.size") != sb.at("grid.size"))
    throw InputError("runs use different pivot grids");
  ComparisonReport r;
  const std::string key_a = sa.count("primal_value") ? "primal_value" : "alpha";
  r.value_a = summary_value(sa, key_a, a);
  r.value_b = summary_value(sb, key_a, b);
  r.value_gap = r.value_a - r.value_b;
  const DiscreteMeasure pa = read_pivot(a), pb = read_pivot(b);
  if (pa.size() != pb.size()) throw InputError("pivot files have different sizes");
  r.pivot_tv = tv_distance(pa.weights, pb.weights);
  for (std::size_t i = 0;; ++i) {
    const std::string stem = "stage." + std::to_string(i);
    if (!sa.count(stem + ".epsilon") || !sa.count(stem + ".primal")) break;
    r.stage_gaps.emplace_back(summary_value(sa, stem + ".epsilon", a),
                              summary_value(sa, stem + ".primal", a) - r.value_b);
  }
  for (std::size_t i = 1; i < r.stage_gaps.size(); ++i)
    if (std::abs(r.stage_gaps[i].second) >= std::abs(r.stage_gaps[i - 1].second)) r.stage_gaps_decreasing = false;
  if (tol.value_gap && std::abs(r.value_gap) > *tol.value_gap) r.pass = false;
  if (tol.pivot_tv && r.pivot_tv > *tol.pivot_tv) r.pass = false;
  return r;
}

int compare(const std::filesystem::path& a, const std::filesystem::path& b, const CompareTolerances& tol,
            const std::optional<std::filesystem::path>& out, std::ostream& report, std::ostream& err) {
  ComparisonReport r;
  try {
    r = compare_runs(a, b, tol);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
  Summary s;
  s.add("value_a", r.value_a);
  s.add("value_b", r.value_b);
  s.add("value_gap", r.value_gap);
  s.add("pivot_tv", r.pivot_tv);
  for (std::size_t i = 0; i < r.stage_gaps.size(); ++i) {
    s.add("stage." + std::to_string(i) + ".epsilon", r.stage_gaps[i].first);
    s.add("stage." + std::to_string(i) + ".gap", r.stage_gaps[i].second);
  }
  s.add_bool("stage_gaps_decreasing", r.stage_gaps_decreasing);
  s.add_bool("pass", r.pass);
  report << s.str();
  if (out) {
    try {
      std::filesystem::create_directories(*out);
      std::ofstream f(*out / "comparison.txt");
      f << s.str();
      if (!f) throw std::runtime_error("cannot write comparison.txt");
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return kExitInputError;
    }
  }
  return r.pass ? kExitConverged : kExitNotConverged;
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  std::ostringstream os;
  os << std::hex << std::setfill('0');
  for (unsigned int i = 0; i < len; ++i) os << std::setw(2) << static_cast<int>(digest[i]);
  return os.str();
}

double write_pgm(std::ostream& os, const DiscreteMeasure& m) {
  if (!m.grid) throw std::invalid_argument("write_pgm: needs a grid measure");
  const GridSpec& g = *m.grid;
  double top = 0.0;
  for (std::size_t c = 0; c < m.size(); ++c) top = std::max(top, m.density(c));
  os << "P2\n" << g.nx() << ' ' << g.ny() << "\n255\n";
  for (std::size_t row = g.ny(); row-- > 0;) {
    for (std::size_t ix = 0; ix < g.nx(); ++ix) {
      const double d = m.density(g.index(ix, row));
      const long v = top > 0.0 ? std::lround(255.0 * std::clamp(d / top, 0.0, 1.0)) : 0;
      os << v << (ix + 1 < g.nx() ? ' ' : '\n');
    }
  }
  return top;
}

}  // namespace interpark::cli
