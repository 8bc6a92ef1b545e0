#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <set>
#include <sstream>

#include "cli_internal.hpp"
#include "interpark/cli.hpp"

namespace interpark::cli {

namespace {

const std::set<std::string, std::less<>>& known_keys() {
  static const std::set<std::string, std::less<>> keys = {
      "preset",       "problem",      "mu0",          "mu1",         "c0.exponent", "c0.scale",
      "c1.exponent",  "c1.scale",     "grid.bbox",    "grid.size",   "grid.padding", "constraint",
      "support",      "density.cap",  "density.region", "epsilon",   "max_iter",    "marginal_tol",
      "schedule",     "allow_walking", "seed",        "analytic.x0", "analytic.grid"};
  return keys;
}

std::string canonical_key(std::string key) {
  if (key == "nu0") return "mu0";
  if (key == "nu1") return "mu1";
  return key;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

}  // namespace

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(std::string_view text, std::string_view what) {
  const std::string s = trim(text);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v))
    throw InputError(std::string(what) + ": not a number: '" + s + "'");
  return v;
}

std::vector<double> parse_doubles(std::string_view text, std::size_t count, std::string_view what) {
  const auto parts = split(text, ',');
  if (count != 0 && parts.size() != count)
    throw InputError(std::string(what) + ": expected " + std::to_string(count) + " numbers");
  std::vector<double> v;
  for (const auto& p : parts) v.push_back(parse_double(p, what));
  return v;
}

std::optional<Subcommand> parse_subcommand(std::string_view name) {
  if (name == "interpolate") return Subcommand::Interpolate;
  if (name == "park") return Subcommand::Park;
  if (name == "oracle") return Subcommand::Oracle;
  if (name == "analytic") return Subcommand::Analytic;
  if (name == "compare") return Subcommand::Compare;
  return std::nullopt;
}

std::string_view to_string(Subcommand s) {
  switch (s) {
    case Subcommand::Interpolate: return "interpolate";
    case Subcommand::Park: return "park";
    case Subcommand::Oracle: return "oracle";
    case Subcommand::Analytic: return "analytic";
    case Subcommand::Compare: return "compare";
  }
  return "unknown";
}

bool is_known_key(std::string_view key) {
  return known_keys().count(canonical_key(std::string(key))) != 0;
}

RunConfig RunConfig::parse(std::string_view text, std::string_view origin) {
  RunConfig cfg;
  std::istringstream is{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const std::string body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    const std::string where = std::string(origin) + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw InputError(where + ": expected 'key = value'");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) throw InputError(where + ": empty key");
    if (!is_known_key(key)) throw InputError(where + ": unknown key '" + key + "'");
    cfg.set(key, value);
  }
  return cfg;
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (!is_known_key(key)) throw InputError("unknown key '" + key + "'");
  values_[canonical_key(key)] = value;
}

void RunConfig::merge(const RunConfig& other) {
  for (const auto& [k, v] : other.values_) values_[k] = v;
}

std::string RunConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw InputError("missing key '" + key + "'");
  return it->second;
}

std::string RunConfig::get(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double RunConfig::get_double(const std::string& key) const { return parse_double(get(key), key); }

double RunConfig::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

std::size_t RunConfig::get_size(const std::string& key, std::size_t fallback) const {
  if (!has(key)) return fallback;
  const double v = get_double(key);
  if (v < 1.0 || v != std::floor(v) || v > 1e9) throw InputError(key + ": expected a positive integer");
  return static_cast<std::size_t>(v);
}

bool RunConfig::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string v = get(key);
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  throw InputError(key + ": expected a boolean");
}

std::pair<std::size_t, std::size_t> parse_grid_flag(std::string_view text) {
  const std::string s = trim(text);
  const auto x = s.find('x');
  if (x == std::string::npos) throw InputError("grid: expected <nx>x<ny>");
  const double nx = parse_double(s.substr(0, x), "grid");
  const double ny = parse_double(s.substr(x + 1), "grid");
  if (nx < 1 || ny < 1 || nx != std::floor(nx) || ny != std::floor(ny))
    throw InputError("grid: sizes must be positive integers");
  return {static_cast<std::size_t>(nx), static_cast<std::size_t>(ny)};
}

Shape parse_shape(std::string_view spec) {
  const std::string s = trim(spec);
  const auto colon = s.find(':');
  const std::string kind = s.substr(0, colon);
  const std::string args = colon == std::string::npos ? "" : s.substr(colon + 1);
  Shape shape;
  if (kind == "all") {
    shape.inside = [](double, double) { return true; };
  } else if (kind == "box") {
    const auto v = parse_doubles(args, 4, "box");
    shape.inside = [v](double x, double y) { return x >= v[0] && x <= v[1] && y >= v[2] && y <= v[3]; };
    shape.bbox = BBox{v[0], v[1], v[2], v[3]};
  } else if (kind == "interval") {
    const auto v = parse_doubles(args, 2, "interval");
    shape.inside = [v](double x, double) { return x >= v[0] && x <= v[1]; };
  } else if (kind == "disk") {
    const auto v = parse_doubles(args, 3, "disk");
    shape.inside = [v](double x, double y) { return std::hypot(x - v[0], y - v[1]) <= v[2]; };
    shape.bbox = BBox{v[0] - v[2], v[0] + v[2], v[1] - v[2], v[1] + v[2]};
  } else if (kind == "annulus") {
    const auto v = parse_doubles(args, 4, "annulus");
    shape.inside = [v](double x, double y) {
      const double r = std::hypot(x - v[0], y - v[1]);
      return r >= v[2] && r <= v[3];
    };
    shape.bbox = BBox{v[0] - v[3], v[0] + v[3], v[1] - v[3], v[1] + v[3]};
  } else if (kind == "diamond") {
    const auto v = parse_doubles(args, 3, "diamond");
    shape.inside = [v](double x, double y) {
      return std::abs(x - v[0]) + std::abs(y - v[1]) <= v[2] * (1.0 + 1e-12);
    };
    shape.bbox = BBox{v[0] - v[2], v[0] + v[2], v[1] - v[2], v[1] + v[2]};
  } else {
    throw InputError("unknown shape '" + kind + "'");
  }
  return shape;
}

DiscreteMeasure parse_measure(std::string_view spec, const std::optional<GridSpec>& pivot_grid) {
  const std::string s = trim(spec);
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw InputError("measure: expected <kind>:<arguments>");
  const std::string kind = s.substr(0, colon);
  const std::string args = s.substr(colon + 1);
  if (kind == "dirac") {
    const auto v = parse_doubles(args, 2, "dirac");
    return make_point_measure(PointCloud(2, {v[0], v[1]}), {1.0});
  }
  if (kind == "points") {
    PointCloud pc(2);
    std::vector<double> w;
    for (const auto& item : split(args, ';')) {
      if (item.empty()) continue;
      const auto v = parse_doubles(item, 3, "points");
      const double p[2] = {v[0], v[1]};
      pc.push_back(p);
      w.push_back(v[2]);
    }
    if (w.empty()) throw InputError("points: no points given");
    try {
      return normalize(make_point_measure(std::move(pc), std::move(w)));
    } catch (const std::invalid_argument& e) {
      throw InputError(std::string("points: ") + e.what());
    }
  }
  if (kind == "pivotgrid") {
    if (!pivot_grid) throw InputError("pivotgrid measure needs grid.bbox");
    const Shape shape = parse_shape(args);
    const auto m = measure_from_density(
        *pivot_grid, [&](double x, double y) { return shape.inside(x, y) ? 1.0 : 0.0; }, false);
    if (!(total_mass(m) > 0.0)) throw InputError("pivotgrid measure: shape contains no cell");
    return normalize(m);
  }
  if (kind == "uniform") {
    const auto last = args.rfind(':');
    if (last == std::string::npos) throw InputError("uniform: expected uniform:<shape>:<nx>x<ny>");
    const Shape shape = parse_shape(args.substr(0, last));
    if (!shape.bbox) throw InputError("uniform: shape has no bounding box");
    const auto [nx, ny] = parse_grid_flag(args.substr(last + 1));
    const GridSpec g(*shape.bbox, nx, ny);
    const auto m = measure_from_density(g, [&](double x, double y) { return shape.inside(x, y) ? 1.0 : 0.0; }, false);
    if (!(total_mass(m) > 0.0)) throw InputError("uniform measure: shape contains no cell");
    return normalize(m);
  }
  if (kind == "csv") {
    std::ifstream in(args);
    if (!in) throw InputError("cannot read measure file " + args);
    try {
      return normalize(read_measure_csv(in));
    } catch (const std::invalid_argument& e) {
      throw InputError(std::string("measure file: ") + e.what());
    }
  }
  throw InputError("unknown measure kind '" + kind + "'");
}

CostSpec parse_cost(const RunConfig& cfg, const std::string& prefix) {
  CostSpec c{cfg.get_double(prefix + ".exponent", 2.0), cfg.get_double(prefix + ".scale", 1.0)};
  if (!(c.exponent > 0.0) || !(c.scale > 0.0)) throw InputError(prefix + ": exponent and scale must be positive");
  return c;
}

SolverConfig parse_solver(const RunConfig& cfg) {
  SolverConfig s;
  s.epsilon = cfg.get_double("epsilon", s.epsilon);
  s.max_iter = cfg.get_size("max_iter", s.max_iter);
  s.marginal_tol = cfg.get_double("marginal_tol", s.marginal_tol);
  const std::string sched = cfg.get("schedule", "on");
  if (sched == "off") {
    s.use_schedule = false;
  } else if (sched != "on") {
    s.epsilon_schedule = parse_doubles(sched, 0, "schedule");
  }
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  return s;
}

ProblemData parse_problem(const RunConfig& cfg) {
  const std::optional<GridSpec> given_grid = [&]() -> std::optional<GridSpec> {
    if (!cfg.has("grid.bbox")) return std::nullopt;
    const auto b = parse_doubles(cfg.get("grid.bbox"), 4, "grid.bbox");
    if (!(b[1] > b[0]) || !(b[3] > b[2])) throw InputError("grid.bbox: empty box");
    const auto [nx, ny] = parse_grid_flag(cfg.get("grid.size", "128x128"));
    return GridSpec(BBox{b[0], b[1], b[2], b[3]}, nx, ny);
  }();
  ProblemData d{parse_measure(cfg.get("mu0"), given_grid), parse_measure(cfg.get("mu1"), given_grid),
                parse_cost(cfg, "c0"), parse_cost(cfg, "c1"), GridSpec(BBox{}, 1, 1), FreeConstraint{},
                parse_solver(cfg)};
  if (d.mu0.support.dim() != 2 || d.mu1.support.dim() != 2) throw InputError("measures must be 2-D");
  if (given_grid) {
    d.grid = *given_grid;
  } else {
    const auto [nx, ny] = parse_grid_flag(cfg.get("grid.size", "128x128"));
    d.grid = GridSpec(coercivity_box(d.mu0.support, d.mu1.support, cfg.get_double("grid.padding", 1.0)), nx, ny);
  }
  const std::string kind = cfg.get("constraint", "free");
  if (kind == "support") {
    const Shape shape = parse_shape(cfg.get("support"));
    try {
      d.constraint = mask_from_predicate(d.grid, shape.inside);
    } catch (const std::invalid_argument& e) {
      throw InputError(std::string("support: ") + e.what());
    }
  } else if (kind == "density") {
    const double cap = cfg.get_double("density.cap");
    if (!(cap > 0.0)) throw InputError("density.cap must be positive");
    const Shape region = parse_shape(cfg.get("density.region", "all"));
    std::vector<double> caps(d.grid.size());
    for (std::size_t c = 0; c < caps.size(); ++c) {
      const auto p = d.grid.center(c);
      caps[c] = region.inside(p[0], p[1]) ? cap : 0.0;
    }
    d.constraint = DensityBound(d.grid, std::move(caps));
  } else if (kind != "free") {
    throw InputError("constraint must be free, support or density");
  }
  return d;
}

InterpolationProblem build_interpolation_problem(const RunConfig& config) {
  ProblemData d = parse_problem(config);
  if (const auto* b = std::get_if<DensityBound>(&d.constraint); b && !(b->total_cap_mass() > 1.0))
    throw InputError("density bound is infeasible: total cap mass must exceed 1");
  return {d.mu0, d.mu1, d.c0, d.c1, d.grid, d.constraint, d.solver};
}

ParkingProblem build_parking_problem(const RunConfig& config) {
  ProblemData d = parse_problem(config);
  try {
    parking_lambda(d.c0, d.c1);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  return {d.mu0, d.mu1, d.c0, d.c1, d.grid, d.constraint, d.solver, config.get_bool("allow_walking", true)};
}

// ---------------------------------------------------------------- presets

namespace {

using Params = std::map<std::string, double>;

struct PresetDef {
  std::string name;
  Params defaults;
  std::function<RunConfig(const Params&)> make;
};

RunConfig one_d(double t, double p, const std::string& constraint, double theta) {
  RunConfig c;
  c.set("grid.bbox", "0,6,0,1");
  c.set("grid.size", "300x1");
  c.set("mu0", "pivotgrid:interval:0,1");
  c.set("mu1", "pivotgrid:interval:5,6");
  c.set("c0.exponent", num(p));
  c.set("c0.scale", num(1.0 - t));
  c.set("c1.exponent", num(p));
  c.set("c1.scale", num(t));
  c.set("constraint", constraint);
  if (constraint == "support") c.set("support", "interval:2,4");
  if (constraint == "density") {
    c.set("density.cap", num(theta));
    c.set("density.region", "interval:2,4");
  }
  return c;
}

RunConfig two_diracs(double p, double lambda, double r) {
  RunConfig c;
  c.set("mu0", "dirac:" + num(r) + ",0");
  c.set("mu1", "dirac:0,0");
  c.set("c0.exponent", num(p));
  c.set("c0.scale", "1");
  c.set("c1.exponent", num(p));
  c.set("c1.scale", num(lambda));
  c.set("grid.bbox", num(-0.7 * r) + "," + num(1.2 * r) + "," + num(-0.95 * r) + "," + num(0.95 * r));
  c.set("grid.size", "100x100");
  c.set("constraint", "density");
  c.set("density.cap", "1");
  c.set("analytic.x0", num(r));
  return c;
}

RunConfig four_diracs(double p, double cap) {
  RunConfig c;
  c.set("mu0", "points:0.5,0.1,0.25;0.5,0.9,0.25;0.1,0.5,0.25;0.9,0.5,0.25");
  c.set("mu1", "dirac:0.5,0.5");
  c.set("c0.exponent", num(p));
  c.set("c0.scale", "1");
  c.set("c1.exponent", num(p));
  c.set("c1.scale", "1.5");
  c.set("grid.bbox", "0,1,0,1");
  c.set("grid.size", "128x128");
  c.set("constraint", "density");
  c.set("density.cap", num(cap));
  return c;
}

const std::vector<PresetDef>& presets() {
  static const std::vector<PresetDef> defs = {
      {"example-2.1-distance", {{"t", 0.7}}, [](const Params& q) { return one_d(q.at("t"), 1, "free", 0); }},
      {"example-2.1-distance-K", {{"t", 0.3}}, [](const Params& q) { return one_d(q.at("t"), 1, "support", 0); }},
      {"example-2.1-distance-density", {{"t", 0.3}, {"theta", 0.75}},
       [](const Params& q) { return one_d(q.at("t"), 1, "density", q.at("theta")); }},
      {"example-2.1-quadratic", {{"t", 0.3}}, [](const Params& q) { return one_d(q.at("t"), 2, "free", 0); }},
      {"example-2.1-quadratic-K", {{"t", 0.3}}, [](const Params& q) { return one_d(q.at("t"), 2, "support", 0); }},
      {"example-2.1-quadratic-density", {{"t", 0.3}, {"theta", 0.75}},
       [](const Params& q) { return one_d(q.at("t"), 2, "density", q.at("theta")); }},
      {"square-corner", {{"n", 21}},
       [](const Params& q) {
         const double n = q.at("n");
         if (n < 3 || n != std::floor(n) || std::fmod(n, 2.0) != 1.0) throw InputError("square-corner: n must be odd");
         const double half = 1.0 + 1.0 / (n - 1.0);
         RunConfig c;
         c.set("mu0", "dirac:-2,0");
         c.set("mu1", "uniform:disk:3,0,1:41x41");
         c.set("c0.exponent", "2");
         c.set("c0.scale", "1");
         c.set("c1.exponent", "2");
         c.set("c1.scale", "2");
         c.set("grid.bbox", num(-half) + "," + num(half) + "," + num(-half) + "," + num(half));
         const std::string size = num(n) + "x" + num(n);
         c.set("grid.size", size);
         c.set("constraint", "support");
         c.set("support", "diamond:0,0,1");
         return c;
       }},
      {"boundary-annulus", {{"p", 1}, {"lambda", 1.5}},
       [](const Params& q) {
         RunConfig c;
         c.set("mu0", "points:0.05,0.05,0.25;0.95,0.05,0.25;0.05,0.95,0.25;0.95,0.95,0.25");
         c.set("mu1", "dirac:0.5,0.5");
         c.set("c0.exponent", num(q.at("p")));
         c.set("c0.scale", "1");
         c.set("c1.exponent", num(q.at("p")));
         c.set("c1.scale", num(q.at("lambda")));
         c.set("grid.bbox", "0,1,0,1");
         c.set("grid.size", "128x128");
         c.set("constraint", "support");
         c.set("support", "annulus:0.5,0.5,0.2,0.4");
         return c;
       }},
      {"fig1-left", {{"x0", 1.0}}, [](const Params& q) { return two_diracs(2, 2, q.at("x0")); }},
      {"fig1-right", {{"x0", 0.5}}, [](const Params& q) { return two_diracs(2, 2, q.at("x0")); }},
      {"fig2-left", {{"x0", 1.0}}, [](const Params& q) { return two_diracs(1, 2, q.at("x0")); }},
      {"fig2-right", {{"x0", 0.5}}, [](const Params& q) { return two_diracs(1, 2, q.at("x0")); }},
      {"fig4", {{"cap", 1.5}}, [](const Params& q) { return four_diracs(0.25, q.at("cap")); }},
      {"fig5", {{"cap", 1.5}}, [](const Params& q) { return four_diracs(0.75, q.at("cap")); }},
      {"fig6", {{"cap", 1.5}}, [](const Params& q) { return four_diracs(1.0, q.at("cap")); }},
      {"fig7", {{"cap", 1.5}}, [](const Params& q) { return four_diracs(2.0, q.at("cap")); }},
  };
  return defs;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& d : presets()) names.push_back(d.name);
  return names;
}

RunConfig preset(std::string_view spec) {
  std::istringstream is{std::string(spec)};
  std::string name, word;
  is >> name;
  const auto& defs = presets();
  const auto it = std::find_if(defs.begin(), defs.end(), [&](const PresetDef& d) { return d.name == name; });
  if (it == defs.end()) throw InputError("unknown preset '" + name + "'");
  Params params = it->defaults;
  while (is >> word) {
    const auto eq = word.find('=');
    if (eq == std::string::npos) throw InputError("preset parameter must be name=value: '" + word + "'");
    const std::string key = word.substr(0, eq);
    if (!params.count(key)) throw InputError("preset '" + name + "' has no parameter '" + key + "'");
    params[key] = parse_double(word.substr(eq + 1), key);
  }
  RunConfig cfg = it->make(params);
  cfg.set("preset", trim(spec));
  return cfg;
}

RunConfig resolve_config(const std::optional<std::string>& preset_spec,
                         const std::optional<std::filesystem::path>& config_path, const Overrides& flags) {
  RunConfig file;
  if (config_path) file = RunConfig::from_file(*config_path);
  std::optional<std::string> spec = preset_spec;
  if (!spec && file.has("preset")) spec = file.get("preset");
  RunConfig cfg;
  if (spec) cfg = preset(*spec);
  cfg.merge(file);
  if (spec) cfg.set("preset", *spec);
  if (flags.epsilon) {
    if (!(*flags.epsilon > 0.0)) throw InputError("--epsilon must be positive");
    cfg.set("epsilon", num(*flags.epsilon));
  }
  if (flags.grid) cfg.set("grid.size", std::to_string(flags.grid->first) + "x" + std::to_string(flags.grid->second));
  if (flags.max_iter) {
    if (*flags.max_iter == 0) throw InputError("--max-iter must be positive");
    cfg.set("max_iter", std::to_string(*flags.max_iter));
  }
  return cfg;
}

}  // namespace interpark::cli
