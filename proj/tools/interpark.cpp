#include <CLI11.hpp>

#include <iostream>

#include "interpark/cli.hpp"

namespace ic = interpark::cli;

namespace {

struct SolveArgs {
  std::string config;
  std::string preset;
  std::string out;
  std::string grid;
  std::vector<std::string> sets;
  std::optional<double> epsilon;
  std::optional<std::size_t> max_iter;
};

void add_solve_options(CLI::App* cmd, SolveArgs& a) {
  cmd->add_option("--config", a.config, "key = value configuration file");
  cmd->add_option("--preset", a.preset, "preset name with optional param=value words");
  cmd->add_option("--out", a.out, "output directory")->required();
  cmd->add_option("--epsilon", a.epsilon, "final entropic regularization");
  cmd->add_option("--grid", a.grid, "pivot grid size as NXxNY");
  cmd->add_option("--max-iter", a.max_iter, "iteration budget per epsilon stage");
  cmd->add_option("--set", a.sets, "extra key=value setting (repeatable)");
}

int solve(ic::Subcommand sub, const SolveArgs& a) {
  try {
    ic::Overrides flags;
    flags.epsilon = a.epsilon;
    flags.max_iter = a.max_iter;
    if (!a.grid.empty()) flags.grid = ic::parse_grid_flag(a.grid);
    std::optional<std::string> preset;
    if (!a.preset.empty()) preset = a.preset;
    std::optional<std::filesystem::path> config;
    if (!a.config.empty()) config = a.config;
    if (!preset && !config) throw ic::InputError("give --preset or --config");
    ic::RunConfig cfg = ic::resolve_config(preset, config, flags);
    for (const auto& kv : a.sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ic::InputError("--set expects key=value");
      cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    return ic::run(sub, cfg, a.out, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return ic::kExitInputError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interpolation and parking problems with a pivot measure"};
  app.require_subcommand(0, 1);
  bool list = false;
  app.add_flag("--list-presets", list, "print the preset names");

  SolveArgs args;
  std::vector<std::pair<ic::Subcommand, CLI::App*>> solvers;
  for (auto [sub, help] : {std::pair{ic::Subcommand::Interpolate, "entropic interpolation"},
                           std::pair{ic::Subcommand::Park, "entropic parking"},
                           std::pair{ic::Subcommand::Oracle, "exact solution on the pivot grid"},
                           std::pair{ic::Subcommand::Analytic, "two-Dirac parking by level-set quadrature"}}) {
    CLI::App* cmd = app.add_subcommand(std::string(ic::to_string(sub)), help);
    add_solve_options(cmd, args);
    solvers.emplace_back(sub, cmd);
  }

  std::string run_a, run_b, compare_out;
  std::optional<double> value_tol, tv_tol;
  CLI::App* cmp = app.add_subcommand("compare", "compare two output directories");
  cmp->add_option("run_a", run_a, "first run directory")->required();
  cmp->add_option("run_b", run_b, "reference run directory")->required();
  cmp->add_option("--value-tol", value_tol, "largest accepted |value gap|");
  cmp->add_option("--tv-tol", tv_tol, "largest accepted pivot total variation");
  cmp->add_option("--out", compare_out, "directory for comparison.txt");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : ic::kExitInputError;
  }

  if (list) {
    for (const auto& name : ic::preset_names()) std::cout << name << '\n';
    return 0;
  }
  for (const auto& [sub, cmd] : solvers)
    if (cmd->parsed()) return solve(sub, args);
  if (cmp->parsed()) {
    std::optional<std::filesystem::path> out;
    if (!compare_out.empty()) out = compare_out;
    return ic::compare(run_a, run_b, {value_tol, tv_tol}, out, std::cout, std::cerr);
  }
  std::cerr << app.help();
  return ic::kExitInputError;
}
