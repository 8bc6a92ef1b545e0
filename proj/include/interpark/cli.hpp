#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "interpark/interpolation.hpp"
#include "interpark/parking.hpp"

namespace interpark::cli {

enum class Subcommand { Interpolate, Park, Oracle, Analytic, Compare };

std::optional<Subcommand> parse_subcommand(std::string_view name);
std::string_view to_string(Subcommand s);

/// Bad configuration or arguments; maps to exit status 1.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr int kExitConverged = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitNotConverged = 2;

bool is_known_key(std::string_view key);

/// Flat `key = value` settings. Lines starting with '#' and blank lines are
/// ignored; a '#' after a value starts a comment.
class RunConfig {
 public:
  static RunConfig parse(std::string_view text, std::string_view origin = "config");
  static RunConfig from_file(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value);
  /// Values of `other` win.
  void merge(const RunConfig& other);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::string get(const std::string& key) const;
  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  std::size_t get_size(const std::string& key, std::size_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

std::vector<std::string> preset_names();

/// `spec` is a preset name optionally followed by `param=value` words,
/// e.g. "example-2.1-quadratic t=0.3".
RunConfig preset(std::string_view spec);

std::pair<std::size_t, std::size_t> parse_grid_flag(std::string_view text);

struct Overrides {
  std::optional<double> epsilon;
  std::optional<std::pair<std::size_t, std::size_t>> grid;
  std::optional<std::size_t> max_iter;
};

/// Preset (if any) first, then the config file keys, then command-line flags.
RunConfig resolve_config(const std::optional<std::string>& preset_spec,
                         const std::optional<std::filesystem::path>& config_path, const Overrides& flags);

InterpolationProblem build_interpolation_problem(const RunConfig& config);
ParkingProblem build_parking_problem(const RunConfig& config);

/// Solves and writes the output directory. Returns the exit status; errors
/// are reported on `err`. Nothing is written when the input is invalid.
int run(Subcommand sub, const RunConfig& config, const std::filesystem::path& out, std::ostream& err);

struct CompareTolerances {
  std::optional<double> value_gap;
  std::optional<double> pivot_tv;
};

struct ComparisonReport {
  double value_a = 0.0;
  double value_b = 0.0;
  double value_gap = 0.0;
  double pivot_tv = 0.0;
  /// (epsilon, stage value of A minus value of B), when A recorded stages.
  std::vector<std::pair<double, double>> stage_gaps;
  bool stage_gaps_decreasing = true;
  bool pass = true;
};

/// Throws InputError when the runs are missing files or use different grids.
ComparisonReport compare_runs(const std::filesystem::path& a, const std::filesystem::path& b,
                              const CompareTolerances& tol);
int compare(const std::filesystem::path& a, const std::filesystem::path& b, const CompareTolerances& tol,
            const std::optional<std::filesystem::path>& out, std::ostream& report, std::ostream& err);

std::string sha256_hex(std::string_view data);

/// ASCII PGM of a grid measure's density, top row = largest y. Returns the
/// density that maps to 255.
double write_pgm(std::ostream& os, const DiscreteMeasure& grid_measure);

}  // namespace interpark::cli
