#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hsl/analytic.hpp"
#include "hsl/grid.hpp"
#include "hsl/model.hpp"
#include "hsl/solver.hpp"

namespace hsl {

struct MonitorSettings {
  bool aronson_benilan = true;
  bool complementarity = true;
  std::array<double, 2> zeta_center{0.0, 0.0};
  double zeta_radius = 1.0;
  double zeta_start = 0.1;  ///< fractions of the final time
  double zeta_end = 0.9;

  TestFunction test_function(double final_time) const;
};

struct SweepSettings {
  std::vector<double> gammas;
  double reference_fraction = 0.5;    ///< Hele-Shaw comparison time as a fraction of T
  double positivity_threshold = 1e-3; ///< eps_O relative to p_H
  double saturation_tolerance = 1e-2; ///< {n >= 1 - tol} for the symmetric-difference report
};

struct FocusingSettings {
  double outer_radius = 1.0;
  double initial_fraction = 1e-2;  ///< R0 = initial_fraction * R1
  std::vector<double> alphas{2.0, 3.0, 3.5, 4.0, 4.5, 6.0};
  HoleOptions hole;
  CutoffSchedule cutoffs;
};

struct BarenblattStudy {
  std::vector<double> gammas{3.0, 5.0, 9.0};
  std::vector<int> cells{200, 400, 800};
  double half_width = 1.5;
  double front = 0.5;
  double t0 = 0.1;
  double final_time = 1.0;
  double cfl_safety = 0.4;
};

struct ExperimentConfig {
  ModelParams model;
  ReactionSpec reactions = ReactionSpec::standard(1.0, 0.1, 0.5, 0.2);
  Grid grid{1, 2.0, 400};
  InitialData initial;
  RunSettings run{.final_time = 1.0, .snapshot_interval = 2.5e-4};
  int field_stride = 100;  ///< every field_stride-th snapshot goes to the field bundle
  MonitorSettings monitors;
  SweepSettings sweep;
  FocusingSettings focusing;
  BarenblattStudy barenblatt;
  std::filesystem::path output_directory = "runs";
  std::uint64_t seed = 0;

  /// Canonical `key = value` text with every key, used for echo files and hashing.
  std::string echo() const;
  /// 16 hex digits of the FNV-1a hash of echo().
  std::string hash() const;
  /// Copy with a different gamma.
  ExperimentConfig with_gamma(double gamma) const;
  /// Largest gamma this config will run (base gamma and sweep list).
  double max_gamma() const;
};

struct ConfigIssue {
  int line = 0;  ///< 0 for environment overrides and whole-config checks
  std::string key;
  std::string message;
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string source, std::vector<ConfigIssue> issues);
  const std::vector<ConfigIssue>& issues() const { return issues_; }

 private:
  std::vector<ConfigIssue> issues_;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

/// Reads HSL_<SECTION>_<KEY> from the process environment.
std::optional<std::string> process_environment(const std::string& name);

ExperimentConfig parse_config_text(std::string_view text, const std::string& source = "<text>",
                                   const EnvLookup& env = process_environment);
ExperimentConfig parse_config(const std::filesystem::path& path, const EnvLookup& env = process_environment);

/// Invariant checks that need no simulation. Throws ConfigError.
void validate_config(const ExperimentConfig& config, const std::string& source = "<config>");

/// safety h^2 / (2 d gamma p_H): step estimate at the homeostatic pressure.
double cfl_estimate(const ExperimentConfig& config, double gamma);

/// All `section.key` names accepted by the parser.
std::vector<std::string> config_keys();

}  // namespace hsl
