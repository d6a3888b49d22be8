#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hsl/analytic.hpp"
#include "hsl/config.hpp"
#include "hsl/monitors.hpp"
#include "hsl/solver.hpp"

namespace hsl {

const char* version();

Reactions make_reactions(const ExperimentConfig& config);
Grid make_grid(const ExperimentConfig& config);
State initial_state(const ExperimentConfig& config);

/// The box must contain the support barrier ball at the final time (or,
/// without a barrier, the initial support). Throws ConfigError.
void check_containment(const ExperimentConfig& config, const State& initial);

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct RunOutcome {
  ExperimentConfig config;
  std::shared_ptr<const Trajectory> trajectory;
  MonitorReport monitors;
  InitialReport initial;
  std::optional<BarrierParams> barrier;
  std::vector<BarrierSnapshot> barrier_rows;
  double runtime_seconds = 0.0;

  bool barrier_passed() const;
};

/// Builds the initial state, checks containment, runs the solver and
/// evaluates every monitor.
RunOutcome execute_run(const ExperimentConfig& config);

/// Per-run hard assertions (bounds, clip accounting, L1 pressure bound,
/// nutrient inequality, complementarity lhs bound, graph bound, barrier,
/// weight-function bounds).
std::vector<Check> run_checks(const RunOutcome& outcome);

/// Writes config echo, version stamp, manifest, monitor CSV, JSON summary,
/// field bundle and final-state CSV into root/run-<hash>; returns the directory.
std::filesystem::path write_run_outputs(const RunOutcome& outcome, const std::filesystem::path& root);

/// Shortest round-trip text for a double.
std::string format_number(double v);
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

struct BarenblattCase {
  double gamma = 0.0;
  int cells = 0;
  double l1_error = 0.0;
  double runtime_seconds = 0.0;
};

struct BarenblattResult {
  double gamma = 0.0;
  std::vector<BarenblattCase> cases;
  std::vector<double> pairwise_orders;
  double fitted_order = 0.0;  ///< least-squares slope of log error against log h
  bool decreasing = false;
  double max_runtime = 0.0;

  bool passed(double min_order = 0.8, double max_seconds = 120.0) const;
};

/// Solver-versus-oracle refinement study with G = H = K = 0.
std::vector<BarenblattResult> barenblatt_convergence(const BarenblattStudy& study);
/// L1 distance between the density and the exact cell averages at state.t.
double barenblatt_l1_error(const State& state, const BarenblattParams& params);

struct FocusingStudy {
  FocusingTrace trace;
  std::vector<IntegrabilityResult> results;
  std::vector<double> law_ratios;
  double runtime_seconds = 0.0;

  /// Every ratio within [1 - tolerance, 1 + tolerance].
  bool law_within(double tolerance) const;
};

FocusingStudy run_focusing(const FocusingSettings& settings);
/// Verdict per alpha (convergent for alpha <= 4, divergent above), the
/// asymptotic law within 10%, and the runtime limit.
std::vector<Check> focusing_checks(const FocusingStudy& study, double max_seconds = 60.0);
/// trace.csv (t, R, a, b) and integrability.csv (alpha, epsilon, radius, value, verdict).
void write_focusing_outputs(const FocusingStudy& study, const std::filesystem::path& directory);

/// Collects summary.json files found below `root` into one CSV table.
/// Throws std::runtime_error when the summaries carry different versions.
std::size_t write_report(const std::filesystem::path& root, const std::filesystem::path& csv_path);

}  // namespace hsl
