#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hsl/config.hpp"
#include "hsl/experiment.hpp"
#include "hsl/stats.hpp"

namespace hsl {

/// Cells with p > threshold plus the layer of outside cells adjacent to them.
struct PositivitySet {
  Grid grid;
  std::vector<bool> mask;
  std::vector<bool> boundary_layer;
  std::size_t count = 0;

  double measure() const { return double(count) * grid.cell_volume(); }
};

/// Throws std::domain_error if the set reaches the box boundary.
PositivitySet positivity_set(const Field& p, double threshold);

struct HeleShawOptions {
  double tolerance = 1e-8;  ///< relative sup-norm update
  int max_iterations = 500;
};

struct HeleShawResult {
  Field pressure;
  PositivitySet set;
  int iterations = 0;
  bool converged = false;
  std::vector<double> updates;  ///< relative sup-norm update per iteration
  double contraction = 0.0;     ///< max ratio of successive updates after the first iteration
  double residual_inf = 0.0;    ///< max |laplacian p + G(p, c)| over cells whose neighbours lie in O
};

class HeleShawError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Solves -laplacian p = G(p, c) on O = {p_num > eps_O}, p = 0 outside O, by
/// the shifted iteration (-laplacian + beta) p_{k+1} = G(p_k, c) + beta p_k.
/// Throws HeleShawError when the update grows three iterations in a row.
HeleShawResult heleshaw_reference(const Field& p_num, const Field& c_num, const Reactions& reactions, double eps_O,
                                  const HeleShawOptions& options = {});

/// L2 norm of a - b restricted to the set.
double l2_on_set(const Field& a, const Field& b, const PositivitySet& set);

/// Measure of the symmetric difference between the set and {n >= 1 - tolerance}.
double saturation_mismatch(const PositivitySet& set, const Field& n, double tolerance);

struct LimitComparison {
  double gamma_a = 0.0;
  double gamma_b = 0.0;
  double p_l1 = 0.0;       ///< |p_a - p_b| in L1(Q_T)
  double grad_p_l2 = 0.0;  ///< |grad p_a - grad p_b| in L2(Q_T)
  double c_l1 = 0.0;       ///< |c_a - c_b| in L1(Q_T)
};

/// Requires identical grids and snapshot times.
LimitComparison limit_compare(const Trajectory& a, const Trajectory& b);

struct ReferenceComparison {
  double gamma = 0.0;
  double time = 0.0;
  bool ok = false;
  std::string error;
  double error_l2 = 0.0;
  double set_measure = 0.0;
  double saturation_mismatch = 0.0;
  int iterations = 0;
  double contraction = 0.0;
  double residual_inf = 0.0;
};

ReferenceComparison compare_with_reference(const RunOutcome& outcome, const ExperimentConfig& config);

struct SweepEntry {
  double gamma = 0.0;
  bool ok = false;
  std::string error;
  std::shared_ptr<const RunOutcome> outcome;
};

struct SweepReport {
  std::vector<double> gammas;
  std::vector<SweepEntry> entries;
  bool fitted = false;  ///< fits need at least 3 successful runs
  DecayFit complementarity_fit;
  DecayFit graph_fit;
  std::vector<LimitComparison> comparisons;   ///< consecutive successful gammas
  std::vector<ReferenceComparison> references;

  std::vector<const SweepEntry*> successes() const;
  /// Extracts one scalar per successful run, in gamma order.
  std::vector<double> collect(const std::function<double(const RunOutcome&)>& f) const;
};

/// Runs every gamma (on `workers` threads), then fits, compares and builds
/// Hele-Shaw references after all runs have finished.
SweepReport gamma_sweep(const ExperimentConfig& base, std::span<const double> gammas, int workers = 1);

/// Band and trend limits for the uniform-in-gamma monitors.
struct UniformityCriteria {
  double max_band = 2.0;
  double significance = 0.05;  ///< one-sided Spearman level for a growth trend
};

/// Acceptance assertions over a sweep: every per-run check, uniform bounds
/// of the Aronson-Benilan and gradient accumulators, complementarity decay,
/// graph-residual decay exponent, and the Hele-Shaw reference comparison.
std::vector<Check> sweep_checks(const SweepReport& report, const UniformityCriteria& criteria = {});

/// Reported but not asserted: complementarity monotonicity with 10% slack,
/// decreasing Cauchy differences along consecutive gamma pairs.
std::vector<Check> sweep_observations(const SweepReport& report);

/// One run directory per successful gamma plus sweep.csv and sweep.json in root.
std::vector<std::filesystem::path> write_sweep_outputs(const SweepReport& report, const std::filesystem::path& root);

}  // namespace hsl
