#pragma once

#include <filesystem>
#include <limits>
#include <memory>
#include <stdexcept>
#include <vector>

#include <Eigen/SparseCore>

#include "hsl/analytic.hpp"
#include "hsl/grid.hpp"
#include "hsl/model.hpp"

namespace hsl {

/// Snapshot of the coupled system at time t; p = n^gamma.
struct State {
  double t = 0.0;
  Field n;
  Field p;
  Field c;
};

/// Time-ordered snapshots plus the full step-size record of one run.
struct Trajectory {
  ModelParams params;
  Grid grid;
  std::vector<State> snapshots;
  std::vector<double> steps;
  double clipped_mass = 0.0;
  double initial_mass = 0.0;
  int max_cg_iterations = 0;

  double final_time() const { return snapshots.empty() ? 0.0 : snapshots.back().t; }
};

class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what, std::shared_ptr<const Trajectory> partial = nullptr)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const std::shared_ptr<const Trajectory>& partial() const { return partial_; }

 private:
  std::shared_ptr<const Trajectory> partial_;
};

enum class DensityBuilder { plateau, pressure_plateau, barenblatt, file };
enum class NutrientProfile { uniform, deficit };

struct InitialData {
  DensityBuilder builder = DensityBuilder::plateau;
  // plateau: n0 = theta n_H on |x| <= radius, smooth edge of the given width
  // pressure_plateau: p0 = theta p_H with the same edge, n0 = p0^(1/gamma)
  double theta = 0.8;
  double radius = 0.4;
  double edge_width = 0.1;
  // barenblatt: front radius at t = 0 and source-time offset
  double barenblatt_front = 0.5;
  double barenblatt_t0 = 0.1;
  // file: field bundle manifest holding "n" (and optionally "c")
  std::filesystem::path file;

  NutrientProfile nutrient = NutrientProfile::uniform;
  double deficit_amplitude = 0.5;  ///< c0 = c_B (1 - amplitude * bump(|x| / deficit_radius))
  double deficit_radius = 0.5;
};

/// Barenblatt profile matching the barenblatt builder for this gamma.
BarenblattParams initial_barenblatt(const InitialData& data, double gamma, int dimension);

State build_initial_state(const InitialData& data, const Grid& grid, const ModelParams& params);

/// Discrete norms that the initial data must keep bounded.
struct InitialReport {
  double mass = 0.0;
  double grad_p_l2 = 0.0;
  double laplacian_p_l2 = 0.0;
  double grad_c_l2 = 0.0;
  double support_radius = 0.0;
};
InitialReport describe_initial(const State& state, double c_B, double threshold = 1e-12);

struct RunSettings {
  double final_time = 1.0;
  double snapshot_interval = 1e-2;
  double cfl_safety = 0.4;
  double max_step = std::numeric_limits<double>::infinity();
  int cg_max_iterations = 500;
  double cg_tolerance = 1e-10;
  double support_threshold = 1e-12;
  double clip_tolerance = 1e-10;
  double bound_tolerance = 1e-8;
};

/// Stable step: safety h^2 / (2 d gamma max p), capped by safety / max|G|.
/// Returns +inf when neither constraint is active.
double cfl_dt(const State& state, const Reactions& reactions, double safety);

struct DensityUpdate {
  Field n;
  double clipped_mass = 0.0;
};

/// Conservative explicit update of dn/dt = div(n grad p) + n G(p, c) with
/// arithmetic-mean face mobility, followed by clipping to [0, n_H].
DensityUpdate step_density(const State& state, double dt, const Reactions& reactions, double clip_tolerance = 1e-10);

/// Backward-Euler diffusion / explicit reaction update of the nutrient with
/// Dirichlet c_B on the box. Keeps the assembled operator between steps.
class NutrientStepper {
 public:
  NutrientStepper(const Grid& grid, double c_B, int max_iterations = 500, double tolerance = 1e-10);

  Field step(const State& state, double dt, const Reactions& reactions);
  int last_iterations() const { return last_iterations_; }
  double last_residual() const { return last_residual_; }

 private:
  Grid grid_;
  double c_B_;
  int max_iterations_;
  double tolerance_;
  Eigen::SparseMatrix<double> system_;
  Eigen::ArrayXd laplace_values_;
  Eigen::ArrayXd identity_values_;
  Eigen::VectorXd boundary_source_;
  int last_iterations_ = 0;
  double last_residual_ = 0.0;
};

Field step_nutrient(const State& state, double dt, const Reactions& reactions);

/// Advances from `initial` to settings.final_time, recording snapshots at
/// every multiple of settings.snapshot_interval (and at the final time).
/// Throws SolverError carrying the partial trajectory on any step failure.
Trajectory run(const State& initial, const Reactions& reactions, const RunSettings& settings);

/// Cells with n > threshold.
std::vector<bool> support_mask(const Field& n, double threshold = 1e-12);

}  // namespace hsl
