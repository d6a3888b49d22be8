#include "hsl/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/IterativeLinearSolvers>

#include "hsl/field_io.hpp"

namespace hsl {

BarenblattParams initial_barenblatt(const InitialData& data, double gamma, int dimension) {
  auto b = BarenblattParams::for_pressure_law(gamma, dimension, 1.0, data.barenblatt_t0);
  // front radius sqrt(C / k) tau0^(alpha / d) = barenblatt_front
  const double tau0 = b.tau(0.0);
  b.C = b.k() * data.barenblatt_front * data.barenblatt_front * std::pow(tau0, -2.0 * b.alpha() / dimension);
  b.check();
  return b;
}

State build_initial_state(const InitialData& data, const Grid& grid, const ModelParams& params) {
  State s;
  s.t = 0.0;
  const double n_H = params.n_H();
  switch (data.builder) {
    case DensityBuilder::plateau: {
      if (!(data.theta > 0.0 && data.theta <= 1.0)) throw std::invalid_argument("plateau theta must lie in (0, 1]");
      if (!(data.radius > 0.0) || !(data.edge_width > 0.0)) {
        throw std::invalid_argument("plateau radius and edge width must be positive");
      }
      s.n = Field::sample(grid, [&](double x, double y) {
        return data.theta * n_H * smooth_step_down((std::hypot(x, y) - data.radius) / data.edge_width);
      });
      break;
    }
    case DensityBuilder::pressure_plateau: {
      if (!(data.theta > 0.0 && data.theta <= 1.0)) throw std::invalid_argument("plateau theta must lie in (0, 1]");
      if (!(data.radius > 0.0) || !(data.edge_width > 0.0)) {
        throw std::invalid_argument("plateau radius and edge width must be positive");
      }
      Field p0 = Field::sample(grid, [&](double x, double y) {
        return data.theta * params.p_H * smooth_step_down((std::hypot(x, y) - data.radius) / data.edge_width);
      });
      s.n = density_from_pressure(p0, params.gamma);
      break;
    }
    case DensityBuilder::barenblatt: {
      auto b = initial_barenblatt(data, params.gamma, grid.dimension);
      s.n = barenblatt_cell_averages(grid, 0.0, b);
      break;
    }
    case DensityBuilder::file: {
      auto fields = read_field_bundle(data.file);
      bool have_n = false;
      for (auto& f : fields) {
        if (!(f.field.grid() == grid)) throw std::invalid_argument("initial-data file grid does not match the configured grid");
        if (f.name == "n") {
          s.n = f.field;
          have_n = true;
        } else if (f.name == "c") {
          s.c = f.field;
        }
      }
      if (!have_n) throw std::invalid_argument("initial-data file has no field named 'n'");
      break;
    }
  }

  if (s.c.size() == 0) {
    if (data.nutrient == NutrientProfile::uniform) {
      s.c = Field(grid, params.c_B);
    } else {
      if (!(data.deficit_amplitude >= 0.0 && data.deficit_amplitude <= 1.0)) {
        throw std::invalid_argument("nutrient deficit amplitude must lie in [0, 1]");
      }
      s.c = Field::sample(grid, [&](double x, double y) {
        return params.c_B * (1.0 - data.deficit_amplitude * std::exp(1.0) * mollifier(std::hypot(x, y) / data.deficit_radius));
      });
    }
  }

  for (Eigen::Index k = 0; k < grid.size(); ++k) {
    if (!(s.n[k] >= 0.0 && s.n[k] <= n_H * (1.0 + 1e-12))) {
      throw std::invalid_argument("initial density outside [0, n_H] at cell " + std::to_string(k));
    }
    if (!(s.c[k] >= 0.0 && s.c[k] <= params.c_B * (1.0 + 1e-12))) {
      throw std::invalid_argument("initial nutrient outside [0, c_B] at cell " + std::to_string(k));
    }
  }
  s.p = pressure_from_density(s.n, params.gamma);
  return s;
}

InitialReport describe_initial(const State& s, double c_B, double threshold) {
  InitialReport r;
  const auto zero = Boundary::dirichlet(0.0);
  r.mass = integral(s.n);
  r.grad_p_l2 = std::sqrt(integral(grad_norm_sq(s.p, zero)));
  Field lap = laplacian(s.p, zero);
  r.laplacian_p_l2 = std::sqrt(integral(Field(lap.grid(), lap.values().square())));
  r.grad_c_l2 = std::sqrt(integral(grad_norm_sq(s.c, Boundary::dirichlet(c_B))));
  for (Eigen::Index k = 0; k < s.n.size(); ++k) {
    if (s.n[k] > threshold) r.support_radius = std::max(r.support_radius, s.n.grid().radius(k));
  }
  return r;
}

double cfl_dt(const State& state, const Reactions& reactions, double safety) {
  if (!(safety > 0.0 && safety <= 1.0)) throw std::invalid_argument("cfl_dt: safety must lie in (0, 1]");
  const Grid& g = state.n.grid();
  double max_p = 0.0;
  double max_g = 0.0;
  for (Eigen::Index k = 0; k < g.size(); ++k) {
    if (!std::isfinite(state.n[k]) || !std::isfinite(state.p[k]) || !std::isfinite(state.c[k])) {
      std::ostringstream msg;
      msg << "cfl_dt: non-finite state at cell " << k << " (n=" << state.n[k] << ", p=" << state.p[k]
          << ", c=" << state.c[k] << ")";
      throw std::runtime_error(msg.str());
    }
    max_p = std::max(max_p, state.p[k]);
    max_g = std::max(max_g, std::abs(reactions.growth(state.p[k], state.c[k])));
  }
  const double gamma = reactions.params().gamma;
  double dt = std::numeric_limits<double>::infinity();
  if (max_p > 0.0) {
    const double h = g.spacing();
    dt = safety * h * h / (2.0 * g.dimension * gamma * max_p);
  }
  if (max_g > 0.0) dt = std::min(dt, safety / max_g);
  if (!(dt > 1e-300)) throw std::runtime_error("cfl_dt: step size underflow (pressure too large)");
  return dt;
}

DensityUpdate step_density(const State& state, double dt, const Reactions& reactions, double clip_tolerance) {
  const Grid& g = state.n.grid();
  const int N = g.cells;
  const double inv_h2 = 1.0 / (g.spacing() * g.spacing());
  const double n_H = reactions.params().n_H();
  const double* n = state.n.values().data();
  const double* p = state.p.values().data();
  const double* c = state.c.values().data();

  DensityUpdate out{Field(g), 0.0};
  double* next = out.n.values().data();

  // Face flux between cells a and b (b the upper neighbour); boundary faces
  // carry zero mobility because the face value of n is zero there.
  auto face = [&](Eigen::Index a, Eigen::Index b) { return 0.5 * (n[a] + n[b]) * (p[b] - p[a]); };

  const int rows = g.dimension == 1 ? 1 : N;
  for (int j = 0; j < rows; ++j) {
    for (int i = 0; i < N; ++i) {
      const Eigen::Index k = g.index(i, j);
      double div = 0.0;
      if (i + 1 < N) div += face(k, k + 1);
      if (i > 0) div -= face(k - 1, k);
      if (g.dimension == 2) {
        if (j + 1 < N) div += face(k, k + N);
        if (j > 0) div -= face(k - N, k);
      }
      double rate = div * inv_h2;
      if (n[k] != 0.0) rate += n[k] * reactions.growth(p[k], c[k]);
      next[k] = n[k] + dt * rate;
    }
  }

  for (Eigen::Index k = 0; k < g.size(); ++k) {
    if (!std::isfinite(next[k]) || next[k] < -clip_tolerance) {
      auto cell = g.cell(k);
      std::ostringstream msg;
      msg << "step_density: invalid density " << next[k] << " at cell (" << cell[0] << ", " << cell[1]
          << ") t=" << state.t << " dt=" << dt << " (n=" << n[k] << ", p=" << p[k] << ")";
      throw SolverError(msg.str());
    }
    double clipped = std::clamp(next[k], 0.0, n_H);
    out.clipped_mass += std::abs(next[k] - clipped);
    next[k] = clipped;
  }
  out.clipped_mass *= g.cell_volume();
  return out;
}

NutrientStepper::NutrientStepper(const Grid& grid, double c_B, int max_iterations, double tolerance)
    : grid_(grid), c_B_(c_B), max_iterations_(max_iterations), tolerance_(tolerance) {
  const int N = grid.cells;
  const double inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
  std::vector<Eigen::Triplet<double>> entries;
  boundary_source_ = Eigen::VectorXd::Zero(grid.size());
  for (Eigen::Index k = 0; k < grid.size(); ++k) {
    auto cell = grid.cell(k);
    double diag = 0.0;
    for (int axis = 0; axis < grid.dimension; ++axis) {
      for (int dir : {-1, 1}) {
        int m = cell[axis] + dir;
        if (m < 0 || m >= N) {
          // ghost = 2 c_B - c_k
          diag -= 2.0 * inv_h2;
          boundary_source_[k] += 2.0 * c_B * inv_h2;
        } else {
          Eigen::Index nb = axis == 0 ? grid.index(m, cell[1]) : grid.index(cell[0], m);
          entries.emplace_back(k, nb, inv_h2);
          diag -= inv_h2;
        }
      }
    }
    entries.emplace_back(k, k, diag);
  }
  system_.resize(grid.size(), grid.size());
  system_.setFromTriplets(entries.begin(), entries.end());
  system_.makeCompressed();

  laplace_values_ = Eigen::Map<const Eigen::ArrayXd>(system_.valuePtr(), system_.nonZeros());
  identity_values_ = Eigen::ArrayXd::Zero(system_.nonZeros());
  for (Eigen::Index col = 0; col < system_.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(system_, col); it; ++it) {
      if (it.row() == it.col()) identity_values_[&it.valueRef() - system_.valuePtr()] = 1.0;
    }
  }
}

Field NutrientStepper::step(const State& state, double dt, const Reactions& reactions) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_nutrient: dt must be positive");
  if (!(state.c.grid() == grid_)) throw std::invalid_argument("step_nutrient: state grid differs from stepper grid");

  // (I - dt L) c+ = c + dt (-n H(c) + (c_B - c) K(p)) + dt * boundary source
  Eigen::Map<Eigen::ArrayXd>(system_.valuePtr(), system_.nonZeros()) = identity_values_ - dt * laplace_values_;
  Eigen::VectorXd rhs(grid_.size());
  for (Eigen::Index k = 0; k < grid_.size(); ++k) {
    const double c = state.c[k];
    rhs[k] = c + dt * (-state.n[k] * reactions.consumption(c) + (c_B_ - c) * reactions.release(state.p[k]) +
                       boundary_source_[k]);
  }

  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
  cg.setTolerance(tolerance_);
  cg.setMaxIterations(max_iterations_);
  cg.compute(system_);
  Eigen::VectorXd solution = cg.solveWithGuess(rhs, state.c.values().matrix());
  last_iterations_ = int(cg.iterations());
  last_residual_ = cg.error();
  if (cg.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "step_nutrient: linear solver did not reach relative residual " << tolerance_ << " within "
        << max_iterations_ << " iterations (residual " << cg.error() << ")";
    throw SolverError(msg.str());
  }
  return Field(grid_, solution.array());
}

Field step_nutrient(const State& state, double dt, const Reactions& reactions) {
  NutrientStepper stepper(state.c.grid(), reactions.params().c_B);
  return stepper.step(state, dt, reactions);
}

std::vector<bool> support_mask(const Field& n, double threshold) {
  std::vector<bool> mask(std::size_t(n.size()));
  for (Eigen::Index k = 0; k < n.size(); ++k) mask[std::size_t(k)] = n[k] > threshold;
  return mask;
}

namespace {

void check_state(const State& s, const ModelParams& params, const RunSettings& settings) {
  const Grid& g = s.n.grid();
  for (Eigen::Index k = 0; k < g.size(); ++k) {
    const double c = s.c[k];
    if (!std::isfinite(c) || c < -settings.bound_tolerance || c > params.c_B + settings.bound_tolerance) {
      std::ostringstream msg;
      msg << "nutrient left [0, c_B] at cell " << k << " (c=" << c << ", t=" << s.t << ")";
      throw SolverError(msg.str());
    }
    if (g.on_boundary(k) && s.n[k] > settings.support_threshold) {
      std::ostringstream msg;
      msg << "density support reached the box boundary at cell " << k << " (t=" << s.t << "); enlarge the box";
      throw SolverError(msg.str());
    }
  }
}

}  // namespace

Trajectory run(const State& initial, const Reactions& reactions, const RunSettings& settings) {
  if (!(settings.final_time >= 0.0)) throw std::invalid_argument("run: final time must be >= 0");
  if (!(settings.snapshot_interval > 0.0)) throw std::invalid_argument("run: snapshot interval must be positive");
  const ModelParams& params = reactions.params();

  auto traj = std::make_shared<Trajectory>();
  traj->params = params;
  traj->grid = initial.n.grid();
  traj->initial_mass = integral(initial.n);
  traj->snapshots.push_back(initial);

  auto fail = [&](const std::string& what) -> SolverError {
    return SolverError(what, std::make_shared<const Trajectory>(*traj));
  };

  try {
    check_state(initial, params, settings);
  } catch (const SolverError& e) {
    throw fail(e.what());
  }

  const double T = settings.final_time;
  if (T == 0.0) return std::move(*traj);

  NutrientStepper nutrient(traj->grid, params.c_B, settings.cg_max_iterations, settings.cg_tolerance);
  State state = initial;
  long snapshot_index = 1;
  double next_snapshot = std::min(settings.snapshot_interval, T);

  while (state.t < T) {
    try {
      double dt = std::min(cfl_dt(state, reactions, settings.cfl_safety), settings.max_step);
      bool at_snapshot = false;
      if (state.t + dt >= next_snapshot - 1e-12 * settings.snapshot_interval) {
        dt = next_snapshot - state.t;
        at_snapshot = true;
      }
      DensityUpdate update = step_density(state, dt, reactions, settings.clip_tolerance);

      State next;
      next.t = at_snapshot ? next_snapshot : state.t + dt;
      next.n = std::move(update.n);
      next.p = pressure_from_density(next.n, params.gamma);
      next.c = state.c;
      // The nutrient sees the freshly updated density and pressure.
      next.c = nutrient.step(next, dt, reactions);
      traj->max_cg_iterations = std::max(traj->max_cg_iterations, nutrient.last_iterations());
      check_state(next, params, settings);

      traj->steps.push_back(dt);
      traj->clipped_mass += update.clipped_mass;
      state = std::move(next);
      if (at_snapshot) {
        traj->snapshots.push_back(state);
        ++snapshot_index;
        next_snapshot = std::min(double(snapshot_index) * settings.snapshot_interval, T);
      }
    } catch (const SolverError& e) {
      throw fail(e.what());
    } catch (const std::exception& e) {
      throw fail(e.what());
    }
  }
  return std::move(*traj);
}

}  // namespace hsl
