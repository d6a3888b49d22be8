#include "hsl/monitors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace hsl {

namespace {

const Boundary kZero = Boundary::dirichlet(0.0);

double negative_part(double v) { return v < 0.0 ? -v : 0.0; }

// Spatial integrals of one snapshot.
struct Slice {
  double ab_negative_l3 = 0.0;
  double weighted_ab_l3 = 0.0;
  double laplacian_l1 = 0.0;
  double grad_p_l4 = 0.0;
  double grad_p_l2_sq = 0.0;
  double p_l1 = 0.0;
  double pressure_defect = 0.0;
  double hessian = 0.0;
  double grad_c_l4 = 0.0;
  double laplacian_c_l2_sq = 0.0;
};

Slice evaluate_slice(const State& s, const Reactions& reactions, const WeightFunction* phi) {
  const Grid& g = s.p.grid();
  const double vol = g.cell_volume();
  const double gamma = reactions.params().gamma;
  const Boundary nutrient_bc = Boundary::dirichlet(reactions.params().c_B);

  Field lap_p = laplacian(s.p, kZero);
  auto grad_p = gradient(s.p, kZero);
  auto grad_c = gradient(s.c, nutrient_bc);
  Field lap_c = laplacian(s.c, nutrient_bc);

  Slice out;
  for (Eigen::Index k = 0; k < g.size(); ++k) {
    const double w = lap_p[k] + reactions.growth(s.p[k], s.c[k]);
    const double wm3 = std::pow(negative_part(w), 3);
    double gp2 = 0.0;
    double gc2 = 0.0;
    for (int axis = 0; axis < g.dimension; ++axis) {
      gp2 += grad_p[axis][k] * grad_p[axis][k];
      gc2 += grad_c[axis][k] * grad_c[axis][k];
    }
    out.ab_negative_l3 += wm3;
    if (phi) out.weighted_ab_l3 += wm3 * phi->values()[k];
    out.laplacian_l1 += std::abs(lap_p[k]);
    out.grad_p_l4 += gp2 * gp2;
    out.grad_p_l2_sq += gp2;
    out.p_l1 += std::abs(s.p[k]);
    out.pressure_defect += (gamma - 1.0) * s.p[k] * w * w;
    out.grad_c_l4 += gc2 * gc2;
    out.laplacian_c_l2_sq += lap_c[k] * lap_c[k];
  }

  // sum_ij (d_ij p)^2: centred second differences on the diagonal, successive
  // centred first differences off it.
  std::vector<Field> second;
  for (int axis = 0; axis < g.dimension; ++axis) {
    Field d2(g);
    for (Eigen::Index k = 0; k < g.size(); ++k) {
      d2[k] = (detail::neighbour(s.p, k, axis, +1, kZero) + detail::neighbour(s.p, k, axis, -1, kZero) - 2.0 * s.p[k]) /
              (g.spacing() * g.spacing());
    }
    second.push_back(std::move(d2));
  }
  Field mixed(g);
  if (g.dimension == 2) mixed = partial(grad_p[0], 1, kZero);
  for (Eigen::Index k = 0; k < g.size(); ++k) {
    double sum = 0.0;
    for (const auto& d2 : second) sum += d2[k] * d2[k];
    if (g.dimension == 2) sum += 2.0 * mixed[k] * mixed[k];
    out.hessian += s.p[k] * sum;
  }

  out.ab_negative_l3 *= vol;
  out.weighted_ab_l3 *= vol;
  out.laplacian_l1 *= vol;
  out.grad_p_l4 *= vol;
  out.grad_p_l2_sq *= vol;
  out.p_l1 *= vol;
  out.pressure_defect *= vol;
  out.hessian *= vol;
  out.grad_c_l4 *= vol;
  out.laplacian_c_l2_sq *= vol;
  return out;
}

void require_ab(const Trajectory& trajectory) {
  const double threshold = ab_gamma_threshold(trajectory.grid.dimension);
  if (!(trajectory.params.gamma > threshold)) {
    std::ostringstream msg;
    msg << "Aronson-Benilan monitors require gamma > " << threshold << " in dimension " << trajectory.grid.dimension;
    throw std::invalid_argument(msg.str());
  }
}

template <typename F>
double accumulate(const Trajectory& trajectory, F&& per_slice) {
  auto weights = time_weights(trajectory);
  double acc = 0.0;
  for (std::size_t k = 0; k < trajectory.snapshots.size(); ++k) {
    if (weights[k] > 0.0) acc += weights[k] * per_slice(trajectory.snapshots[k]);
  }
  return acc;
}

}  // namespace

Field ab_field(const State& state, const Reactions& reactions) {
  Field w = laplacian(state.p, kZero);
  for (Eigen::Index k = 0; k < w.size(); ++k) w[k] += reactions.growth(state.p[k], state.c[k]);
  return w;
}

std::vector<double> time_weights(const Trajectory& trajectory) {
  const auto& s = trajectory.snapshots;
  std::vector<double> w(s.size(), 0.0);
  for (std::size_t k = 0; k + 1 < s.size(); ++k) w[k] = s[k + 1].t - s[k].t;
  return w;
}

double ab_negative_l3(const Trajectory& trajectory, const Reactions& reactions) {
  require_ab(trajectory);
  return accumulate(trajectory, [&](const State& s) {
    Field w = ab_field(s, reactions);
    return w.values().unaryExpr([](double v) { return std::pow(negative_part(v), 3); }).sum() * s.p.grid().cell_volume();
  });
}

double laplacian_l1(const Trajectory& trajectory) {
  return accumulate(trajectory, [&](const State& s) { return integral(Field(s.p.grid(), laplacian(s.p, kZero).values().abs())); });
}

double grad_p_l4(const Trajectory& trajectory) {
  return accumulate(trajectory, [&](const State& s) {
    Field g2 = grad_norm_sq(s.p, kZero);
    return integral(Field(g2.grid(), g2.values().square()));
  });
}

Dissipation dissipation(const Trajectory& trajectory, const Reactions& reactions) {
  Dissipation d;
  auto weights = time_weights(trajectory);
  for (std::size_t k = 0; k < trajectory.snapshots.size(); ++k) {
    if (weights[k] <= 0.0) continue;
    Slice s = evaluate_slice(trajectory.snapshots[k], reactions, nullptr);
    d.pressure_defect += weights[k] * s.pressure_defect;
    d.hessian += weights[k] * s.hessian;
  }
  return d;
}

Complementarity complementarity_residual(const Trajectory& trajectory, const TestFunction& zeta,
                                         const Reactions& reactions) {
  if (!zeta.supported_inside(trajectory.grid, trajectory.final_time())) {
    throw std::invalid_argument("complementarity test function must be supported strictly inside the box and (0, T)");
  }
  const double gamma = trajectory.params.gamma;
  const Grid& g = trajectory.grid;
  const double vol = g.cell_volume();
  auto weights = time_weights(trajectory);

  Complementarity out;
  double p_l1 = 0.0;
  double grad_l2_sq = 0.0;
  for (std::size_t k = 0; k < trajectory.snapshots.size(); ++k) {
    if (weights[k] <= 0.0) continue;
    const State& s = trajectory.snapshots[k];
    auto grad_p = gradient(s.p, kZero);
    double lhs = 0.0;
    double rhs = 0.0;
    double pk = 0.0;
    double gk = 0.0;
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      auto x = g.position(i);
      const double p = s.p[i];
      double gp2 = 0.0;
      double p_dot_zeta = 0.0;
      auto dz = zeta.gradient(x[0], x[1], s.t);
      for (int axis = 0; axis < g.dimension; ++axis) {
        gp2 += grad_p[axis][i] * grad_p[axis][i];
        p_dot_zeta += grad_p[axis][i] * dz[axis];
      }
      pk += std::abs(p);
      gk += gp2;
      const double z = zeta.value(x[0], x[1], s.t);
      if (z == 0.0 && dz[0] == 0.0 && dz[1] == 0.0) continue;
      lhs += p * zeta.time_derivative(x[0], x[1], s.t) + gp2 * z;
      rhs += -gp2 * z - p * p_dot_zeta + p * reactions.growth(p, s.c[i]) * z;
    }
    out.lhs += weights[k] * (-lhs / gamma) * vol;
    out.rhs += weights[k] * rhs * vol;
    p_l1 += weights[k] * pk * vol;
    grad_l2_sq += weights[k] * gk * vol;
  }
  out.lhs_bound = (p_l1 * zeta.sup_time_derivative() + grad_l2_sq * zeta.sup()) / gamma;
  return out;
}

double graph_residual(const State& state) {
  return (state.p.values() * (1.0 - state.n.values())).maxCoeff();
}

double energy(const State& state, const Reactions& reactions) {
  Field g2 = grad_norm_sq(state.p, kZero);
  double acc = 0.0;
  for (Eigen::Index k = 0; k < g2.size(); ++k) {
    acc += 0.5 * g2[k] - reactions.growth_primitive(state.p[k], state.c[k]);
  }
  return acc * state.p.grid().cell_volume();
}

WeightFunction::WeightFunction(const Grid& grid) : phi_(grid), grad_norm_(grid), laplacian_(grid) {
  const int d = grid.dimension;
  for (Eigen::Index k = 0; k < grid.size(); ++k) {
    const double r = grid.radius(k);
    const double rho = std::sqrt(1.0 + r * r);
    const double phi = std::exp(-rho);
    phi_[k] = phi;
    grad_norm_[k] = phi * r / rho;
    // Laplacian of exp(-rho) = Phi (|grad rho|^2 - laplacian rho)
    laplacian_[k] = phi * (r * r / (rho * rho) - (d / rho - r * r / (rho * rho * rho)));
    const double gradient_ratio = r / rho;
    if (gradient_ratio > gradient_ratio_) {
      gradient_ratio_ = gradient_ratio;
      worst_gradient_cell_ = k;
    }
    laplacian_constant_ = std::max(laplacian_constant_, std::abs(laplacian_[k]) / phi);
  }
}

void WeightFunction::check() const {
  if (!(gradient_ratio_ <= 1.0) || !std::isfinite(laplacian_constant_)) {
    std::ostringstream msg;
    msg << "weight function violates |grad Phi| <= Phi at cell " << worst_gradient_cell_ << " (ratio "
        << gradient_ratio_ << ")";
    throw std::domain_error(msg.str());
  }
}

double weighted_ab_l3(const Trajectory& trajectory, const WeightFunction& phi, const Reactions& reactions) {
  require_ab(trajectory);
  phi.check();
  if (!(phi.values().grid() == trajectory.grid)) throw std::invalid_argument("weight function grid differs from trajectory grid");
  return accumulate(trajectory, [&](const State& s) {
    Field w = ab_field(s, reactions);
    double acc = 0.0;
    for (Eigen::Index k = 0; k < w.size(); ++k) acc += std::pow(negative_part(w[k]), 3) * phi.values()[k];
    return acc * s.p.grid().cell_volume();
  });
}

bool MonitorReport::nutrient_inequality(double c_B) const {
  return 0.25 * totals.grad_c_l4 <= 4.5 * c_B * c_B * totals.laplacian_c_l2_sq;
}

bool MonitorReport::pressure_l1_bound() const {
  return std::all_of(rows.begin(), rows.end(), [](const SnapshotRow& r) { return r.p_l1 <= r.p_l1_bound * (1.0 + 1e-12); });
}

MonitorReport direct_estimates(const Trajectory& trajectory, const Reactions& reactions, const MonitorOptions& options) {
  if (options.aronson_benilan) require_ab(trajectory);
  const Grid& g = trajectory.grid;
  const double vol = g.cell_volume();
  const ModelParams& params = trajectory.params;
  const double c_B = params.c_B;
  const Boundary nutrient_bc = Boundary::dirichlet(c_B);
  const double p_l1_factor = std::pow(params.p_H, (params.gamma - 1.0) / params.gamma);

  WeightFunction phi(g);
  phi.check();

  MonitorReport report;
  report.weight_gradient_ratio = phi.gradient_ratio();
  report.weight_laplacian_constant = phi.laplacian_constant();

  auto weights = time_weights(trajectory);
  Accumulators acc;
  const auto& snaps = trajectory.snapshots;
  for (std::size_t k = 0; k < snaps.size(); ++k) {
    const State& s = snaps[k];
    SnapshotRow row;
    row.t = s.t;
    row.n_linf = s.n.values().abs().maxCoeff();
    row.n_l1 = s.n.values().abs().sum() * vol;
    row.n_l2 = std::sqrt(s.n.values().square().sum() * vol);
    row.p_linf = s.p.values().abs().maxCoeff();
    row.p_l1 = s.p.values().abs().sum() * vol;
    row.p_l2 = std::sqrt(s.p.values().square().sum() * vol);
    row.p_l1_bound = p_l1_factor * row.n_l1;
    Eigen::ArrayXd dev = s.c.values() - c_B;
    row.c_dev_linf = dev.abs().maxCoeff();
    row.c_dev_l1 = dev.abs().sum() * vol;
    row.c_dev_l2 = std::sqrt(dev.square().sum() * vol);
    row.grad_c_l2 = std::sqrt(integral(grad_norm_sq(s.c, nutrient_bc)));
    row.grad_p_l2 = std::sqrt(integral(grad_norm_sq(s.p, kZero)));
    row.energy = energy(s, reactions);
    row.graph_residual = graph_residual(s);
    report.max_graph_residual = std::max(report.max_graph_residual, row.graph_residual);
    report.rows.push_back(row);
    report.running.push_back(acc);

    const double w = weights[k];
    if (w <= 0.0) continue;
    Slice sl = evaluate_slice(s, reactions, &phi);
    acc.ab_negative_l3 += w * sl.ab_negative_l3;
    acc.weighted_ab_l3 += w * sl.weighted_ab_l3;
    acc.laplacian_l1 += w * sl.laplacian_l1;
    acc.grad_p_l4 += w * sl.grad_p_l4;
    acc.grad_p_l2_sq += w * sl.grad_p_l2_sq;
    acc.p_l1 += w * sl.p_l1;
    acc.pressure_defect += w * sl.pressure_defect;
    acc.hessian += w * sl.hessian;
    acc.grad_c_l4 += w * sl.grad_c_l4;
    acc.laplacian_c_l2_sq += w * sl.laplacian_c_l2_sq;

    const State& next = snaps[k + 1];
    acc.dt_n_l1 += (next.n.values() - s.n.values()).abs().sum() * vol;
    acc.dt_p_l1 += (next.p.values() - s.p.values()).abs().sum() * vol;
    acc.dt_c_l2_sq += (next.c.values() - s.c.values()).square().sum() * vol / w;
  }
  // running[k] holds the values over [0, t_k]
  report.totals = acc;
  if (options.zeta) report.complementarity = complementarity_residual(trajectory, *options.zeta, reactions);
  return report;
}

std::vector<std::string> monitor_csv_header() {
  return {"t",           "n_linf",         "n_l1",          "n_l2",           "p_linf",
          "p_l1",        "p_l1_bound",     "p_l2",          "c_dev_linf",     "c_dev_l1",
          "c_dev_l2",    "grad_c_l2",      "grad_p_l2",     "energy",         "graph_residual",
          "ab_negative_l3", "weighted_ab_l3", "laplacian_l1", "grad_p_l4",     "grad_p_l2_sq",
          "p_l1_spacetime", "pressure_defect", "hessian",     "grad_c_l4",      "laplacian_c_l2_sq",
          "dt_c_l2_sq",  "dt_n_l1",        "dt_p_l1"};
}

std::vector<double> monitor_csv_row(const SnapshotRow& r, const Accumulators& a) {
  return {r.t,          r.n_linf,         r.n_l1,          r.n_l2,           r.p_linf,
          r.p_l1,       r.p_l1_bound,     r.p_l2,          r.c_dev_linf,     r.c_dev_l1,
          r.c_dev_l2,   r.grad_c_l2,      r.grad_p_l2,     r.energy,         r.graph_residual,
          a.ab_negative_l3, a.weighted_ab_l3, a.laplacian_l1, a.grad_p_l4,    a.grad_p_l2_sq,
          a.p_l1,       a.pressure_defect, a.hessian,      a.grad_c_l4,      a.laplacian_c_l2_sq,
          a.dt_c_l2_sq, a.dt_n_l1,        a.dt_p_l1};
}

}  // namespace hsl
