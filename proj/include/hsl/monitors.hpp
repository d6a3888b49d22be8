#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hsl/grid.hpp"
#include "hsl/model.hpp"
#include "hsl/solver.hpp"

namespace hsl {

/// w = laplacian(p) + G(p, c), p with Dirichlet-zero data.
Field ab_field(const State& state, const Reactions& reactions);

/// Left-endpoint time weights t_{k+1} - t_k (last snapshot weight 0).
std::vector<double> time_weights(const Trajectory& trajectory);

/// int int |min(0, w)|^3.
double ab_negative_l3(const Trajectory& trajectory, const Reactions& reactions);
/// int int |laplacian p|.
double laplacian_l1(const Trajectory& trajectory);
/// int int |grad p|^4.
double grad_p_l4(const Trajectory& trajectory);

struct Dissipation {
  double pressure_defect = 0.0;  ///< (gamma - 1) int int p |laplacian p + G|^2
  double hessian = 0.0;          ///< int int p sum_ij (d_ij p)^2
};
Dissipation dissipation(const Trajectory& trajectory, const Reactions& reactions);

struct Complementarity {
  double lhs = 0.0;
  double rhs = 0.0;
  double lhs_bound = 0.0;  ///< (1/gamma)(|p|_L1 sup|d_t zeta| + |grad p|_L2^2 sup zeta)
  double defect() const { return std::abs(lhs - rhs); }
  bool lhs_within_bound() const { return std::abs(lhs) <= lhs_bound * (1.0 + 1e-12); }
};

/// Both sides of the weak identity
///   -(1/gamma) int int (p d_t zeta + |grad p|^2 zeta)
///     = int int (-|grad p|^2 zeta - p grad p . grad zeta + p G zeta).
/// Throws std::invalid_argument unless zeta is supported strictly inside the
/// box and the time interval.
Complementarity complementarity_residual(const Trajectory& trajectory, const TestFunction& zeta,
                                         const Reactions& reactions);

/// max over cells of p (1 - n).
double graph_residual(const State& state);

/// int (|grad p|^2 / 2 - Gbar(p, c)), Gbar the primitive of G in p.
double energy(const State& state, const Reactions& reactions);

/// Phi(x) = exp(-sqrt(1 + |x|^2)) with analytic gradient norm and Laplacian.
class WeightFunction {
 public:
  explicit WeightFunction(const Grid& grid);

  const Field& values() const { return phi_; }
  const Field& gradient_norm() const { return grad_norm_; }
  const Field& laplacian() const { return laplacian_; }

  /// max |grad Phi| / Phi over the grid (<= 1).
  double gradient_ratio() const { return gradient_ratio_; }
  /// max |laplacian Phi| / Phi over the grid.
  double laplacian_constant() const { return laplacian_constant_; }

  /// Throws std::domain_error naming the worst cell if |grad Phi| > Phi
  /// anywhere or the Laplacian ratio is not finite.
  void check() const;

 private:
  Field phi_;
  Field grad_norm_;
  Field laplacian_;
  double gradient_ratio_ = 0.0;
  double laplacian_constant_ = 0.0;
  Eigen::Index worst_gradient_cell_ = 0;
};

/// int int |min(0, w)|^3 Phi.
double weighted_ab_l3(const Trajectory& trajectory, const WeightFunction& phi, const Reactions& reactions);

/// Per-snapshot scalars; accumulators are running values over [0, t].
struct SnapshotRow {
  double t = 0.0;
  double n_linf = 0.0, n_l1 = 0.0, n_l2 = 0.0;
  double p_linf = 0.0, p_l1 = 0.0, p_l2 = 0.0;
  double p_l1_bound = 0.0;  ///< p_H^((gamma - 1) / gamma) |n|_1
  double c_dev_linf = 0.0, c_dev_l1 = 0.0, c_dev_l2 = 0.0;
  double grad_c_l2 = 0.0;
  double grad_p_l2 = 0.0;
  double energy = 0.0;
  double graph_residual = 0.0;
};

struct Accumulators {
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
  double dt_c_l2_sq = 0.0;
  double dt_n_l1 = 0.0;
  double dt_p_l1 = 0.0;
};

struct MonitorOptions {
  std::optional<TestFunction> zeta;
  bool aronson_benilan = true;  ///< requires gamma > max(1, 2 - 4/d)
};

struct MonitorReport {
  std::vector<SnapshotRow> rows;
  std::vector<Accumulators> running;  ///< accumulators over [0, t_k], one per row
  Accumulators totals;
  std::optional<Complementarity> complementarity;
  double weight_gradient_ratio = 0.0;
  double weight_laplacian_constant = 0.0;
  double max_graph_residual = 0.0;

  /// (1/4) int int |grad c|^4 <= (9/2) c_B^2 int int |laplacian c|^2
  bool nutrient_inequality(double c_B) const;
  /// |p|_1 <= p_H^((gamma - 1) / gamma) |n|_1 on every row.
  bool pressure_l1_bound() const;
};

MonitorReport direct_estimates(const Trajectory& trajectory, const Reactions& reactions,
                               const MonitorOptions& options = {});

/// Column names matching monitor_csv_row.
std::vector<std::string> monitor_csv_header();
std::vector<double> monitor_csv_row(const SnapshotRow& row, const Accumulators& running);

}  // namespace hsl
