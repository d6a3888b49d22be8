#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hsl/grid.hpp"

namespace hsl {

struct State;

// ---------------------------------------------------------------------------
// Barenblatt self-similar solutions of  u_t = kappa * Laplacian(u^m).
//
// With tau = kappa (t + t0),
//   u(x, t) = tau^(-alpha) (C - k |x|^2 tau^(-2 alpha / d))_+^(1 / (m - 1)),
//   alpha = d / (d (m - 1) + 2),   k = alpha (m - 1) / (2 m d).
// ---------------------------------------------------------------------------

struct BarenblattParams {
  double m = 2.0;
  int dimension = 1;
  double kappa = 1.0;
  double C = 1.0;
  double t0 = 1.0;

  double alpha() const;
  double k() const;
  double tau(double t) const { return kappa * (t + t0); }

  /// Profile of the density equation dn/dt = div(n grad n^gamma), i.e.
  /// m = gamma + 1 and kappa = gamma / (gamma + 1).
  static BarenblattParams for_pressure_law(double gamma, int dimension, double C, double t0);

  /// Same profile family with C chosen so that the total mass equals `mass`.
  BarenblattParams with_mass(double mass) const;

  void check() const;
};

double barenblatt_density(double r, double t, const BarenblattParams& params);
/// u^(m-1); for the pressure-law family this is p = n^gamma.
double barenblatt_pressure(double r, double t, const BarenblattParams& params);
double barenblatt_support_radius(double t, const BarenblattParams& params);
/// Closed-form total mass (independent of t).
double barenblatt_mass(const BarenblattParams& params);
/// Cell averages of the density at time t (Gauss-Legendre in the angle
/// variable x = R sin(theta), which absorbs the front singularity).
Field barenblatt_cell_averages(const Grid& grid, double t, const BarenblattParams& params);

// ---------------------------------------------------------------------------
// Support barrier Pi(x, t) = G(0, c_B) |S(t) - |x|^2 / 2|_+ with
// S(t) = S0 exp(2 G(0, c_B) t).
// ---------------------------------------------------------------------------

struct BarrierParams {
  double S0 = 0.5;
  double growth_rate = 1.0;  ///< G(0, c_B), must be positive

  double S(double t) const;
  double radius(double t) const;
  void check() const;
};

/// Smallest S0 for which Pi(., 0) dominates the initial pressure and covers
/// the initial support {n > threshold}: S0 = max(|x|^2 / 2 + p(x) / G(0, c_B)).
BarrierParams dominating_barrier(const Field& n, const Field& p, double growth_rate, double threshold = 1e-12);

struct BarrierSnapshot {
  double t = 0.0;
  double radius = 0.0;
  double support_radius = 0.0;
  std::vector<Eigen::Index> offending;
  bool passed() const { return offending.empty(); }
};

/// Per-snapshot check that every cell with n > threshold lies inside B_{radius(t)}.
std::vector<BarrierSnapshot> barrier_check(std::span<const State> snapshots, const BarrierParams& params,
                                           double threshold = 1e-12);

// ---------------------------------------------------------------------------
// Focusing (hole-filling) solution of the Hele-Shaw problem in the 2D
// annulus R(t) < r < R1:  -Laplacian p = 1,  p(R) = p(R1) = 0,
// dR/dt = -p'(R).
// ---------------------------------------------------------------------------

struct ShellCoefficients {
  double a = 0.0;
  double b = 0.0;
};

ShellCoefficients shell_coefficients(double R, double R1);
double shell_pressure(double r, double a, double b);
double shell_pressure_slope(double r, double a);
/// dR/dt = R/2 - a(R)/R < 0.
double hole_velocity(double R, double R1);
/// Exact time for the hole of radius R to close, int_0^R dr / |hole_velocity(r)|.
double closing_time(double R, double R1);

struct FocusingTrace {
  double R1 = 1.0;
  std::vector<double> t;
  std::vector<double> R;
  std::vector<double> a;
  std::vector<double> b;
  double extinction_time = 0.0;
  int rejected_steps = 0;
};

struct HoleOptions {
  double step_fraction = 0.05;  ///< initial step = fraction * R / |dR/dt|
  double tolerance = 1e-10;     ///< relative step-doubling error per step
  double stop_fraction = 1e-8;  ///< stop once R <= stop_fraction * R1
};

FocusingTrace evolve_hole(double R0, double R1, const HoleOptions& options = {});

/// (dR/dt) / (R1^2 / (4 R ln(R / R1))) from trace secants, for R <= r_max_fraction * R1.
std::vector<double> asymptotic_law_ratios(const FocusingTrace& trace, double r_max_fraction = 1e-2);

/// int_R^R1 |p'(r)|^alpha r dr for the annulus with inner radius R.
double gradient_moment(double R, double R1, double alpha);

enum class Integrability { convergent, divergent, inconclusive };
std::string to_string(Integrability verdict);

struct CutoffSchedule {
  double initial_fraction = 0.5;  ///< eps_0 = initial_fraction * T_ext
  double ratio = 0.5;             ///< eps_{j+1} = ratio * eps_j
};

struct CutoffRow {
  double epsilon = 0.0;
  double radius = 0.0;  ///< R(T_ext - epsilon)
  double value = 0.0;   ///< I_epsilon(alpha)
};

struct IntegrabilityResult {
  double alpha = 0.0;
  Integrability verdict = Integrability::inconclusive;
  std::vector<CutoffRow> table;
  std::vector<double> increments;
  double tail_log_slope = 0.0;
};

/// I_eps(alpha) = int_0^{T_ext - eps} int_R(t)^R1 |p'|^alpha r dr dt for the
/// geometric cutoff schedule down to the trace's final radius, plus the
/// increment-based classification.
IntegrabilityResult integrability_exponent(const FocusingTrace& trace, double alpha, const CutoffSchedule& schedule = {});

/// Convergent if the tail of the increment sequence decreases monotonically,
/// divergent if it increases monotonically, inconclusive otherwise.
Integrability classify_increments(std::span<const double> increments, double* tail_log_slope = nullptr);

/// Composite 16-point Gauss-Legendre on [a, b] split into `panels` panels.
double gauss_legendre(const std::function<double(double)>& f, double a, double b, int panels = 1);

}  // namespace hsl
