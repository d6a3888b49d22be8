#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hsl/grid.hpp"

namespace hsl {

/// Constitutive and structural constants of the tumor model.
///
/// The homeostatic density n_H = p_H^(1/gamma) is always derived from
/// p_H and gamma; it is never stored.
struct ModelParams {
  double gamma = 40.0;  ///< pressure-law stiffness, p = n^gamma
  double p_H = 1.0;     ///< homeostatic pressure
  double p_B = 2.0;     ///< vessel reference pressure (release vanishes above it)
  double c_B = 1.0;     ///< far-field nutrient level
  double beta = 0.1;    ///< declared lower bound for -dG/dp

  double n_H() const;

  /// Throws std::invalid_argument listing every violated positivity constraint.
  void check() const;
};

/// Smallest admissible gamma for the Aronson-Benilan monitors in dimension d.
double ab_gamma_threshold(int dimension);

enum class ReactionFamily {
  standard,  ///< G = g0 (p_H - p)(c + c1) - c2, H = c, K = |1 - p/p_B|_+
  inert,     ///< G = H = K = 0 (pure porous medium flow)
  custom,    ///< user supplied callables
};

struct ReactionSpec {
  ReactionFamily family = ReactionFamily::standard;
  double g0 = 1.0;
  double c1 = 0.1;
  double c2 = 0.5;
  /// Declared necrosis threshold: G(p, c) < 0 for all c < c_star.
  double c_star = 0.2;

  std::function<double(double, double)> growth;  // custom family only
  std::function<double(double)> consumption;
  std::function<double(double)> release;

  static ReactionSpec standard(double g0, double c1, double c2, double c_star);
  static ReactionSpec inert();
  static ReactionSpec custom(std::function<double(double, double)> growth,
                             std::function<double(double)> consumption,
                             std::function<double(double)> release);
};

std::string to_string(ReactionFamily family);
ReactionFamily reaction_family_from_string(const std::string& name);

/// Reaction terms G (growth), H (consumption) and K (release) bound to
/// the model constants they depend on.
class Reactions {
 public:
  Reactions(ModelParams params, ReactionSpec spec);

  const ModelParams& params() const { return params_; }
  const ReactionSpec& spec() const { return spec_; }

  double growth(double p, double c) const;
  double consumption(double c) const;
  double release(double p) const;

  /// Primitive int_0^p G(q, c) dq.
  double growth_primitive(double p, double c) const;

  Field growth(const Field& p, const Field& c) const;

 private:
  ModelParams params_;
  ReactionSpec spec_;
};

struct Violation {
  std::string condition;
  double p = 0.0;
  double c = 0.0;
  double value = 0.0;  ///< worst sampled value of the violated quantity
};

struct ValidationReport {
  bool passed = true;
  double measured_beta = 0.0;  ///< min over samples of -dG/dp
  std::size_t samples = 0;
  std::vector<Violation> violations;
};

/// Samples G, H, K and their difference quotients on a lattice x lattice
/// grid of [0, p_H] x [0, c_B] and reports every violated structural
/// assumption with its worst sample point.
ValidationReport validate(const ModelParams& params, const ReactionSpec& spec, int lattice = 100);

double pressure_from_density(double n, double gamma);
double density_from_pressure(double p, double gamma);
Field pressure_from_density(const Field& n, double gamma);
Field density_from_pressure(const Field& p, double gamma);

/// max over n in [0, 1] of n^gamma (1 - n) = gamma^gamma / (gamma + 1)^(gamma + 1).
double graph_product_bound(double gamma);

}  // namespace hsl
