#pragma once

#include <cstddef>
#include <span>

namespace hsl {

/// y ~ A x^(-exponent) fitted by least squares on (log x, log y).
struct DecayFit {
  double exponent = 0.0;
  double log_prefactor = 0.0;
  double ci_low = 0.0;   ///< 95% confidence interval of the exponent
  double ci_high = 0.0;
  double residual_rms = 0.0;
  std::size_t points = 0;
};

/// Requires at least 3 points with x, y > 0.
DecayFit fit_decay_exponent(std::span<const double> x, std::span<const double> y);

/// Two-sided 97.5% quantile of Student's t with the given degrees of freedom.
double student_t_975(int dof);

struct Spearman {
  double rho = 0.0;
  double p_positive = 1.0;  ///< one-sided P(rho' >= rho) under independence
};

/// Rank correlation with average ranks for ties; the p-value is exact
/// (full permutation enumeration) for n <= 9 and uses the t approximation
/// otherwise.
Spearman spearman(std::span<const double> x, std::span<const double> y);

/// max / min of a positive sequence.
double band_ratio(std::span<const double> values);

}  // namespace hsl
