#include "hsl/analytic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "hsl/solver.hpp"

namespace hsl {

// ----------------------------------------------------------------- Barenblatt

double BarenblattParams::alpha() const { return dimension / (dimension * (m - 1.0) + 2.0); }

double BarenblattParams::k() const { return alpha() * (m - 1.0) / (2.0 * m * dimension); }

BarenblattParams BarenblattParams::for_pressure_law(double gamma, int dimension, double C, double t0) {
  BarenblattParams b;
  b.m = gamma + 1.0;
  b.dimension = dimension;
  b.kappa = gamma / (gamma + 1.0);
  b.C = C;
  b.t0 = t0;
  b.check();
  return b;
}

void BarenblattParams::check() const {
  if (!(m > 1.0)) throw std::invalid_argument("Barenblatt exponent m must exceed 1");
  if (dimension != 1 && dimension != 2) throw std::invalid_argument("Barenblatt dimension must be 1 or 2");
  if (!(kappa > 0.0) || !(C > 0.0) || !(t0 > 0.0)) {
    throw std::invalid_argument("Barenblatt kappa, C and t0 must be positive");
  }
}

namespace {

// int_{R^d} (1 - |z|^2)_+^q dz
double unit_profile_mass(double q, int d) {
  return std::pow(std::numbers::pi, 0.5 * d) * std::tgamma(q + 1.0) / std::tgamma(q + 1.0 + 0.5 * d);
}

}  // namespace

double barenblatt_mass(const BarenblattParams& b) {
  const double q = 1.0 / (b.m - 1.0);
  return unit_profile_mass(q, b.dimension) * std::pow(b.C, q) * std::pow(b.C / b.k(), 0.5 * b.dimension);
}

Field barenblatt_cell_averages(const Grid& grid, double t, const BarenblattParams& b) {
  const double tau = b.tau(t);
  if (!(tau > 0.0)) throw std::domain_error("Barenblatt profile evaluated before its source time");
  const double q = 1.0 / (b.m - 1.0);
  const double scale = std::pow(tau, -b.alpha());
  const double K = b.k() * std::pow(tau, -2.0 * b.alpha() / b.dimension);
  const double R = barenblatt_support_radius(t, b);
  const double h = grid.spacing();

  // int_a^b u(x, y) dx along the chord at height y
  auto chord = [&](double a, double c, double y) {
    const double r2 = R * R - y * y;
    if (r2 <= 0.0) return 0.0;
    const double ry = std::sqrt(r2);
    a = std::max(a, -ry);
    c = std::min(c, ry);
    if (a >= c) return 0.0;
    auto f = [&](double th) {
      const double cs = std::cos(th);
      return scale * std::pow(K * r2 * cs * cs, q) * ry * cs;
    };
    return gauss_legendre(f, std::asin(a / ry), std::asin(c / ry), 2);
  };

  Field out(grid);
  for (Eigen::Index k = 0; k < grid.size(); ++k) {
    auto x = grid.position(k);
    const double x0 = x[0] - 0.5 * h, x1 = x[0] + 0.5 * h;
    if (grid.dimension == 1) {
      out[k] = chord(x0, x1, 0.0) / h;
    } else {
      const double y0 = x[1] - 0.5 * h, y1 = x[1] + 0.5 * h;
      if (std::min(std::abs(y0), std::abs(y1)) >= R && y0 * y1 > 0.0) continue;
      out[k] = gauss_legendre([&](double y) { return chord(x0, x1, y); }, y0, y1, 2) / (h * h);
    }
  }
  return out;
}

BarenblattParams BarenblattParams::with_mass(double mass) const {
  if (!(mass > 0.0)) throw std::invalid_argument("Barenblatt mass must be positive");
  BarenblattParams out = *this;
  out.C = 1.0;
  const double unit = barenblatt_mass(out);
  const double q = 1.0 / (m - 1.0);
  out.C = std::pow(mass / unit, 1.0 / (q + 0.5 * dimension));
  return out;
}

double barenblatt_pressure(double r, double t, const BarenblattParams& b) {
  const double tau = b.tau(t);
  if (!(tau > 0.0)) throw std::domain_error("Barenblatt profile evaluated before its source time");
  const double a = b.alpha();
  const double inner = b.C - b.k() * r * r * std::pow(tau, -2.0 * a / b.dimension);
  if (inner <= 0.0) return 0.0;
  return std::pow(tau, -a * (b.m - 1.0)) * inner;
}

double barenblatt_density(double r, double t, const BarenblattParams& b) {
  const double v = barenblatt_pressure(r, t, b);
  return v > 0.0 ? std::pow(v, 1.0 / (b.m - 1.0)) : 0.0;
}

double barenblatt_support_radius(double t, const BarenblattParams& b) {
  return std::sqrt(b.C / b.k()) * std::pow(b.tau(t), b.alpha() / b.dimension);
}

// -------------------------------------------------------------------- Barrier

double BarrierParams::S(double t) const { return S0 * std::exp(2.0 * growth_rate * t); }

double BarrierParams::radius(double t) const { return std::sqrt(2.0 * S(t)); }

void BarrierParams::check() const {
  if (!(S0 > 0.0)) throw std::invalid_argument("barrier S0 must be positive");
  if (!(growth_rate > 0.0)) throw std::invalid_argument("support barrier requires G(0, c_B) > 0");
}

BarrierParams dominating_barrier(const Field& n, const Field& p, double growth_rate, double threshold) {
  BarrierParams out;
  out.growth_rate = growth_rate;
  out.S0 = 0.0;
  for (Eigen::Index k = 0; k < n.size(); ++k) {
    if (n[k] > threshold) {
      double r = n.grid().radius(k);
      out.S0 = std::max(out.S0, 0.5 * r * r + p[k] / growth_rate);
    }
  }
  if (out.S0 == 0.0) out.S0 = std::numeric_limits<double>::min();
  out.check();
  return out;
}

std::vector<BarrierSnapshot> barrier_check(std::span<const State> snapshots, const BarrierParams& params,
                                           double threshold) {
  std::vector<BarrierSnapshot> out;
  out.reserve(snapshots.size());
  for (const auto& s : snapshots) {
    BarrierSnapshot row;
    row.t = s.t;
    row.radius = params.radius(s.t);
    for (Eigen::Index k = 0; k < s.n.size(); ++k) {
      if (s.n[k] > threshold) {
        double r = s.n.grid().radius(k);
        row.support_radius = std::max(row.support_radius, r);
        if (r > row.radius * (1.0 + 1e-12)) row.offending.push_back(k);
      }
    }
    out.push_back(std::move(row));
  }
  return out;
}

// --------------------------------------------------------------- Quadrature

namespace {

struct GaussRule {
  std::array<double, 16> nodes{};
  std::array<double, 16> weights{};
};

const GaussRule& gauss16() {
  static const GaussRule rule = [] {
    GaussRule g;
    constexpr int n = 16;
    for (int i = 0; i < n; ++i) {
      double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
          double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      g.nodes[i] = x;
      g.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return g;
  }();
  return rule;
}

// Splits [lo, hi] at the midpoint and grades each half geometrically toward
// its end point down to the given length scale (scale <= 0: no grading).
double graded_integral(const std::function<double(double)>& f, double lo, double hi, double lo_scale,
                       double hi_scale) {
  if (!(hi > lo)) return 0.0;
  const double mid = 0.5 * (lo + hi);
  const double half = mid - lo;
  double acc = 0.0;

  auto levels = [&](double scale) {
    return scale > 0.0 ? std::max(0, int(std::ceil(std::log2(half / scale)))) : 0;
  };

  int kl = levels(lo_scale);
  acc += gauss_legendre(f, lo, lo + half * std::ldexp(1.0, -kl));
  for (int k = kl; k > 0; --k) acc += gauss_legendre(f, lo + half * std::ldexp(1.0, -k), lo + half * std::ldexp(1.0, 1 - k));

  int kh = levels(hi_scale);
  acc += gauss_legendre(f, hi - half * std::ldexp(1.0, -kh), hi);
  for (int k = kh; k > 0; --k) acc += gauss_legendre(f, hi - half * std::ldexp(1.0, 1 - k), hi - half * std::ldexp(1.0, -k));
  return acc;
}

}  // namespace

double gauss_legendre(const std::function<double(double)>& f, double a, double b, int panels) {
  const auto& g = gauss16();
  const double width = (b - a) / panels;
  double acc = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * width;
    const double c = lo + 0.5 * width;
    double s = 0.0;
    for (int i = 0; i < 16; ++i) s += g.weights[i] * f(c + 0.5 * width * g.nodes[i]);
    acc += 0.5 * width * s;
  }
  return acc;
}

// ------------------------------------------------------------------ Focusing

ShellCoefficients shell_coefficients(double R, double R1) {
  if (!(R > 0.0) || !(R < R1)) throw std::domain_error("shell_coefficients: need 0 < R < R1");
  // ln(R1 / R) via log1p keeps the R -> R1 limit well conditioned.
  const double log_ratio = std::log1p((R1 - R) / R);
  ShellCoefficients s;
  s.a = (R1 - R) * (R1 + R) / (4.0 * log_ratio);
  s.b = 0.25 * R1 * R1 - s.a * std::log(R1);
  return s;
}

double shell_pressure(double r, double a, double b) { return -0.25 * r * r + a * std::log(r) + b; }

double shell_pressure_slope(double r, double a) { return -0.5 * r + a / r; }

double hole_velocity(double R, double R1) { return -shell_pressure_slope(R, shell_coefficients(R, R1).a); }

double closing_time(double R, double R1) {
  if (!(R > 0.0) || !(R < R1)) throw std::domain_error("closing_time: need 0 < R < R1");
  // Integrate in u = ln r; below ln R - 60 the integrand (~ r^2 |ln r|) is negligible.
  auto integrand = [R1](double u) {
    double r = std::exp(u);
    return r / std::abs(hole_velocity(r, R1));
  };
  const double top = std::log(R);
  return gauss_legendre(integrand, top - 60.0, top, 240);
}

FocusingTrace evolve_hole(double R0, double R1, const HoleOptions& options) {
  if (!(R0 > 0.0) || !(R0 < R1)) throw std::domain_error("evolve_hole: need 0 < R0 < R1");
  FocusingTrace trace;
  trace.R1 = R1;

  auto push = [&](double t, double R) {
    auto s = shell_coefficients(R, R1);
    if (std::abs(shell_pressure(R, s.a, s.b)) > 1e-12) throw std::runtime_error("evolve_hole: p(R) != 0 on the hole boundary");
    trace.t.push_back(t);
    trace.R.push_back(R);
    trace.a.push_back(s.a);
    trace.b.push_back(s.b);
  };

  auto velocity = [R1](double R) { return R > 0.0 ? hole_velocity(R, R1) : std::numeric_limits<double>::quiet_NaN(); };
  // One RK4 step; NaN when a stage leaves (0, R1).
  auto rk4 = [&](double R, double dt) {
    double k1 = velocity(R);
    double k2 = velocity(R + 0.5 * dt * k1);
    double k3 = velocity(R + 0.5 * dt * k2);
    double k4 = velocity(R + dt * k3);
    double next = R + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    return next > 0.0 ? next : std::numeric_limits<double>::quiet_NaN();
  };

  const double R_stop = options.stop_fraction * R1;
  double t = 0.0;
  double R = R0;
  push(t, R);
  while (R > R_stop) {
    double dt = options.step_fraction * R / std::abs(velocity(R));
    double next = 0.0;
    for (int attempt = 0;; ++attempt) {
      if (attempt > 60) throw std::runtime_error("evolve_hole: step control failed");
      double full = rk4(R, dt);
      double half = rk4(R, 0.5 * dt);
      double two_half = std::isnan(half) ? half : rk4(half, 0.5 * dt);
      if (!std::isnan(full) && !std::isnan(two_half) && std::abs(full - two_half) <= options.tolerance * R) {
        next = two_half + (two_half - full) / 15.0;
        break;
      }
      dt *= 0.5;
      ++trace.rejected_steps;
    }
    if (!(next < R)) throw std::runtime_error("evolve_hole: hole radius failed to decrease (sign error)");
    t += dt;
    R = next;
    push(t, R);
  }

  // R^2 is locally linear in t near closure (up to log factors).
  const std::size_t n = trace.t.size();
  if (n >= 2) {
    double r2a = trace.R[n - 2] * trace.R[n - 2];
    double r2b = trace.R[n - 1] * trace.R[n - 1];
    double slope = (r2b - r2a) / (trace.t[n - 1] - trace.t[n - 2]);
    trace.extinction_time = trace.t[n - 1] - r2b / slope;
  } else {
    trace.extinction_time = t;
  }
  return trace;
}

std::vector<double> asymptotic_law_ratios(const FocusingTrace& trace, double r_max_fraction) {
  std::vector<double> out;
  const double R1 = trace.R1;
  for (std::size_t k = 0; k + 1 < trace.R.size(); ++k) {
    double Rm = 0.5 * (trace.R[k] + trace.R[k + 1]);
    if (trace.R[k] > r_max_fraction * R1) continue;
    double measured = (trace.R[k + 1] - trace.R[k]) / (trace.t[k + 1] - trace.t[k]);
    double law = R1 * R1 / (4.0 * Rm * std::log(Rm / R1));
    out.push_back(measured / law);
  }
  return out;
}

double gradient_moment(double R, double R1, double alpha) {
  const double a = shell_coefficients(R, R1).a;
  const double r_star = std::clamp(std::sqrt(2.0 * a), R, R1);  // p'(r_star) = 0
  auto integrand = [a, alpha](double r) { return std::pow(std::abs(shell_pressure_slope(r, a)), alpha) * r; };
  return graded_integral(integrand, R, r_star, 0.05 * R, 1e-10 * r_star) +
         graded_integral(integrand, r_star, R1, 1e-10 * r_star, 0.0);
}

std::string to_string(Integrability verdict) {
  switch (verdict) {
    case Integrability::convergent: return "convergent";
    case Integrability::divergent: return "divergent";
    case Integrability::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

Integrability classify_increments(std::span<const double> increments, double* tail_log_slope) {
  const std::size_t n = increments.size();
  if (tail_log_slope) *tail_log_slope = 0.0;
  if (n < 6) return Integrability::inconclusive;
  const std::size_t tail = std::max<std::size_t>(6, n / 3);
  auto d = increments.subspan(n - tail);
  for (double v : d) {
    if (!(v > 0.0) || !std::isfinite(v)) return Integrability::inconclusive;
  }

  bool decreasing = true;
  bool increasing = true;
  for (std::size_t i = 0; i + 1 < d.size(); ++i) {
    decreasing = decreasing && d[i + 1] < d[i];
    increasing = increasing && d[i + 1] > d[i];
  }

  // Least-squares slope of ln(increment) against cutoff index.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    double x = double(i), y = std::log(d[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double m = double(d.size());
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  if (tail_log_slope) *tail_log_slope = slope;

  if (decreasing && slope < 0.0) return Integrability::convergent;
  if (increasing && slope > 0.0) return Integrability::divergent;
  return Integrability::inconclusive;
}

IntegrabilityResult integrability_exponent(const FocusingTrace& trace, double alpha, const CutoffSchedule& schedule) {
  if (!(alpha >= 1.0)) throw std::invalid_argument("integrability_exponent: alpha >= 1 required");
  if (trace.R.size() < 2) throw std::invalid_argument("integrability_exponent: trace too short");
  if (!(schedule.ratio > 0.0 && schedule.ratio < 1.0) || !(schedule.initial_fraction > 0.0 && schedule.initial_fraction < 1.0)) {
    throw std::invalid_argument("integrability_exponent: invalid cutoff schedule");
  }
  const double R1 = trace.R1;
  const double R0 = trace.R.front();
  const double R_end = trace.R.back();

  // The hole ODE is autonomous, so dt = dR / |dR/dt| and the remaining time
  // from radius R is closing_time(R). Cutoffs are located through it.
  auto radius_at_remaining = [&](double eps) {
    double lo = std::log(R_end) - 10.0, hi = std::log(R0);
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
      double mid = 0.5 * (lo + hi);
      (closing_time(std::exp(mid), R1) < eps ? lo : hi) = mid;
    }
    return std::exp(0.5 * (lo + hi));
  };
  auto time_density = [&](double u) {
    double R = std::exp(u);
    return gradient_moment(R, R1, alpha) * R / std::abs(hole_velocity(R, R1));
  };
  auto integrate_between = [&](double R_lo, double R_hi) {
    double ulo = std::log(R_lo), uhi = std::log(R_hi);
    int panels = std::max(1, int(std::ceil((uhi - ulo) / 0.25)));
    return gauss_legendre(time_density, ulo, uhi, panels);
  };

  IntegrabilityResult result;
  result.alpha = alpha;
  const double T = closing_time(R0, R1);
  double eps = schedule.initial_fraction * T;
  double R_eps = radius_at_remaining(eps);
  double value = integrate_between(R_eps, R0);
  result.table.push_back({eps, R_eps, value});
  while (true) {
    double next_eps = eps * schedule.ratio;
    double next_R = radius_at_remaining(next_eps);
    if (next_R < R_end) break;
    double inc = integrate_between(next_R, R_eps);
    value += inc;
    result.increments.push_back(inc);
    result.table.push_back({next_eps, next_R, value});
    eps = next_eps;
    R_eps = next_R;
  }
  result.verdict = classify_increments(result.increments, &result.tail_log_slope);
  return result;
}

}  // namespace hsl
