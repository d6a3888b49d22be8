#include "hsl/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace hsl {

double ModelParams::n_H() const { return density_from_pressure(p_H, gamma); }

void ModelParams::check() const {
  std::vector<std::string> errors;
  if (!(gamma > 1.0)) errors.push_back("gamma > 1 required");
  if (!(p_H > 0.0)) errors.push_back("p_H > 0 required");
  if (!(p_B > 0.0)) errors.push_back("p_B > 0 required");
  if (!(c_B > 0.0)) errors.push_back("c_B > 0 required");
  if (!(beta > 0.0)) errors.push_back("beta > 0 required");
  if (errors.empty()) return;
  std::ostringstream msg;
  for (std::size_t i = 0; i < errors.size(); ++i) msg << (i ? "; " : "") << errors[i];
  throw std::invalid_argument(msg.str());
}

double ab_gamma_threshold(int dimension) { return std::max(1.0, 2.0 - 4.0 / dimension); }

ReactionSpec ReactionSpec::standard(double g0, double c1, double c2, double c_star) {
  ReactionSpec s;
  s.family = ReactionFamily::standard;
  s.g0 = g0;
  s.c1 = c1;
  s.c2 = c2;
  s.c_star = c_star;
  return s;
}

ReactionSpec ReactionSpec::inert() {
  ReactionSpec s;
  s.family = ReactionFamily::inert;
  return s;
}

ReactionSpec ReactionSpec::custom(std::function<double(double, double)> growth,
                                  std::function<double(double)> consumption,
                                  std::function<double(double)> release) {
  ReactionSpec s;
  s.family = ReactionFamily::custom;
  s.growth = std::move(growth);
  s.consumption = std::move(consumption);
  s.release = std::move(release);
  return s;
}

std::string to_string(ReactionFamily family) {
  switch (family) {
    case ReactionFamily::standard: return "standard";
    case ReactionFamily::inert: return "inert";
    case ReactionFamily::custom: return "custom";
  }
  return "unknown";
}

ReactionFamily reaction_family_from_string(const std::string& name) {
  if (name == "standard") return ReactionFamily::standard;
  if (name == "inert") return ReactionFamily::inert;
  throw std::invalid_argument("unknown reaction family '" + name + "' (expected standard or inert)");
}

Reactions::Reactions(ModelParams params, ReactionSpec spec) : params_(params), spec_(std::move(spec)) {
  if (spec_.family == ReactionFamily::custom && !(spec_.growth && spec_.consumption && spec_.release)) {
    throw std::invalid_argument("custom reaction family needs growth, consumption and release callables");
  }
}

double Reactions::growth(double p, double c) const {
  switch (spec_.family) {
    case ReactionFamily::standard: return spec_.g0 * (params_.p_H - p) * (c + spec_.c1) - spec_.c2;
    case ReactionFamily::inert: return 0.0;
    case ReactionFamily::custom: return spec_.growth(p, c);
  }
  return 0.0;
}

double Reactions::consumption(double c) const {
  switch (spec_.family) {
    case ReactionFamily::standard: return c;
    case ReactionFamily::inert: return 0.0;
    case ReactionFamily::custom: return spec_.consumption(c);
  }
  return 0.0;
}

double Reactions::release(double p) const {
  switch (spec_.family) {
    case ReactionFamily::standard: return std::max(0.0, 1.0 - p / params_.p_B);
    case ReactionFamily::inert: return 0.0;
    case ReactionFamily::custom: return spec_.release(p);
  }
  return 0.0;
}

double Reactions::growth_primitive(double p, double c) const {
  switch (spec_.family) {
    case ReactionFamily::standard:
      return (c + spec_.c1) * spec_.g0 * (params_.p_H * p - 0.5 * p * p) - spec_.c2 * p;
    case ReactionFamily::inert: return 0.0;
    case ReactionFamily::custom: {
      // composite Simpson, 64 panels
      constexpr int panels = 64;
      double h = p / panels;
      double acc = spec_.growth(0.0, c) + spec_.growth(p, c);
      for (int i = 1; i < panels; ++i) acc += (i % 2 ? 4.0 : 2.0) * spec_.growth(i * h, c);
      return acc * h / 3.0;
    }
  }
  return 0.0;
}

Field Reactions::growth(const Field& p, const Field& c) const {
  if (!p.compatible(c)) throw std::invalid_argument("growth: fields live on different grids");
  Field out(p.grid());
  for (Eigen::Index k = 0; k < p.size(); ++k) out[k] = growth(p[k], c[k]);
  return out;
}

namespace {

class ViolationLog {
 public:
  void record(const std::string& condition, double p, double c, double excess, double value) {
    auto it = worst_.find(condition);
    if (it == worst_.end() || excess > it->second.first) worst_[condition] = {excess, Violation{condition, p, c, value}};
  }
  std::vector<Violation> list() const {
    std::vector<Violation> out;
    for (const auto& [name, entry] : worst_) out.push_back(entry.second);
    return out;
  }

 private:
  std::map<std::string, std::pair<double, Violation>> worst_;
};

}  // namespace

ValidationReport validate(const ModelParams& params, const ReactionSpec& spec, int lattice) {
  constexpr double tol = 1e-12;
  ValidationReport report;
  ViolationLog log;
  Reactions r(params, spec);

  const int m = std::max(lattice, 2);
  const double dp = params.p_H / (m - 1);
  const double dc = params.c_B / (m - 1);

  double beta = std::numeric_limits<double>::infinity();
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      const double p = i * dp;
      const double c = j * dc;
      const double g = r.growth(p, c);
      ++report.samples;
      if (i + 1 < m) {
        double slope = (r.growth(p + dp, c) - g) / dp;
        beta = std::min(beta, -slope);
        if (slope > -params.beta + tol) log.record("dG/dp <= -beta", p, c, slope + params.beta, slope);
      }
      if (j + 1 < m) {
        double slope = (r.growth(p, c + dc) - g) / dc;
        if (slope < -tol) log.record("dG/dc >= 0", p, c, -slope, slope);
      }
    }
  }
  report.measured_beta = beta;

  // Growth stops at and above the homeostatic pressure.
  const double p_top = std::max(2.0 * params.p_H, params.p_B);
  for (int i = 0; i < m; ++i) {
    double p = params.p_H + i * (p_top - params.p_H) / (m - 1);
    double g = r.growth(p, params.c_B);
    if (g > tol) log.record("G(p, c_B) <= 0 for p >= p_H", p, params.c_B, g, g);
  }

  // Release term.
  const double k_top = 2.0 * params.p_B;
  double previous = r.release(0.0);
  for (int i = 0; i < m; ++i) {
    double p = i * k_top / (m - 1);
    double k = r.release(p);
    if (k < -tol || k > 1.0 + tol) log.record("0 <= K <= 1", p, 0.0, std::max(-k, k - 1.0), k);
    if (p >= params.p_B && std::abs(k) > tol) log.record("K(p) = 0 for p >= p_B", p, 0.0, std::abs(k), k);
    if (k > previous + tol) log.record("K nonincreasing", p, 0.0, k - previous, k - previous);
    previous = k;
  }

  // Consumption term.
  if (std::abs(r.consumption(0.0)) > tol) log.record("H(0) = 0", 0.0, 0.0, std::abs(r.consumption(0.0)), r.consumption(0.0));
  previous = r.consumption(0.0);
  for (int j = 0; j < m; ++j) {
    double c = j * dc;
    double h = r.consumption(c);
    if (h < -tol) log.record("H >= 0", 0.0, c, -h, h);
    if (h < previous - tol) log.record("H nondecreasing", 0.0, c, previous - h, h - previous);
    previous = h;
  }

  // Necrosis: G(p, c) < 0 for every p >= 0 and c < c_star.
  if (!(spec.c_star > 0.0)) {
    log.record("declared c_star > 0", 0.0, spec.c_star, 1.0, spec.c_star);
  } else {
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        double p = i * p_top / (m - 1);
        double c = spec.c_star * j / m;
        double g = r.growth(p, c);
        if (!(g < 0.0)) log.record("necrosis: G(p, c) < 0 for c < c_star", p, c, g, g);
      }
    }
  }

  report.violations = log.list();
  report.passed = report.violations.empty();
  return report;
}

double pressure_from_density(double n, double gamma) {
  if (!(n >= 0.0)) throw std::domain_error("pressure_from_density: negative density " + std::to_string(n));
  if (n == 0.0) return 0.0;
  return std::exp(gamma * std::log(n));
}

double density_from_pressure(double p, double gamma) {
  if (!(p >= 0.0)) throw std::domain_error("density_from_pressure: negative pressure " + std::to_string(p));
  if (p == 0.0) return 0.0;
  return std::exp(std::log(p) / gamma);
}

Field pressure_from_density(const Field& n, double gamma) {
  Field out(n.grid());
  for (Eigen::Index k = 0; k < n.size(); ++k) {
    if (!(n[k] >= 0.0)) {
      throw std::domain_error("pressure_from_density: negative density " + std::to_string(n[k]) + " at cell " +
                              std::to_string(k));
    }
    out[k] = pressure_from_density(n[k], gamma);
  }
  return out;
}

Field density_from_pressure(const Field& p, double gamma) {
  Field out(p.grid());
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    if (!(p[k] >= 0.0)) {
      throw std::domain_error("density_from_pressure: negative pressure " + std::to_string(p[k]) + " at cell " +
                              std::to_string(k));
    }
    out[k] = density_from_pressure(p[k], gamma);
  }
  return out;
}

double graph_product_bound(double gamma) {
  return std::exp(gamma * std::log(gamma) - (gamma + 1.0) * std::log(gamma + 1.0));
}

}  // namespace hsl
