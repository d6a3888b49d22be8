#include "hsl/limit.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include <Eigen/SparseCholesky>
#include <json.hpp>

namespace hsl {

namespace fs = std::filesystem;

namespace {

// Neighbour index of cell k along axis in direction dir, or -1 outside the box.
Eigen::Index neighbour_index(const Grid& g, Eigen::Index k, int axis, int dir) {
  auto c = g.cell(k);
  int m = c[axis] + dir;
  if (m < 0 || m >= g.cells) return -1;
  return axis == 0 ? g.index(m, c[1]) : g.index(c[0], m);
}

}  // namespace

PositivitySet positivity_set(const Field& p, double threshold) {
  const Grid& g = p.grid();
  PositivitySet set{g, std::vector<bool>(std::size_t(g.size()), false), std::vector<bool>(std::size_t(g.size()), false), 0};
  for (Eigen::Index k = 0; k < g.size(); ++k) {
    if (p[k] > threshold) {
      if (g.on_boundary(k)) throw std::domain_error("positivity set reaches the box boundary at cell " + std::to_string(k));
      set.mask[std::size_t(k)] = true;
      ++set.count;
    }
  }
  for (Eigen::Index k = 0; k < g.size(); ++k) {
    if (!set.mask[std::size_t(k)]) continue;
    for (int axis = 0; axis < g.dimension; ++axis) {
      for (int dir : {-1, 1}) {
        Eigen::Index nb = neighbour_index(g, k, axis, dir);
        if (nb >= 0 && !set.mask[std::size_t(nb)]) set.boundary_layer[std::size_t(nb)] = true;
      }
    }
  }
  return set;
}

HeleShawResult heleshaw_reference(const Field& p_num, const Field& c_num, const Reactions& reactions, double eps_O,
                                  const HeleShawOptions& options) {
  const Grid& g = p_num.grid();
  HeleShawResult out;
  out.pressure = Field(g);
  out.set = positivity_set(p_num, eps_O);
  const auto& mask = out.set.mask;
  if (out.set.count == 0) {
    out.converged = true;
    return out;
  }

  std::vector<Eigen::Index> cells;
  std::vector<Eigen::Index> slot(std::size_t(g.size()), -1);
  for (Eigen::Index k = 0; k < g.size(); ++k) {
    if (mask[std::size_t(k)]) {
      slot[std::size_t(k)] = Eigen::Index(cells.size());
      cells.push_back(k);
    }
  }
  const Eigen::Index m = Eigen::Index(cells.size());
  const double beta = reactions.params().beta;
  const double inv_h2 = 1.0 / (g.spacing() * g.spacing());

  std::vector<Eigen::Triplet<double>> entries;
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index k = cells[std::size_t(i)];
    entries.emplace_back(i, i, 2.0 * g.dimension * inv_h2 + beta);
    for (int axis = 0; axis < g.dimension; ++axis) {
      for (int dir : {-1, 1}) {
        Eigen::Index nb = neighbour_index(g, k, axis, dir);
        if (nb >= 0 && mask[std::size_t(nb)]) entries.emplace_back(i, slot[std::size_t(nb)], -inv_h2);
      }
    }
  }
  Eigen::SparseMatrix<double> A(m, m);
  A.setFromTriplets(entries.begin(), entries.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(A);
  if (solver.info() != Eigen::Success) throw HeleShawError("Hele-Shaw operator factorization failed");

  Eigen::VectorXd p(m), c(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    p[i] = p_num[cells[std::size_t(i)]];
    c[i] = c_num[cells[std::size_t(i)]];
  }

  int growing = 0;
  Eigen::VectorXd rhs(m);
  for (int it = 1; it <= options.max_iterations; ++it) {
    for (Eigen::Index i = 0; i < m; ++i) rhs[i] = reactions.growth(p[i], c[i]) + beta * p[i];
    Eigen::VectorXd next = solver.solve(rhs);
    const double scale = std::max(next.cwiseAbs().maxCoeff(), 1e-300);
    const double update = (next - p).cwiseAbs().maxCoeff() / scale;
    p = std::move(next);
    out.iterations = it;
    if (!out.updates.empty()) {
      growing = update > out.updates.back() ? growing + 1 : 0;
      if (out.updates.size() >= 2) out.contraction = std::max(out.contraction, update / out.updates.back());
    }
    out.updates.push_back(update);
    if (growing >= 3) {
      throw HeleShawError("Hele-Shaw fixed point is not contracting (update grew 3 iterations in a row); it relies on dG/dp < -beta");
    }
    if (update <= options.tolerance) {
      out.converged = true;
      break;
    }
  }
  if (out.updates.size() == 2) out.contraction = out.updates[1] / std::max(out.updates[0], 1e-300);

  for (Eigen::Index i = 0; i < m; ++i) out.pressure[cells[std::size_t(i)]] = p[i];
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index k = cells[std::size_t(i)];
    bool interior = true;
    double lap = -2.0 * g.dimension * out.pressure[k];
    for (int axis = 0; axis < g.dimension; ++axis) {
      for (int dir : {-1, 1}) {
        Eigen::Index nb = neighbour_index(g, k, axis, dir);
        interior = interior && nb >= 0 && mask[std::size_t(nb)];
        if (nb >= 0) lap += out.pressure[nb];
      }
    }
    if (interior) {
      out.residual_inf = std::max(out.residual_inf, std::abs(lap * inv_h2 + reactions.growth(p[i], c[i])));
    }
  }
  return out;
}

double l2_on_set(const Field& a, const Field& b, const PositivitySet& set) {
  double acc = 0.0;
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    if (set.mask[std::size_t(k)]) acc += (a[k] - b[k]) * (a[k] - b[k]);
  }
  return std::sqrt(acc * set.grid.cell_volume());
}

double saturation_mismatch(const PositivitySet& set, const Field& n, double tolerance) {
  std::size_t count = 0;
  for (Eigen::Index k = 0; k < n.size(); ++k) {
    if (set.mask[std::size_t(k)] != (n[k] >= 1.0 - tolerance)) ++count;
  }
  return double(count) * set.grid.cell_volume();
}

LimitComparison limit_compare(const Trajectory& a, const Trajectory& b) {
  if (!(a.grid == b.grid)) throw std::invalid_argument("limit_compare: trajectories live on different grids");
  if (a.snapshots.size() != b.snapshots.size()) throw std::invalid_argument("limit_compare: snapshot counts differ");
  for (std::size_t k = 0; k < a.snapshots.size(); ++k) {
    if (std::abs(a.snapshots[k].t - b.snapshots[k].t) > 1e-12 * std::max(1.0, a.snapshots[k].t)) {
      throw std::invalid_argument("limit_compare: snapshot times differ");
    }
  }
  LimitComparison out;
  out.gamma_a = a.params.gamma;
  out.gamma_b = b.params.gamma;
  const double vol = a.grid.cell_volume();
  const Boundary zero = Boundary::dirichlet(0.0);
  double grad_sq = 0.0;
  for (std::size_t k = 0; k + 1 < a.snapshots.size(); ++k) {
    const double w = a.snapshots[k + 1].t - a.snapshots[k].t;
    const State& sa = a.snapshots[k];
    const State& sb = b.snapshots[k];
    out.p_l1 += w * (sa.p.values() - sb.p.values()).abs().sum() * vol;
    out.c_l1 += w * (sa.c.values() - sb.c.values()).abs().sum() * vol;
    Field diff(a.grid, sa.p.values() - sb.p.values());
    grad_sq += w * integral(grad_norm_sq(diff, zero));
  }
  out.grad_p_l2 = std::sqrt(grad_sq);
  return out;
}

ReferenceComparison compare_with_reference(const RunOutcome& outcome, const ExperimentConfig& config) {
  ReferenceComparison out;
  const Trajectory& tr = *outcome.trajectory;
  out.gamma = tr.params.gamma;
  const double target = config.sweep.reference_fraction * tr.final_time();
  auto it = std::min_element(tr.snapshots.begin(), tr.snapshots.end(),
                             [&](const State& x, const State& y) { return std::abs(x.t - target) < std::abs(y.t - target); });
  out.time = it->t;
  try {
    Reactions reactions(tr.params, config.reactions);
    auto ref = heleshaw_reference(it->p, it->c, reactions, config.sweep.positivity_threshold * tr.params.p_H);
    out.ok = ref.converged;
    if (!ref.converged) out.error = "fixed point did not converge within the iteration budget";
    out.error_l2 = l2_on_set(it->p, ref.pressure, ref.set);
    out.set_measure = ref.set.measure();
    out.saturation_mismatch = saturation_mismatch(ref.set, it->n, config.sweep.saturation_tolerance);
    out.iterations = ref.iterations;
    out.contraction = ref.contraction;
    out.residual_inf = ref.residual_inf;
  } catch (const std::exception& e) {
    out.ok = false;
    out.error = e.what();
  }
  return out;
}

std::vector<const SweepEntry*> SweepReport::successes() const {
  std::vector<const SweepEntry*> out;
  for (const auto& e : entries) {
    if (e.ok) out.push_back(&e);
  }
  return out;
}

std::vector<double> SweepReport::collect(const std::function<double(const RunOutcome&)>& f) const {
  std::vector<double> out;
  for (const auto* e : successes()) out.push_back(f(*e->outcome));
  return out;
}

SweepReport gamma_sweep(const ExperimentConfig& base, std::span<const double> gammas, int workers) {
  SweepReport report;
  report.gammas.assign(gammas.begin(), gammas.end());
  report.entries.resize(gammas.size());
  for (std::size_t i = 0; i < gammas.size(); ++i) report.entries[i].gamma = gammas[i];

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < gammas.size(); i = next++) {
      SweepEntry& e = report.entries[i];
      try {
        e.outcome = std::make_shared<const RunOutcome>(execute_run(base.with_gamma(gammas[i])));
        e.ok = true;
      } catch (const std::exception& ex) {
        e.error = ex.what();
      }
    }
  };
  const int n = std::max(1, std::min<int>(workers, int(gammas.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  auto ok = report.successes();
  std::vector<double> gs, comp, graph;
  for (const auto* e : ok) {
    gs.push_back(e->gamma);
    const auto& m = e->outcome->monitors;
    comp.push_back(m.complementarity ? std::abs(m.complementarity->rhs) : 0.0);
    graph.push_back(m.max_graph_residual);
  }
  if (ok.size() >= 3) {
    report.fitted = true;
    if (std::all_of(comp.begin(), comp.end(), [](double v) { return v > 0.0; })) report.complementarity_fit = fit_decay_exponent(gs, comp);
    if (std::all_of(graph.begin(), graph.end(), [](double v) { return v > 0.0; })) report.graph_fit = fit_decay_exponent(gs, graph);
  }
  for (std::size_t i = 0; i + 1 < ok.size(); ++i) {
    try {
      report.comparisons.push_back(limit_compare(*ok[i]->outcome->trajectory, *ok[i + 1]->outcome->trajectory));
    } catch (const std::exception&) {
      // grids or cadences differ between these runs; nothing to compare
    }
  }
  for (const auto* e : ok) report.references.push_back(compare_with_reference(*e->outcome, base));
  return report;
}

namespace {

std::string num(double v) { return format_number(v); }

std::string list(const std::vector<double>& v) {
  std::string out;
  for (double x : v) out += (out.empty() ? "" : ", ") + num(x);
  return "[" + out + "]";
}

Check uniformity(const std::string& name, const std::vector<double>& gammas, const std::vector<double>& values,
                 const UniformityCriteria& criteria, bool trend) {
  Check c{name, false, ""};
  if (values.size() < 2 || std::any_of(values.begin(), values.end(), [](double v) { return !(v > 0.0); })) {
    c.detail = "need at least 2 positive values, got " + list(values);
    return c;
  }
  const double band = band_ratio(values);
  c.passed = band <= criteria.max_band;
  c.detail = "values " + list(values) + ", band " + num(band);
  if (trend) {
    auto sp = spearman(gammas, values);
    c.passed = c.passed && sp.p_positive >= criteria.significance;
    c.detail += ", spearman rho " + num(sp.rho) + " (one-sided p " + num(sp.p_positive) + ")";
  }
  return c;
}

}  // namespace

std::vector<Check> sweep_checks(const SweepReport& report, const UniformityCriteria& criteria) {
  std::vector<Check> out;
  auto ok = report.successes();
  out.push_back({"all_runs_succeeded", ok.size() == report.entries.size(),
                 std::to_string(ok.size()) + " of " + std::to_string(report.entries.size()) + " runs succeeded"});
  for (const auto& e : report.entries) {
    if (!e.ok) out.back().detail += "; gamma " + num(e.gamma) + ": " + e.error;
  }

  // per-run assertions, one line per check name across the sweep
  std::vector<std::string> names;
  std::map<std::string, Check> merged;
  for (const auto* e : ok) {
    for (const auto& c : run_checks(*e->outcome)) {
      if (!merged.count(c.name)) {
        names.push_back(c.name);
        merged[c.name] = {c.name, true, ""};
      }
      Check& m = merged[c.name];
      m.passed = m.passed && c.passed;
      if (!c.passed) m.detail += (m.detail.empty() ? "" : "; ") + ("gamma " + num(e->gamma) + ": " + c.detail);
    }
  }
  for (const auto& n : names) {
    Check c = merged[n];
    if (c.passed) c.detail = "holds for every gamma";
    out.push_back(c);
  }

  std::vector<double> gs;
  for (const auto* e : ok) gs.push_back(e->gamma);
  out.push_back(uniformity("uniform_ab_negative_l3", gs, report.collect([](const RunOutcome& o) { return o.monitors.totals.ab_negative_l3; }),
                           criteria, true));
  out.push_back(uniformity("uniform_grad_p_l4", gs, report.collect([](const RunOutcome& o) { return o.monitors.totals.grad_p_l4; }),
                           criteria, true));
  out.push_back(uniformity("uniform_weighted_ab_l3", gs,
                           report.collect([](const RunOutcome& o) { return o.monitors.totals.weighted_ab_l3; }), criteria, false));

  {
    Check c{"complementarity_decay", false, "needs complementarity monitors on at least 2 runs"};
    auto rhs = report.collect([](const RunOutcome& o) { return o.monitors.complementarity ? std::abs(o.monitors.complementarity->rhs) : -1.0; });
    if (rhs.size() >= 2 && rhs.front() >= 0.0 && rhs.back() >= 0.0) {
      c.passed = rhs.back() <= rhs.front() / 4.0;
      c.detail = "|rhs(gamma=" + num(gs.back()) + ")| = " + num(rhs.back()) + " vs |rhs(gamma=" + num(gs.front()) + ")|/4 = " + num(rhs.front() / 4.0);
    }
    out.push_back(c);
  }
  {
    Check c{"graph_decay_exponent", false, "fewer than 3 successful runs"};
    if (report.fitted) {
      const auto& f = report.graph_fit;
      c.passed = f.exponent >= 0.8 && f.exponent <= 1.2;
      c.detail = "exponent " + num(f.exponent) + " (95% CI " + num(f.ci_low) + " .. " + num(f.ci_high) + ")";
    }
    out.push_back(c);
  }
  {
    Check c{"heleshaw_reference", false, "needs reference solutions for at least 2 runs"};
    const auto& refs = report.references;
    if (refs.size() >= 2) {
      bool solver_ok = std::all_of(refs.begin(), refs.end(), [](const ReferenceComparison& r) {
        return r.ok && r.iterations <= 500 && r.contraction < 1.0;
      });
      const auto& hi = refs.back();
      const auto& lo = refs[refs.size() - 2];
      c.passed = solver_ok && hi.error_l2 <= lo.error_l2;
      c.detail = "L2(O) error " + num(hi.error_l2) + " at gamma=" + num(hi.gamma) + " vs " + num(lo.error_l2) + " at gamma=" + num(lo.gamma);
      for (const auto& r : refs) {
        c.detail += "; gamma " + num(r.gamma) + ": " + std::to_string(r.iterations) + " iterations, contraction " + num(r.contraction);
        if (!r.error.empty()) c.detail += " (" + r.error + ")";
      }
    }
    out.push_back(c);
  }
  return out;
}

std::vector<Check> sweep_observations(const SweepReport& report) {
  std::vector<Check> out;
  auto ok = report.successes();
  auto rhs = report.collect([](const RunOutcome& o) { return o.monitors.complementarity ? std::abs(o.monitors.complementarity->rhs) : 0.0; });
  bool mono = true;
  for (std::size_t i = 1; i < rhs.size(); ++i) mono = mono && rhs[i] <= 1.1 * rhs[i - 1];
  out.push_back({"complementarity_monotone", mono, "|rhs| along gamma: " + list(rhs)});
  if (report.fitted) {
    const auto& f = report.complementarity_fit;
    out.push_back({"complementarity_fit", f.exponent > 0.0,
                   "decay exponent " + num(f.exponent) + " (95% CI " + num(f.ci_low) + " .. " + num(f.ci_high) + ")"});
  }
  std::vector<double> pl1, gl2;
  for (const auto& c : report.comparisons) {
    pl1.push_back(c.p_l1);
    gl2.push_back(c.grad_p_l2);
  }
  auto decreasing = [](const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i) {
      if (!(v[i] < v[i - 1])) return false;
    }
    return !v.empty();
  };
  out.push_back({"cauchy_p_l1", decreasing(pl1), "|p_a - p_b|_L1 along pairs: " + list(pl1)});
  out.push_back({"cauchy_grad_p_l2", decreasing(gl2), "|grad p_a - grad p_b|_L2 along pairs: " + list(gl2)});
  std::vector<double> mismatch;
  for (const auto& r : report.references) mismatch.push_back(r.saturation_mismatch);
  out.push_back({"saturation_mismatch", true, "|O sym-diff {n ~ 1}| per gamma: " + list(mismatch)});
  return out;
}

std::vector<fs::path> write_sweep_outputs(const SweepReport& report, const fs::path& root) {
  fs::create_directories(root);
  std::vector<fs::path> dirs;
  std::vector<std::vector<double>> rows;
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& e : report.entries) {
    nlohmann::json jr{{"gamma", e.gamma}, {"ok", e.ok}};
    if (!e.ok) {
      jr["error"] = e.error;
      runs.push_back(jr);
      continue;
    }
    auto dir = write_run_outputs(*e.outcome, root);
    dirs.push_back(dir);
    jr["directory"] = dir.filename().string();
    runs.push_back(jr);
    const auto& m = e.outcome->monitors;
    const auto& t = m.totals;
    const double rhs = m.complementarity ? m.complementarity->rhs : 0.0;
    const double lhs = m.complementarity ? m.complementarity->lhs : 0.0;
    rows.push_back({e.gamma, rhs, lhs, m.max_graph_residual, t.ab_negative_l3, t.weighted_ab_l3, t.grad_p_l4, t.laplacian_l1,
                    t.pressure_defect, e.outcome->runtime_seconds});
  }
  write_csv(root / "sweep.csv",
            {"gamma", "complementarity_rhs", "complementarity_lhs", "graph_residual", "ab_negative_l3", "weighted_ab_l3",
             "grad_p_l4", "laplacian_l1", "pressure_defect", "runtime_seconds"},
            rows);

  nlohmann::json j;
  j["version"] = version();
  j["gammas"] = report.gammas;
  j["runs"] = runs;
  j["fitted"] = report.fitted;
  if (report.fitted) {
    auto fit = [](const DecayFit& f) {
      return nlohmann::json{{"exponent", f.exponent}, {"ci_low", f.ci_low}, {"ci_high", f.ci_high}, {"residual_rms", f.residual_rms}};
    };
    j["complementarity_fit"] = fit(report.complementarity_fit);
    j["graph_fit"] = fit(report.graph_fit);
  } else {
    j["flag"] = "fewer than 3 successful runs; no decay fits";
  }
  j["comparisons"] = nlohmann::json::array();
  for (const auto& c : report.comparisons) {
    j["comparisons"].push_back(
        {{"gamma_a", c.gamma_a}, {"gamma_b", c.gamma_b}, {"p_l1", c.p_l1}, {"grad_p_l2", c.grad_p_l2}, {"c_l1", c.c_l1}});
  }
  j["references"] = nlohmann::json::array();
  for (const auto& r : report.references) {
    j["references"].push_back({{"gamma", r.gamma},
                               {"time", r.time},
                               {"ok", r.ok},
                               {"error", r.error},
                               {"error_l2", r.error_l2},
                               {"set_measure", r.set_measure},
                               {"saturation_mismatch", r.saturation_mismatch},
                               {"iterations", r.iterations},
                               {"contraction", r.contraction},
                               {"residual_inf", r.residual_inf}});
  }
  std::ofstream out(root / "sweep.json");
  out << j.dump(2) << '\n';
  return dirs;
}

}  // namespace hsl
