#include "hsl/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "hsl/field_io.hpp"
#include "hsl/stats.hpp"

#ifndef HSL_VERSION
#define HSL_VERSION "0.0.0"
#endif

namespace hsl {

namespace fs = std::filesystem;
using nlohmann::json;

const char* version() { return HSL_VERSION; }

Reactions make_reactions(const ExperimentConfig& config) { return Reactions(config.model, config.reactions); }

Grid make_grid(const ExperimentConfig& config) {
  return Grid(config.grid.dimension, config.grid.half_width, config.grid.cells);
}

State initial_state(const ExperimentConfig& config) {
  return build_initial_state(config.initial, make_grid(config), config.model);
}

void check_containment(const ExperimentConfig& config, const State& initial) {
  const Grid& g = initial.n.grid();
  const double growth0 = make_reactions(config).growth(0.0, config.model.c_B);
  std::vector<ConfigIssue> issues;
  if (growth0 > 0.0) {
    auto barrier = dominating_barrier(initial.n, initial.p, growth0);
    const double radius = barrier.radius(config.run.final_time);
    if (!(radius < g.half_width - g.spacing())) {
      std::ostringstream msg;
      msg << "support barrier radius " << radius << " at T=" << config.run.final_time << " does not fit inside the box of half width "
          << g.half_width;
      issues.push_back({0, "grid.half_width", msg.str()});
    }
  } else {
    for (Eigen::Index k = 0; k < g.size(); ++k) {
      if (g.on_boundary(k) && initial.n[k] > 1e-12) {
        issues.push_back({0, "grid.half_width", "initial support touches the box boundary"});
        break;
      }
    }
  }
  if (!issues.empty()) throw ConfigError("<containment>", std::move(issues));
}

bool RunOutcome::barrier_passed() const {
  return std::all_of(barrier_rows.begin(), barrier_rows.end(), [](const BarrierSnapshot& b) { return b.passed(); });
}

RunOutcome execute_run(const ExperimentConfig& config) {
  validate_config(config);
  RunOutcome out;
  out.config = config;
  const Reactions reactions = make_reactions(config);
  State init = initial_state(config);
  check_containment(config, init);
  out.initial = describe_initial(init, config.model.c_B);

  auto start = std::chrono::steady_clock::now();
  out.trajectory = std::make_shared<const Trajectory>(run(init, reactions, config.run));
  out.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  MonitorOptions options;
  options.aronson_benilan = config.monitors.aronson_benilan;
  if (config.monitors.complementarity && config.run.final_time > 0.0) {
    options.zeta = config.monitors.test_function(config.run.final_time);
  }
  out.monitors = direct_estimates(*out.trajectory, reactions, options);

  const double growth0 = reactions.growth(0.0, config.model.c_B);
  if (growth0 > 0.0) {
    out.barrier = dominating_barrier(init.n, init.p, growth0);
    out.barrier_rows = barrier_check(out.trajectory->snapshots, *out.barrier);
  }
  return out;
}

std::vector<Check> run_checks(const RunOutcome& o) {
  std::vector<Check> checks;
  const Trajectory& tr = *o.trajectory;
  const ModelParams& mp = tr.params;
  auto add = [&](std::string name, bool ok, std::string detail) { checks.push_back({std::move(name), ok, std::move(detail)}); };
  auto str = [](double v) { return format_number(v); };

  double n_min = 0.0, n_max = 0.0, c_min = mp.c_B, c_max = 0.0;
  for (const auto& s : tr.snapshots) {
    n_min = std::min(n_min, s.n.values().minCoeff());
    n_max = std::max(n_max, s.n.values().maxCoeff());
    c_min = std::min(c_min, s.c.values().minCoeff());
    c_max = std::max(c_max, s.c.values().maxCoeff());
  }
  add("density_bounds", n_min >= 0.0 && n_max <= mp.n_H(), "n in [" + str(n_min) + ", " + str(n_max) + "], n_H=" + str(mp.n_H()));
  const double c_tol = 1e-9 * mp.c_B;
  add("nutrient_bounds", c_min >= -c_tol && c_max <= mp.c_B + c_tol, "c in [" + str(c_min) + ", " + str(c_max) + "]");
  const double clip_ratio = tr.initial_mass > 0.0 ? tr.clipped_mass / tr.initial_mass : tr.clipped_mass;
  add("clip_accounting", clip_ratio <= 1e-6, "clipped/initial mass = " + str(clip_ratio));
  add("pressure_l1_bound", o.monitors.pressure_l1_bound(), "|p|_1 <= p_H^((gamma-1)/gamma) |n|_1 on every snapshot");
  add("nutrient_inequality", o.monitors.nutrient_inequality(mp.c_B),
      "(1/4) " + str(o.monitors.totals.grad_c_l4) + " <= (9/2) c_B^2 " + str(o.monitors.totals.laplacian_c_l2_sq));
  if (o.monitors.complementarity) {
    const auto& cr = *o.monitors.complementarity;
    add("complementarity_lhs_bound", cr.lhs_within_bound(), "|lhs| = " + str(std::abs(cr.lhs)) + " <= " + str(cr.lhs_bound));
  }
  const double h = tr.grid.spacing();
  const double graph_bound = graph_product_bound(mp.gamma) + 10.0 * h * h;
  add("graph_residual", o.monitors.max_graph_residual <= graph_bound,
      "max p(1-n) = " + str(o.monitors.max_graph_residual) + " <= " + str(graph_bound));
  if (o.barrier) {
    std::string detail = "radius(T) = " + str(o.barrier->radius(tr.final_time()));
    for (const auto& b : o.barrier_rows) {
      if (!b.passed()) {
        detail = "support " + str(b.support_radius) + " outside barrier radius " + str(b.radius) + " at t=" + str(b.t);
        break;
      }
    }
    add("support_barrier", o.barrier_passed(), detail);
  }
  add("weight_gradient_bound", o.monitors.weight_gradient_ratio <= 1.0,
      "max |grad Phi|/Phi = " + str(o.monitors.weight_gradient_ratio) + ", C_Phi = " + str(o.monitors.weight_laplacian_constant));
  return checks;
}

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void write_csv(const fs::path& path, const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_number(row[i]);
    out << '\n';
  }
}

namespace {

json accumulators_json(const Accumulators& a) {
  return {{"ab_negative_l3", a.ab_negative_l3},
          {"weighted_ab_l3", a.weighted_ab_l3},
          {"laplacian_l1", a.laplacian_l1},
          {"grad_p_l4", a.grad_p_l4},
          {"grad_p_l2_sq", a.grad_p_l2_sq},
          {"p_l1_spacetime", a.p_l1},
          {"pressure_defect", a.pressure_defect},
          {"hessian", a.hessian},
          {"grad_c_l4", a.grad_c_l4},
          {"laplacian_c_l2_sq", a.laplacian_c_l2_sq},
          {"dt_c_l2_sq", a.dt_c_l2_sq},
          {"dt_n_l1", a.dt_n_l1},
          {"dt_p_l1", a.dt_p_l1}};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << text;
}

}  // namespace

fs::path write_run_outputs(const RunOutcome& o, const fs::path& root) {
  const Trajectory& tr = *o.trajectory;
  fs::path dir = root / ("run-" + o.config.hash());
  fs::create_directories(dir);

  write_text(dir / "config.cfg", o.config.echo());
  write_text(dir / "VERSION", std::string(version()) + "\n");

  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < o.monitors.rows.size(); ++k) {
    rows.push_back(monitor_csv_row(o.monitors.rows[k], o.monitors.running[k]));
  }
  write_csv(dir / "monitors.csv", monitor_csv_header(), rows);

  std::vector<NamedField> fields;
  const auto& snaps = tr.snapshots;
  for (std::size_t k = 0; k < snaps.size(); ++k) {
    if (k % std::size_t(o.config.field_stride) != 0 && k + 1 != snaps.size()) continue;
    fields.push_back({"n", snaps[k].t, snaps[k].n});
    fields.push_back({"p", snaps[k].t, snaps[k].p});
    fields.push_back({"c", snaps[k].t, snaps[k].c});
  }
  write_field_bundle(dir / "fields.bin", dir / "fields.json", fields);
  const State& last = snaps.back();
  std::vector<NamedField> final_fields{{"n", last.t, last.n}, {"p", last.t, last.p}, {"c", last.t, last.c}};
  write_fields_csv(dir / "final.csv", final_fields);

  if (o.barrier) {
    std::vector<std::vector<double>> brows;
    for (const auto& b : o.barrier_rows) brows.push_back({b.t, b.support_radius, b.radius, b.passed() ? 1.0 : 0.0});
    write_csv(dir / "barrier.csv", {"t", "support_radius", "barrier_radius", "inside"}, brows);
  }

  json summary;
  summary["version"] = version();
  summary["config_hash"] = o.config.hash();
  summary["gamma"] = tr.params.gamma;
  summary["grid"] = {{"dimension", tr.grid.dimension}, {"half_width", tr.grid.half_width}, {"cells", tr.grid.cells}};
  summary["final_time"] = tr.final_time();
  summary["steps"] = tr.steps.size();
  summary["snapshots"] = snaps.size();
  summary["min_step"] = tr.steps.empty() ? 0.0 : *std::min_element(tr.steps.begin(), tr.steps.end());
  summary["max_cg_iterations"] = tr.max_cg_iterations;
  summary["initial_mass"] = tr.initial_mass;
  summary["clipped_mass"] = tr.clipped_mass;
  summary["initial"] = {{"mass", o.initial.mass},
                        {"grad_p_l2", o.initial.grad_p_l2},
                        {"laplacian_p_l2", o.initial.laplacian_p_l2},
                        {"grad_c_l2", o.initial.grad_c_l2},
                        {"support_radius", o.initial.support_radius}};
  summary["totals"] = accumulators_json(o.monitors.totals);
  summary["max_graph_residual"] = o.monitors.max_graph_residual;
  summary["weight"] = {{"gradient_ratio", o.monitors.weight_gradient_ratio},
                       {"laplacian_constant", o.monitors.weight_laplacian_constant}};
  if (o.monitors.complementarity) {
    const auto& c = *o.monitors.complementarity;
    summary["complementarity"] = {{"lhs", c.lhs}, {"rhs", c.rhs}, {"lhs_bound", c.lhs_bound}, {"defect", c.defect()}};
  }
  if (o.barrier) {
    summary["barrier"] = {{"S0", o.barrier->S0},
                          {"growth_rate", o.barrier->growth_rate},
                          {"final_radius", o.barrier->radius(tr.final_time())},
                          {"passed", o.barrier_passed()}};
  }
  json checks = json::array();
  for (const auto& c : run_checks(o)) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  summary["checks"] = checks;
  write_text(dir / "summary.json", summary.dump(2) + "\n");
  write_text(dir / "timing.json", json{{"runtime_seconds", o.runtime_seconds}}.dump(2) + "\n");

  json manifest;
  manifest["version"] = version();
  manifest["config_hash"] = o.config.hash();
  manifest["files"] = {"config.cfg", "VERSION", "monitors.csv", "summary.json", "timing.json", "fields.bin", "fields.json", "final.csv"};
  if (o.barrier) manifest["files"].push_back("barrier.csv");
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
  return dir;
}

double barenblatt_l1_error(const State& state, const BarenblattParams& params) {
  const Field exact = barenblatt_cell_averages(state.n.grid(), state.t, params);
  return (state.n.values() - exact.values()).abs().sum() * state.n.grid().cell_volume();
}

bool BarenblattResult::passed(double min_order, double max_seconds) const {
  return decreasing && fitted_order >= min_order && max_runtime <= max_seconds;
}

std::vector<BarenblattResult> barenblatt_convergence(const BarenblattStudy& study) {
  std::vector<BarenblattResult> out;
  for (double gamma : study.gammas) {
    BarenblattResult res;
    res.gamma = gamma;
    ModelParams mp;
    mp.gamma = gamma;
    Reactions reactions(mp, ReactionSpec::inert());
    InitialData init;
    init.builder = DensityBuilder::barenblatt;
    init.barenblatt_front = study.front;
    init.barenblatt_t0 = study.t0;
    const BarenblattParams exact = initial_barenblatt(init, gamma, 1);

    RunSettings rs;
    rs.final_time = study.final_time;
    rs.snapshot_interval = study.final_time;
    rs.cfl_safety = study.cfl_safety;
    std::vector<double> hs, errs;
    for (int cells : study.cells) {
      Grid grid(1, study.half_width, cells);
      State s0 = build_initial_state(init, grid, mp);
      auto start = std::chrono::steady_clock::now();
      Trajectory tr = run(s0, reactions, rs);
      BarenblattCase c;
      c.gamma = gamma;
      c.cells = cells;
      c.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      c.l1_error = barenblatt_l1_error(tr.snapshots.back(), exact);
      res.cases.push_back(c);
      res.max_runtime = std::max(res.max_runtime, c.runtime_seconds);
      hs.push_back(grid.spacing());
      errs.push_back(c.l1_error);
    }
    res.decreasing = true;
    for (std::size_t i = 1; i < errs.size(); ++i) {
      res.decreasing = res.decreasing && errs[i] < errs[i - 1];
      res.pairwise_orders.push_back(std::log(errs[i - 1] / errs[i]) / std::log(hs[i - 1] / hs[i]));
    }
    if (errs.size() >= 3) {
      // error ~ h^order, i.e. decay exponent in 1/h
      std::vector<double> inv_h;
      for (double h : hs) inv_h.push_back(1.0 / h);
      res.fitted_order = fit_decay_exponent(inv_h, errs).exponent;
    } else if (!res.pairwise_orders.empty()) {
      res.fitted_order = res.pairwise_orders.front();
    }
    out.push_back(std::move(res));
  }
  return out;
}

std::vector<Check> focusing_checks(const FocusingStudy& study, double max_seconds) {
  std::vector<Check> checks;
  for (const auto& r : study.results) {
    Integrability expected = r.alpha <= 4.0 ? Integrability::convergent : Integrability::divergent;
    checks.push_back({"alpha=" + format_number(r.alpha), r.verdict == expected,
                      to_string(r.verdict) + " (expected " + to_string(expected) + ", tail log slope " +
                          format_number(r.tail_log_slope) + ")"});
  }
  double worst = 0.0;
  for (double q : study.law_ratios) worst = std::max(worst, std::abs(q - 1.0));
  checks.push_back({"asymptotic_law", !study.law_ratios.empty() && study.law_within(0.1),
                    std::to_string(study.law_ratios.size()) + " ratios, max deviation " + format_number(worst)});
  checks.push_back({"runtime", study.runtime_seconds <= max_seconds, format_number(study.runtime_seconds) + " s"});
  return checks;
}

bool FocusingStudy::law_within(double tolerance) const {
  if (law_ratios.empty()) return false;
  return std::all_of(law_ratios.begin(), law_ratios.end(), [&](double r) { return std::abs(r - 1.0) <= tolerance; });
}

FocusingStudy run_focusing(const FocusingSettings& settings) {
  FocusingStudy study;
  auto start = std::chrono::steady_clock::now();
  const double R1 = settings.outer_radius;
  study.trace = evolve_hole(settings.initial_fraction * R1, R1, settings.hole);
  for (double alpha : settings.alphas) study.results.push_back(integrability_exponent(study.trace, alpha, settings.cutoffs));
  study.law_ratios = asymptotic_law_ratios(study.trace, 1e-2);
  study.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return study;
}

void write_focusing_outputs(const FocusingStudy& study, const fs::path& directory) {
  fs::create_directories(directory);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < study.trace.t.size(); ++i) {
    rows.push_back({study.trace.t[i], study.trace.R[i], study.trace.a[i], study.trace.b[i]});
  }
  write_csv(directory / "trace.csv", {"t", "R", "a", "b"}, rows);

  std::ofstream out(directory / "integrability.csv");
  if (!out) throw std::runtime_error("cannot write integrability table in " + directory.string());
  out << "alpha,epsilon,radius,value,verdict\n";
  for (const auto& r : study.results) {
    for (const auto& row : r.table) {
      out << format_number(r.alpha) << ',' << format_number(row.epsilon) << ',' << format_number(row.radius) << ','
          << format_number(row.value) << ',' << to_string(r.verdict) << '\n';
    }
  }
}

std::size_t write_report(const fs::path& root, const fs::path& csv_path) {
  std::vector<fs::path> summaries;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file() && entry.path().filename() == "summary.json") summaries.push_back(entry.path());
  }
  std::sort(summaries.begin(), summaries.end());

  std::set<std::string> versions;
  std::vector<std::map<std::string, double>> records;
  std::vector<std::string> names;
  std::set<std::string> columns;
  for (const auto& path : summaries) {
    std::ifstream in(path);
    json j = json::parse(in);
    versions.insert(j.value("version", "unknown"));
    std::map<std::string, double> rec;
    for (auto& [key, value] : j.items()) {
      if (value.is_number()) {
        rec[key] = value.get<double>();
      } else if (value.is_boolean()) {
        rec[key] = value.get<bool>() ? 1.0 : 0.0;
      } else if (value.is_object()) {
        for (auto& [sub, v] : value.items()) {
          if (v.is_number()) rec[key + "." + sub] = v.get<double>();
          if (v.is_boolean()) rec[key + "." + sub] = v.get<bool>() ? 1.0 : 0.0;
        }
      }
    }
    for (const auto& [k, v] : rec) columns.insert(k);
    records.push_back(std::move(rec));
    names.push_back(fs::relative(path.parent_path(), root).string());
  }
  if (versions.size() > 1) {
    std::string list;
    for (const auto& v : versions) list += (list.empty() ? "" : ", ") + v;
    throw std::runtime_error("refusing to aggregate summaries from different versions: " + list);
  }

  std::ofstream out(csv_path);
  if (!out) throw std::runtime_error("cannot open " + csv_path.string());
  out << "run";
  for (const auto& c : columns) out << ',' << c;
  out << '\n';
  for (std::size_t i = 0; i < records.size(); ++i) {
    out << names[i];
    for (const auto& c : columns) {
      out << ',';
      if (auto it = records[i].find(c); it != records[i].end()) out << format_number(it->second);
    }
    out << '\n';
  }

  // Long format for plotting: one (run, gamma, quantity, value) per line.
  fs::path long_path = csv_path;
  long_path.replace_filename(csv_path.stem().string() + "_long.csv");
  std::ofstream lng(long_path);
  if (!lng) throw std::runtime_error("cannot open " + long_path.string());
  lng << "run,gamma,quantity,value\n";
  for (std::size_t i = 0; i < records.size(); ++i) {
    const double gamma = records[i].count("gamma") ? records[i].at("gamma") : 0.0;
    for (const auto& [k, v] : records[i]) lng << names[i] << ',' << format_number(gamma) << ',' << k << ',' << format_number(v) << '\n';
  }
  return records.size();
}

}  // namespace hsl
