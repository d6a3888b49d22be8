// hsl: command-line driver for runs, sweeps and the analytic studies.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "hsl/config.hpp"
#include "hsl/experiment.hpp"
#include "hsl/limit.hpp"

namespace fs = std::filesystem;
using namespace hsl;

namespace {

struct Options {
  std::string config;
  std::string out;
  int workers = 1;
  bool assert_checks = false;
};

ExperimentConfig load(const Options& o) {
  ExperimentConfig cfg = o.config.empty() ? ExperimentConfig{} : parse_config(o.config);
  if (!o.out.empty()) cfg.output_directory = o.out;
  return cfg;
}

bool print_checks(const std::vector<Check>& checks, const char* prefix = "check") {
  bool all = true;
  for (const auto& c : checks) {
    std::printf("%s %-28s %s  %s\n", prefix, c.name.c_str(), c.passed ? "ok  " : "FAIL", c.detail.c_str());
    all = all && c.passed;
  }
  return all;
}

int verdict(bool passed, const Options& o) {
  if (!passed) std::printf("some checks failed%s\n", o.assert_checks ? "" : " (not asserted)");
  return (o.assert_checks && !passed) ? 1 : 0;
}

int cmd_validate(const Options& o) {
  ExperimentConfig cfg = load(o);
  validate_config(cfg, o.config.empty() ? "<defaults>" : o.config);
  std::printf("config %s  hash %s\n", o.config.empty() ? "<defaults>" : o.config.c_str(), cfg.hash().c_str());

  bool ok = true;
  if (cfg.reactions.family == ReactionFamily::inert) {
    std::printf("reactions: inert family (G = H = K = 0), structural checks skipped\n");
  } else {
    auto report = validate(cfg.model, cfg.reactions);
    std::printf("reactions: %zu samples, measured beta %.6g (declared %.6g)\n", report.samples, report.measured_beta,
                cfg.model.beta);
    for (const auto& v : report.violations) {
      std::printf("  violated: %s at p=%.6g c=%.6g (value %.6g)\n", v.condition.c_str(), v.p, v.c, v.value);
    }
    ok = report.passed;
  }
  std::printf("aronson-benilan threshold gamma > %.6g: %s\n", ab_gamma_threshold(cfg.grid.dimension),
              cfg.model.gamma > ab_gamma_threshold(cfg.grid.dimension) ? "yes" : "no");
  for (double g : {cfg.model.gamma, cfg.max_gamma()}) {
    std::printf("cfl estimate at gamma=%g: %.6g\n", g, cfl_estimate(cfg, g));
  }
  State init = initial_state(cfg);
  check_containment(cfg, init);
  auto rep = describe_initial(init, cfg.model.c_B);
  std::printf("initial data: mass %.6g, |grad p|_2 %.6g, |lap p|_2 %.6g, |grad c|_2 %.6g, support radius %.6g\n",
              rep.mass, rep.grad_p_l2, rep.laplacian_p_l2, rep.grad_c_l2, rep.support_radius);
  std::printf("assumptions %s\n", ok ? "hold" : "violated");
  return ok ? 0 : 1;
}

int cmd_run(const Options& o) {
  ExperimentConfig cfg = load(o);
  RunOutcome outcome;
  try {
    outcome = execute_run(cfg);
  } catch (const SolverError& e) {
    std::fprintf(stderr, "solver failed: %s\n", e.what());
    if (auto partial = e.partial(); partial && !partial->snapshots.empty()) {
      RunOutcome p;
      p.config = cfg;
      p.trajectory = partial;
      p.monitors = direct_estimates(*partial, make_reactions(cfg), MonitorOptions{std::nullopt, false});
      fs::path dir = write_run_outputs(p, cfg.output_directory);
      std::ofstream(dir / "error.txt") << e.what() << "\n";
      std::fprintf(stderr, "partial outputs in %s\n", dir.string().c_str());
    }
    return 2;
  }
  fs::path dir = write_run_outputs(outcome, cfg.output_directory);
  std::printf("run gamma=%g: %ld steps, %zu snapshots, %.3f s -> %s\n", cfg.model.gamma, long(outcome.trajectory->steps.size()),
              outcome.trajectory->snapshots.size(), outcome.runtime_seconds, dir.string().c_str());
  const auto& t = outcome.monitors.totals;
  std::printf("ab_negative_l3 %.6g  weighted %.6g  grad_p_l4 %.6g  max graph residual %.6g\n", t.ab_negative_l3,
              t.weighted_ab_l3, t.grad_p_l4, outcome.monitors.max_graph_residual);
  if (const auto& c = outcome.monitors.complementarity) {
    std::printf("complementarity lhs %.6g (bound %.6g)  rhs %.6g\n", c->lhs, c->lhs_bound, c->rhs);
  }
  return verdict(print_checks(run_checks(outcome)), o);
}

int cmd_sweep(const Options& o) {
  ExperimentConfig cfg = load(o);
  std::vector<double> gammas = cfg.sweep.gammas.empty() ? std::vector<double>{cfg.model.gamma} : cfg.sweep.gammas;
  auto start = std::chrono::steady_clock::now();
  SweepReport report = gamma_sweep(cfg, gammas, o.workers);
  double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  auto dirs = write_sweep_outputs(report, cfg.output_directory);
  std::printf("sweep over %zu gammas, %zu succeeded, %.1f s, %zu run directories in %s\n", gammas.size(),
              report.successes().size(), seconds, dirs.size(), cfg.output_directory.string().c_str());
  for (const auto& e : report.entries) {
    if (!e.ok) {
      std::printf("  gamma %g failed: %s\n", e.gamma, e.error.c_str());
      continue;
    }
    const auto& m = e.outcome->monitors;
    std::printf("  gamma %-4g ab3 %-12.6g wab3 %-12.6g gp4 %-12.6g graph %-12.6g rhs %.6g\n", e.gamma,
                m.totals.ab_negative_l3, m.totals.weighted_ab_l3, m.totals.grad_p_l4, m.max_graph_residual,
                m.complementarity ? m.complementarity->rhs : 0.0);
  }
  print_checks(sweep_observations(report), "note ");
  return verdict(print_checks(sweep_checks(report)), o);
}

int cmd_focusing(const Options& o) {
  ExperimentConfig cfg = load(o);
  FocusingStudy study = run_focusing(cfg.focusing);
  fs::path dir = cfg.output_directory / "focusing";
  write_focusing_outputs(study, dir);
  std::printf("focusing: R1 %g, extinction time %.10g, %zu trace points -> %s\n", study.trace.R1,
              study.trace.extinction_time, study.trace.t.size(), dir.string().c_str());
  std::printf("%-8s %-14s %-10s %s\n", "alpha", "verdict", "cutoffs", "last I_eps");
  for (const auto& r : study.results) {
    std::printf("%-8g %-14s %-10zu %.6g\n", r.alpha, to_string(r.verdict).c_str(), r.table.size(),
                r.table.empty() ? 0.0 : r.table.back().value);
  }
  return verdict(print_checks(focusing_checks(study)), o);
}

int cmd_barenblatt(const Options& o) {
  ExperimentConfig cfg = load(o);
  auto results = barenblatt_convergence(cfg.barenblatt);
  std::vector<std::vector<double>> rows;
  std::vector<Check> checks;
  for (const auto& r : results) {
    for (const auto& c : r.cases) {
      rows.push_back({c.gamma, double(c.cells), c.l1_error, c.runtime_seconds});
      std::printf("gamma %-4g N %-5d L1 error %-12.6g %.2f s\n", c.gamma, c.cells, c.l1_error, c.runtime_seconds);
    }
    checks.push_back({"barenblatt_gamma=" + format_number(r.gamma), r.passed(),
                      "fitted order " + format_number(r.fitted_order) + (r.decreasing ? ", decreasing" : ", not decreasing") +
                          ", max runtime " + format_number(r.max_runtime) + " s"});
  }
  fs::create_directories(cfg.output_directory);
  write_csv(cfg.output_directory / "barenblatt.csv", {"gamma", "cells", "l1_error", "runtime_seconds"}, rows);
  return verdict(print_checks(checks), o);
}

int cmd_report(const Options& o) {
  fs::path root = o.out.empty() ? fs::path("runs") : fs::path(o.out);
  fs::path csv = root / "report.csv";
  std::size_t n = write_report(root, csv);
  std::printf("aggregated %zu summaries into %s\n", n, csv.string().c_str());
  return n > 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compressible tumor growth simulator and incompressible-limit monitors"};
  app.set_version_flag("--version", std::string(version()));
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("--config", o.config, "experiment config file")->check(CLI::ExistingFile);
    if (config_required) opt->required();
    sub->add_option("--out", o.out, "output root directory (overrides output.directory)");
    sub->add_flag("--assert", o.assert_checks, "exit nonzero when an acceptance check fails");
  };
  auto* validate_cmd = app.add_subcommand("validate", "parse, validate and print the assumption report");
  validate_cmd->add_option("--config", o.config, "experiment config file")->check(CLI::ExistingFile);
  auto* run_cmd = app.add_subcommand("run", "one trajectory plus monitors");
  add_common(run_cmd, true);
  auto* sweep_cmd = app.add_subcommand("sweep", "gamma sweep with limit comparisons");
  add_common(sweep_cmd, true);
  sweep_cmd->add_option("--workers", o.workers, "worker threads")->check(CLI::PositiveNumber);
  auto* focusing_cmd = app.add_subcommand("focusing", "hole-filling trace and gradient integrability table");
  add_common(focusing_cmd, false);
  auto* barenblatt_cmd = app.add_subcommand("barenblatt-convergence", "solver refinement against the Barenblatt solution");
  add_common(barenblatt_cmd, false);
  auto* report_cmd = app.add_subcommand("report", "aggregate summary.json files below --out into report.csv");
  report_cmd->add_option("--out", o.out, "root directory holding run directories");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate_cmd) return cmd_validate(o);
    if (*run_cmd) return cmd_run(o);
    if (*sweep_cmd) return cmd_sweep(o);
    if (*focusing_cmd) return cmd_focusing(o);
    if (*barenblatt_cmd) return cmd_barenblatt(o);
    if (*report_cmd) return cmd_report(o);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
