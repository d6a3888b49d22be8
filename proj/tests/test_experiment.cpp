#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hsl/experiment.hpp"

using namespace hsl;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.model.gamma = 20.0;
  c.grid = Grid(2, 2.0, 30);
  c.initial.builder = DensityBuilder::pressure_plateau;
  c.initial.theta = 0.2;
  c.initial.radius = 0.5;
  c.initial.edge_width = 0.3;
  c.initial.nutrient = NutrientProfile::deficit;
  c.run.final_time = 0.1;
  c.run.snapshot_interval = 5e-3;
  c.monitors.zeta_radius = 1.5;
  c.field_stride = 5;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("single run passes every per-run check") {
  auto out = execute_run(small_config());
  REQUIRE(out.trajectory);
  CHECK(out.trajectory->snapshots.size() == 21);
  CHECK(out.barrier_passed());
  for (const auto& c : run_checks(out)) CHECK_MESSAGE(c.passed, c.name << ": " << c.detail);
  REQUIRE(out.monitors.complementarity);
  const auto& comp = *out.monitors.complementarity;
  CHECK(comp.defect() <= 0.1 * std::abs(comp.rhs));
}

TEST_CASE("output directory layout and determinism") {
  auto root = fs::temp_directory_path() / "hsl_test_outputs";
  fs::remove_all(root);
  auto cfg = small_config();
  auto a = write_run_outputs(execute_run(cfg), root / "a");
  auto b = write_run_outputs(execute_run(cfg), root / "b");
  CHECK(a.filename() == "run-" + cfg.hash());
  for (const char* f : {"config.cfg", "VERSION", "manifest.json", "monitors.csv", "summary.json", "fields.bin", "fields.json",
                        "final.csv", "barrier.csv"}) {
    CHECK_MESSAGE(fs::exists(a / f), f);
  }
  CHECK(slurp(a / "monitors.csv") == slurp(b / "monitors.csv"));
  CHECK(slurp(a / "summary.json") == slurp(b / "summary.json"));
  CHECK(slurp(a / "fields.bin") == slurp(b / "fields.bin"));
  CHECK(slurp(a / "VERSION") == std::string(version()) + "\n");

  // the echoed config reproduces the run
  auto echoed = parse_config(a / "config.cfg");
  CHECK(echoed.hash() == cfg.hash());

  CHECK(write_report(root, root / "report.csv") == 2);
  auto summary = nlohmann::json::parse(slurp(b / "summary.json"));
  summary["version"] = "0.0.0-other";
  std::ofstream(b / "summary.json") << summary.dump();
  CHECK_THROWS_AS(write_report(root, root / "report.csv"), std::runtime_error);
  fs::remove_all(root);
}

TEST_CASE("containment is checked before running") {
  auto cfg = small_config();
  cfg.run.final_time = 5.0;
  CHECK_THROWS_AS(execute_run(cfg), ConfigError);
}

TEST_CASE("barenblatt refinement on a short horizon") {
  BarenblattStudy s;
  s.gammas = {3.0};
  s.cells = {100, 200, 400};
  s.final_time = 0.2;
  auto res = barenblatt_convergence(s);
  REQUIRE(res.size() == 1);
  REQUIRE(res[0].cases.size() == 3);
  CHECK(res[0].decreasing);
  CHECK(res[0].pairwise_orders.size() == 2);
  CHECK(res[0].fitted_order >= 0.8);
}

TEST_CASE("focusing study covers the default alpha grid") {
  FocusingSettings f;
  auto study = run_focusing(f);
  REQUIRE(study.results.size() == 6);
  std::vector<double> alphas;
  for (const auto& r : study.results) alphas.push_back(r.alpha);
  CHECK(alphas == std::vector<double>{2.0, 3.0, 3.5, 4.0, 4.5, 6.0});
  CHECK(study.law_within(0.1));
  auto dir = fs::temp_directory_path() / "hsl_test_focusing";
  write_focusing_outputs(study, dir);
  CHECK(fs::exists(dir / "trace.csv"));
  CHECK(fs::exists(dir / "integrability.csv"));
  fs::remove_all(dir);
}

TEST_CASE("number formatting round trips") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 6.02214076e23, -2.5}) {
    CHECK(std::stod(format_number(v)) == v);
  }
}
