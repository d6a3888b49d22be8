#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <string>

#include "hsl/config.hpp"

using namespace hsl;

namespace {

std::optional<std::string> no_env(const std::string&) { return std::nullopt; }

const char* kMinimal = R"(
[model]
gamma = 20

[grid]
dimension = 1
half_width = 2
cells = 100

[run]
final_time = 0.5
snapshot_interval = 1e-3
)";

bool mentions(const ConfigError& e, const std::string& key, const std::string& text) {
  for (const auto& i : e.issues()) {
    if (i.key == key && i.message.find(text) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("minimal config fills defaults") {
  auto c = parse_config_text(kMinimal, "<minimal>", no_env);
  CHECK(c.model.gamma == 20.0);
  CHECK(c.model.p_H == 1.0);
  CHECK(c.grid.cells == 100);
  CHECK(c.run.final_time == 0.5);
  CHECK(c.reactions.family == ReactionFamily::standard);
  CHECK(c.reactions.c2 == 0.5);
}

TEST_CASE("echo round trips and the hash is stable") {
  auto c = parse_config_text(kMinimal, "<minimal>", no_env);
  auto again = parse_config_text(c.echo(), "<echo>", no_env);
  CHECK(again.echo() == c.echo());
  CHECK(again.hash() == c.hash());
  CHECK(c.hash().size() == 16);
  auto other = c.with_gamma(40.0);
  CHECK(other.model.gamma == 40.0);
  CHECK(other.hash() != c.hash());
  for (const auto& key : config_keys()) CHECK(c.echo().find(key.substr(key.find('.') + 1)) != std::string::npos);
}

TEST_CASE("gamma below one is rejected") {
  try {
    parse_config_text("[model]\ngamma = 0.5\n", "<bad>", no_env);
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(mentions(e, "model.gamma", "gamma > 1 required"));
    CHECK(e.issues().front().line == 2);
  }
}

TEST_CASE("unknown, duplicate and malformed keys carry line numbers") {
  const char* text = "[model]\ngamma = 20\ngama = 3\ngamma = 30\n[grid]\ncells = many\n";
  try {
    parse_config_text(text, "<bad>", no_env);
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    std::map<std::string, int> lines;
    for (const auto& i : e.issues()) lines[i.message.substr(0, 9)] = i.line;
    CHECK(mentions(e, "model.gama", "unknown key"));
    CHECK(mentions(e, "model.gamma", "duplicate"));
    bool typed = false;
    for (const auto& i : e.issues()) typed = typed || (i.key == "grid.cells" && i.line == 6);
    CHECK(typed);
    CHECK(std::string(e.what()).find("<bad>") != std::string::npos);
  }
}

TEST_CASE("cadence is limited by the CFL estimate") {
  // h = 0.04, gamma = 20: dt ~ 0.4 * 0.0016 / 40 = 1.6e-5, limit 1.6e-2
  auto c = parse_config_text(kMinimal, "<minimal>", no_env);
  CHECK(cfl_estimate(c, 20.0) == doctest::Approx(1.6e-5));
  std::string slow = std::string(kMinimal) + "";
  slow.replace(slow.find("snapshot_interval = 1e-3"), 24, "snapshot_interval = 0.05");
  try {
    parse_config_text(slow, "<slow>", no_env);
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(mentions(e, "run.snapshot_interval", "monitors module"));
  }
}

TEST_CASE("environment overrides") {
  auto env = [](const std::string& name) -> std::optional<std::string> {
    if (name == "HSL_MODEL_GAMMA") return "30";
    if (name == "HSL_SWEEP_GAMMAS") return "10, 20";
    return std::nullopt;
  };
  auto c = parse_config_text(kMinimal, "<minimal>", env);
  CHECK(c.model.gamma == 30.0);
  CHECK(c.sweep.gammas == std::vector<double>{10.0, 20.0});
  CHECK(c.max_gamma() == 30.0);

  auto bad = [](const std::string& name) -> std::optional<std::string> {
    if (name == "HSL_GRID_CELLS") return "x";
    return std::nullopt;
  };
  CHECK_THROWS_AS(parse_config_text(kMinimal, "<minimal>", bad), ConfigError);
}

TEST_CASE("whole-config invariants") {
  auto c = parse_config_text(kMinimal, "<minimal>", no_env);
  c.sweep.gammas = {20.0, 10.0};
  CHECK_THROWS_AS(validate_config(c), ConfigError);
  c.sweep.gammas = {10.0, 20.0};
  CHECK_NOTHROW(validate_config(c));
  c.monitors.zeta_radius = 5.0;
  CHECK_THROWS_AS(validate_config(c), ConfigError);
  c.monitors.zeta_radius = 1.0;
  c.reactions.c2 = 0.0;
  CHECK_THROWS_AS(validate_config(c), ConfigError);
  c.reactions = ReactionSpec::inert();
  CHECK_NOTHROW(validate_config(c));
}

TEST_CASE("comments and section syntax") {
  const char* text = "# header\n[model] \n gamma = 12 ; trailing\n\n[run]\nfinal_time=0.1\nsnapshot_interval = 1e-3\n";
  auto c = parse_config_text(text, "<c>", no_env);
  CHECK(c.model.gamma == 12.0);
  CHECK_THROWS_AS(parse_config_text("gamma = 3\n", "<c>", no_env), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[model\ngamma = 3\n", "<c>", no_env), ConfigError);
}
