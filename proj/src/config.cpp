#include "hsl/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

namespace hsl {

namespace {

struct ParseFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(std::string_view v) {
  std::string s = trim(v);
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) throw ParseFailure("expected a number, got '" + s + "'");
  return out;
}

long to_integer(std::string_view v) {
  std::string s = trim(v);
  long out = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) throw ParseFailure("expected an integer, got '" + s + "'");
  return out;
}

bool to_bool(std::string_view v) {
  std::string s = trim(v);
  if (s == "true" || s == "yes" || s == "1") return true;
  if (s == "false" || s == "no" || s == "0") return false;
  throw ParseFailure("expected true or false, got '" + s + "'");
}

std::vector<double> to_doubles(std::string_view v) {
  std::vector<double> out;
  std::string s(v);
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;
    out.push_back(to_double(item));
  }
  return out;
}

std::vector<int> to_ints(std::string_view v) {
  std::vector<int> out;
  for (double d : to_doubles(v)) {
    if (d != std::floor(d)) throw ParseFailure("expected integers in the list");
    out.push_back(int(d));
  }
  return out;
}

std::string fmt(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

template <typename T>
std::string fmt_list(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    if constexpr (std::is_same_v<T, double>) {
      out += fmt(v[i]);
    } else {
      out += std::to_string(v[i]);
    }
  }
  return out;
}

std::string fmt_bool(bool b) { return b ? "true" : "false"; }

std::string builder_name(DensityBuilder b) {
  switch (b) {
    case DensityBuilder::plateau: return "plateau";
    case DensityBuilder::pressure_plateau: return "pressure_plateau";
    case DensityBuilder::barenblatt: return "barenblatt";
    case DensityBuilder::file: return "file";
  }
  return "plateau";
}

DensityBuilder builder_from(std::string_view v) {
  std::string s = trim(v);
  if (s == "plateau") return DensityBuilder::plateau;
  if (s == "pressure_plateau") return DensityBuilder::pressure_plateau;
  if (s == "barenblatt") return DensityBuilder::barenblatt;
  if (s == "file") return DensityBuilder::file;
  throw ParseFailure("unknown initial builder '" + s + "' (plateau, pressure_plateau, barenblatt, file)");
}

struct Key {
  std::string section;
  std::string name;
  std::function<void(ExperimentConfig&, std::string_view)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define HSL_DOUBLE(sec, key, member)                                                     \
  Key {                                                                                  \
    sec, key, [](ExperimentConfig& c, std::string_view v) { c.member = to_double(v); }, \
        [](const ExperimentConfig& c) { return fmt(c.member); }                          \
  }

const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      HSL_DOUBLE("model", "gamma", model.gamma),
      HSL_DOUBLE("model", "p_H", model.p_H),
      HSL_DOUBLE("model", "p_B", model.p_B),
      HSL_DOUBLE("model", "c_B", model.c_B),
      HSL_DOUBLE("model", "beta", model.beta),

      Key{"reaction", "family",
          [](ExperimentConfig& c, std::string_view v) {
            auto family = reaction_family_from_string(trim(v));
            if (family == ReactionFamily::custom) throw ParseFailure("custom reactions are only available through the library API");
            c.reactions.family = family;
          },
          [](const ExperimentConfig& c) { return to_string(c.reactions.family); }},
      HSL_DOUBLE("reaction", "g0", reactions.g0),
      HSL_DOUBLE("reaction", "c1", reactions.c1),
      HSL_DOUBLE("reaction", "c2", reactions.c2),
      HSL_DOUBLE("reaction", "c_star", reactions.c_star),

      Key{"grid", "dimension", [](ExperimentConfig& c, std::string_view v) { c.grid.dimension = int(to_integer(v)); },
          [](const ExperimentConfig& c) { return std::to_string(c.grid.dimension); }},
      HSL_DOUBLE("grid", "half_width", grid.half_width),
      Key{"grid", "cells", [](ExperimentConfig& c, std::string_view v) { c.grid.cells = int(to_integer(v)); },
          [](const ExperimentConfig& c) { return std::to_string(c.grid.cells); }},

      Key{"initial", "builder", [](ExperimentConfig& c, std::string_view v) { c.initial.builder = builder_from(v); },
          [](const ExperimentConfig& c) { return builder_name(c.initial.builder); }},
      HSL_DOUBLE("initial", "theta", initial.theta),
      HSL_DOUBLE("initial", "radius", initial.radius),
      HSL_DOUBLE("initial", "edge_width", initial.edge_width),
      HSL_DOUBLE("initial", "barenblatt_front", initial.barenblatt_front),
      HSL_DOUBLE("initial", "barenblatt_t0", initial.barenblatt_t0),
      Key{"initial", "file", [](ExperimentConfig& c, std::string_view v) { c.initial.file = trim(v); },
          [](const ExperimentConfig& c) { return c.initial.file.string(); }},
      Key{"initial", "nutrient",
          [](ExperimentConfig& c, std::string_view v) {
            std::string s = trim(v);
            if (s == "uniform") {
              c.initial.nutrient = NutrientProfile::uniform;
            } else if (s == "deficit") {
              c.initial.nutrient = NutrientProfile::deficit;
            } else {
              throw ParseFailure("unknown nutrient profile '" + s + "' (uniform, deficit)");
            }
          },
          [](const ExperimentConfig& c) {
            return std::string(c.initial.nutrient == NutrientProfile::uniform ? "uniform" : "deficit");
          }},
      HSL_DOUBLE("initial", "deficit_amplitude", initial.deficit_amplitude),
      HSL_DOUBLE("initial", "deficit_radius", initial.deficit_radius),

      HSL_DOUBLE("run", "final_time", run.final_time),
      HSL_DOUBLE("run", "snapshot_interval", run.snapshot_interval),
      HSL_DOUBLE("run", "cfl_safety", run.cfl_safety),
      HSL_DOUBLE("run", "max_step", run.max_step),
      Key{"run", "cg_max_iterations", [](ExperimentConfig& c, std::string_view v) { c.run.cg_max_iterations = int(to_integer(v)); },
          [](const ExperimentConfig& c) { return std::to_string(c.run.cg_max_iterations); }},
      HSL_DOUBLE("run", "cg_tolerance", run.cg_tolerance),
      Key{"run", "field_stride", [](ExperimentConfig& c, std::string_view v) { c.field_stride = int(to_integer(v)); },
          [](const ExperimentConfig& c) { return std::to_string(c.field_stride); }},

      Key{"monitors", "aronson_benilan", [](ExperimentConfig& c, std::string_view v) { c.monitors.aronson_benilan = to_bool(v); },
          [](const ExperimentConfig& c) { return fmt_bool(c.monitors.aronson_benilan); }},
      Key{"monitors", "complementarity", [](ExperimentConfig& c, std::string_view v) { c.monitors.complementarity = to_bool(v); },
          [](const ExperimentConfig& c) { return fmt_bool(c.monitors.complementarity); }},
      HSL_DOUBLE("monitors", "zeta_center_x", monitors.zeta_center[0]),
      HSL_DOUBLE("monitors", "zeta_center_y", monitors.zeta_center[1]),
      HSL_DOUBLE("monitors", "zeta_radius", monitors.zeta_radius),
      HSL_DOUBLE("monitors", "zeta_start", monitors.zeta_start),
      HSL_DOUBLE("monitors", "zeta_end", monitors.zeta_end),

      Key{"sweep", "gammas", [](ExperimentConfig& c, std::string_view v) { c.sweep.gammas = to_doubles(v); },
          [](const ExperimentConfig& c) { return fmt_list(c.sweep.gammas); }},
      HSL_DOUBLE("sweep", "reference_fraction", sweep.reference_fraction),
      HSL_DOUBLE("sweep", "positivity_threshold", sweep.positivity_threshold),
      HSL_DOUBLE("sweep", "saturation_tolerance", sweep.saturation_tolerance),

      HSL_DOUBLE("focusing", "outer_radius", focusing.outer_radius),
      HSL_DOUBLE("focusing", "initial_fraction", focusing.initial_fraction),
      Key{"focusing", "alphas", [](ExperimentConfig& c, std::string_view v) { c.focusing.alphas = to_doubles(v); },
          [](const ExperimentConfig& c) { return fmt_list(c.focusing.alphas); }},
      HSL_DOUBLE("focusing", "step_fraction", focusing.hole.step_fraction),
      HSL_DOUBLE("focusing", "tolerance", focusing.hole.tolerance),
      HSL_DOUBLE("focusing", "stop_fraction", focusing.hole.stop_fraction),
      HSL_DOUBLE("focusing", "cutoff_initial_fraction", focusing.cutoffs.initial_fraction),
      HSL_DOUBLE("focusing", "cutoff_ratio", focusing.cutoffs.ratio),

      Key{"barenblatt", "gammas", [](ExperimentConfig& c, std::string_view v) { c.barenblatt.gammas = to_doubles(v); },
          [](const ExperimentConfig& c) { return fmt_list(c.barenblatt.gammas); }},
      Key{"barenblatt", "cells", [](ExperimentConfig& c, std::string_view v) { c.barenblatt.cells = to_ints(v); },
          [](const ExperimentConfig& c) { return fmt_list(c.barenblatt.cells); }},
      HSL_DOUBLE("barenblatt", "half_width", barenblatt.half_width),
      HSL_DOUBLE("barenblatt", "front", barenblatt.front),
      HSL_DOUBLE("barenblatt", "t0", barenblatt.t0),
      HSL_DOUBLE("barenblatt", "final_time", barenblatt.final_time),
      HSL_DOUBLE("barenblatt", "cfl_safety", barenblatt.cfl_safety),

      Key{"output", "directory", [](ExperimentConfig& c, std::string_view v) { c.output_directory = trim(v); },
          [](const ExperimentConfig& c) { return c.output_directory.string(); }},
      Key{"output", "seed",
          [](ExperimentConfig& c, std::string_view v) {
            long s = to_integer(v);
            if (s < 0) throw ParseFailure("seed must be non-negative");
            c.seed = std::uint64_t(s);
          },
          [](const ExperimentConfig& c) { return std::to_string(c.seed); }},
  };
  return table;
}

#undef HSL_DOUBLE

const Key* find_key(const std::string& section, const std::string& name) {
  for (const auto& k : keys()) {
    if (k.section == section && k.name == name) return &k;
  }
  return nullptr;
}

std::string env_name(const Key& k) {
  std::string out = "HSL_" + k.section + "_" + k.name;
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char ch) { return char(std::toupper(ch)); });
  return out;
}

}  // namespace

TestFunction MonitorSettings::test_function(double final_time) const {
  return TestFunction(zeta_center, zeta_radius, zeta_start * final_time, zeta_end * final_time);
}

std::string ExperimentConfig::echo() const {
  std::ostringstream out;
  std::string section;
  for (const auto& k : keys()) {
    if (k.section != section) {
      if (!section.empty()) out << '\n';
      section = k.section;
      out << '[' << section << "]\n";
    }
    out << k.name << " = " << k.get(*this) << '\n';
  }
  return out.str();
}

std::string ExperimentConfig::hash() const {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : echo()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

ExperimentConfig ExperimentConfig::with_gamma(double gamma) const {
  ExperimentConfig c = *this;
  c.model.gamma = gamma;
  return c;
}

double ExperimentConfig::max_gamma() const {
  double g = model.gamma;
  for (double s : sweep.gammas) g = std::max(g, s);
  return g;
}

ConfigError::ConfigError(std::string source, std::vector<ConfigIssue> issues)
    : std::runtime_error([&] {
        std::ostringstream msg;
        msg << "invalid configuration " << source << ':';
        for (const auto& i : issues) {
          msg << "\n  ";
          if (i.line > 0) msg << "line " << i.line << ": ";
          if (!i.key.empty()) msg << i.key << ": ";
          msg << i.message;
        }
        return msg.str();
      }()),
      issues_(std::move(issues)) {}

std::optional<std::string> process_environment(const std::string& name) {
  if (const char* v = std::getenv(name.c_str())) return std::string(v);
  return std::nullopt;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& k : keys()) out.push_back(k.section + "." + k.name);
  return out;
}

double cfl_estimate(const ExperimentConfig& config, double gamma) {
  const double h = config.grid.spacing();
  return config.run.cfl_safety * h * h / (2.0 * config.grid.dimension * gamma * config.model.p_H);
}

ExperimentConfig parse_config_text(std::string_view text, const std::string& source, const EnvLookup& env) {
  ExperimentConfig config;
  std::vector<ConfigIssue> issues;
  std::map<std::string, int> seen;

  std::istringstream in{std::string(text)};
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto comment = raw.find_first_of("#;");
    std::string line = trim(comment == std::string::npos ? raw : raw.substr(0, comment));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        issues.push_back({line_no, "", "malformed section header '" + line + "'"});
        continue;
      }
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      issues.push_back({line_no, "", "expected 'key = value', got '" + line + "'"});
      continue;
    }
    std::string name = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    std::string full = section + "." + name;
    const Key* key = find_key(section, name);
    if (!key) {
      issues.push_back({line_no, full, section.empty() ? "key outside any section" : "unknown key"});
      continue;
    }
    if (auto it = seen.find(full); it != seen.end()) {
      issues.push_back({line_no, full, "duplicate key (first set on line " + std::to_string(it->second) + ")"});
      continue;
    }
    seen[full] = line_no;
    try {
      key->set(config, value);
    } catch (const std::exception& e) {
      issues.push_back({line_no, full, e.what()});
    }
  }

  for (const auto& k : keys()) {
    auto name = env_name(k);
    if (auto value = env(name)) {
      try {
        k.set(config, *value);
      } catch (const std::exception& e) {
        issues.push_back({0, k.section + "." + k.name, std::string("environment override ") + name + ": " + e.what()});
      }
    }
  }

  if (!issues.empty()) throw ConfigError(source, std::move(issues));
  try {
    validate_config(config, source);
  } catch (const ConfigError& e) {
    // point invariant violations at the line that set the key
    auto located = e.issues();
    for (auto& issue : located) {
      if (auto it = seen.find(issue.key); issue.line == 0 && it != seen.end()) issue.line = it->second;
    }
    throw ConfigError(source, std::move(located));
  }
  return config;
}

ExperimentConfig parse_config(const std::filesystem::path& path, const EnvLookup& env) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), {{0, "", "cannot read file"}});
  std::stringstream buffer;
  buffer << in.rdbuf();
  auto config = parse_config_text(buffer.str(), path.string(), env);
  if (config.initial.builder == DensityBuilder::file && config.initial.file.is_relative()) {
    config.initial.file = path.parent_path() / config.initial.file;
  }
  return config;
}

void validate_config(const ExperimentConfig& c, const std::string& source) {
  std::vector<ConfigIssue> issues;
  auto fail = [&](const std::string& key, const std::string& message) { issues.push_back({0, key, message}); };

  auto check_gamma = [&](double gamma, const std::string& key) {
    if (!(gamma > 1.0)) {
      fail(key, "gamma > 1 required");
    } else if (c.monitors.aronson_benilan && !(gamma > ab_gamma_threshold(c.grid.dimension))) {
      std::ostringstream msg;
      msg << "gamma > " << ab_gamma_threshold(c.grid.dimension) << " required by the Aronson-Benilan monitors in dimension "
          << c.grid.dimension;
      fail(key, msg.str());
    }
  };
  check_gamma(c.model.gamma, "model.gamma");
  for (std::size_t i = 0; i < c.sweep.gammas.size(); ++i) {
    check_gamma(c.sweep.gammas[i], "sweep.gammas");
    if (i > 0 && !(c.sweep.gammas[i] > c.sweep.gammas[i - 1])) fail("sweep.gammas", "gamma list must be strictly increasing");
  }

  try {
    c.model.check();
  } catch (const std::exception& e) {
    fail("model", e.what());
  }
  // The inert family is a pure porous-medium verification setting; the
  // structural reaction assumptions do not apply to it.
  if (issues.empty() && c.reactions.family != ReactionFamily::inert) {
    auto report = validate(c.model, c.reactions);
    for (const auto& v : report.violations) {
      std::ostringstream msg;
      msg << "reaction assumption violated: " << v.condition << " (worst at p=" << v.p << ", c=" << v.c
          << ", value=" << v.value << ")";
      fail("reaction", msg.str());
    }
  }

  try {
    Grid check(c.grid.dimension, c.grid.half_width, c.grid.cells);
  } catch (const std::exception& e) {
    fail("grid", e.what());
  }

  if (!(c.run.final_time >= 0.0)) fail("run.final_time", "must be >= 0");
  if (!(c.run.snapshot_interval > 0.0)) fail("run.snapshot_interval", "must be positive");
  if (!(c.run.cfl_safety > 0.0 && c.run.cfl_safety <= 1.0)) fail("run.cfl_safety", "must lie in (0, 1]");
  if (!(c.run.max_step > 0.0)) fail("run.max_step", "must be positive");
  if (c.run.cg_max_iterations < 1) fail("run.cg_max_iterations", "must be >= 1");
  if (c.field_stride < 1) fail("run.field_stride", "must be >= 1");

  if (issues.empty() && c.reactions.family != ReactionFamily::inert) {
    const double estimate = cfl_estimate(c, c.max_gamma());
    if (c.run.snapshot_interval > 1e3 * estimate) {
      std::ostringstream msg;
      msg << "snapshot interval " << c.run.snapshot_interval << " exceeds 1000 x CFL step estimate " << estimate
          << " (gamma=" << c.max_gamma() << "); the monitors module needs snapshot spacing <= 1e3 dt for its time-difference quotients";
      fail("run.snapshot_interval", msg.str());
    }
  }

  if (c.monitors.complementarity) {
    if (!(c.monitors.zeta_start > 0.0 && c.monitors.zeta_start < c.monitors.zeta_end && c.monitors.zeta_end < 1.0)) {
      fail("monitors.zeta_start", "test-function window must satisfy 0 < zeta_start < zeta_end < 1");
    } else if (issues.empty() && c.run.final_time > 0.0) {
      auto zeta = c.monitors.test_function(c.run.final_time);
      if (!zeta.supported_inside(c.grid, c.run.final_time)) fail("monitors.zeta_radius", "test-function ball must lie strictly inside the box");
    }
  }

  if (!(c.sweep.reference_fraction > 0.0 && c.sweep.reference_fraction <= 1.0)) fail("sweep.reference_fraction", "must lie in (0, 1]");
  if (!(c.sweep.positivity_threshold > 0.0)) fail("sweep.positivity_threshold", "must be positive");
  if (!(c.sweep.saturation_tolerance > 0.0 && c.sweep.saturation_tolerance < 1.0)) fail("sweep.saturation_tolerance", "must lie in (0, 1)");

  if (!(c.focusing.outer_radius > 0.0)) fail("focusing.outer_radius", "must be positive");
  if (!(c.focusing.initial_fraction > 0.0 && c.focusing.initial_fraction < 1.0)) fail("focusing.initial_fraction", "must lie in (0, 1)");
  for (double a : c.focusing.alphas) {
    if (!(a >= 1.0)) fail("focusing.alphas", "exponents must be >= 1");
  }
  if (!(c.focusing.cutoffs.ratio > 0.0 && c.focusing.cutoffs.ratio < 1.0)) fail("focusing.cutoff_ratio", "must lie in (0, 1)");
  if (!(c.focusing.cutoffs.initial_fraction > 0.0 && c.focusing.cutoffs.initial_fraction < 1.0)) {
    fail("focusing.cutoff_initial_fraction", "must lie in (0, 1)");
  }

  for (double g : c.barenblatt.gammas) {
    if (!(g > 1.0)) fail("barenblatt.gammas", "gamma > 1 required");
  }
  for (std::size_t i = 0; i < c.barenblatt.cells.size(); ++i) {
    if (c.barenblatt.cells[i] < 8) fail("barenblatt.cells", "need at least 8 cells");
    if (i > 0 && c.barenblatt.cells[i] <= c.barenblatt.cells[i - 1]) fail("barenblatt.cells", "cell counts must increase");
  }
  if (!(c.barenblatt.t0 > 0.0)) fail("barenblatt.t0", "must be positive");
  if (!(c.barenblatt.front > 0.0 && c.barenblatt.front < c.barenblatt.half_width)) {
    fail("barenblatt.front", "initial front must lie inside the box");
  }

  if (!issues.empty()) throw ConfigError(source, std::move(issues));
}

}  // namespace hsl
