#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hsl/model.hpp"

using namespace hsl;

TEST_CASE("pressure law round trip") {
  CHECK(pressure_from_density(0.0, 10.0) == 0.0);
  CHECK(pressure_from_density(1.0, 37.0) == 1.0);
  CHECK(pressure_from_density(0.9, 10.0) == doctest::Approx(0.3486784401).epsilon(1e-14));
  CHECK(density_from_pressure(0.0, 10.0) == 0.0);
  CHECK(density_from_pressure(0.3486784401, 10.0) == doctest::Approx(0.9).epsilon(1e-12));

  ModelParams mp;
  mp.p_H = 2.0;
  mp.gamma = 8.0;
  CHECK(density_from_pressure(mp.p_H, mp.gamma) == doctest::Approx(mp.n_H()));
  CHECK(mp.n_H() == doctest::Approx(std::pow(2.0, 1.0 / 8.0)));
}

TEST_CASE("pressure law on fields") {
  Grid g(1, 1.0, 16);
  Field n = Field::sample(g, [](double x, double) { return 0.5 + 0.4 * x; });
  Field p = pressure_from_density(n, 3.0);
  Field back = density_from_pressure(p, 3.0);
  for (Eigen::Index k = 0; k < g.size(); ++k) {
    CHECK(p[k] == doctest::Approx(std::pow(n[k], 3.0)));
    CHECK(back[k] == doctest::Approx(n[k]).epsilon(1e-13));
  }
}

TEST_CASE("standard reaction family") {
  ModelParams mp;
  Reactions r(mp, ReactionSpec::standard(1.0, 0.1, 0.5, 0.2));
  CHECK(r.growth(0.0, 1.0) == doctest::Approx(0.6));
  CHECK(r.growth(0.0, 0.0) == doctest::Approx(-0.4));
  CHECK(r.release(mp.p_B / 2.0) == doctest::Approx(0.5));
  CHECK(r.release(mp.p_B) == 0.0);
  CHECK(r.release(3.0) == 0.0);
  CHECK(r.consumption(0.0) == 0.0);
  // primitive: int_0^1 (1 - q)(1.1) - 0.5 dq = 0.55 - 0.5
  CHECK(r.growth_primitive(1.0, 1.0) == doctest::Approx(0.05));
  CHECK(r.growth_primitive(0.0, 0.7) == 0.0);
}

TEST_CASE("primitive matches quadrature of G") {
  ModelParams mp;
  Reactions r(mp, ReactionSpec::standard(1.3, 0.2, 0.4, 0.2));
  for (double c : {0.0, 0.3, 1.0}) {
    for (double p : {0.1, 0.5, 1.7}) {
      const int n = 2000;
      double sum = 0.0;
      for (int i = 0; i < n; ++i) sum += r.growth((i + 0.5) * p / n, c) * p / n;
      CHECK(r.growth_primitive(p, c) == doctest::Approx(sum).epsilon(1e-6));
    }
  }
}

TEST_CASE("validator on the default family") {
  ModelParams mp;
  auto rep = validate(mp, ReactionSpec::standard(1.0, 0.1, 0.5, 0.2));
  CHECK(rep.passed);
  CHECK(rep.measured_beta == doctest::Approx(0.1).epsilon(1e-9));
  CHECK(rep.samples > 0);
}

TEST_CASE("validator rejects c2 = 0") {
  ModelParams mp;
  auto rep = validate(mp, ReactionSpec::standard(1.0, 0.1, 0.0, 0.2));
  CHECK_FALSE(rep.passed);
  REQUIRE_FALSE(rep.violations.empty());
  bool necrosis = false;
  for (const auto& v : rep.violations) necrosis = necrosis || v.condition.find("necrosis") != std::string::npos;
  CHECK(necrosis);
  Reactions r(mp, ReactionSpec::standard(1.0, 0.1, 0.0, 0.2));
  CHECK(r.growth(0.0, 0.0) == doctest::Approx(0.1));
}

TEST_CASE("validator flags a declared beta above the measured one") {
  ModelParams mp;
  mp.beta = 0.5;
  auto rep = validate(mp, ReactionSpec::standard(1.0, 0.1, 0.5, 0.2));
  CHECK_FALSE(rep.passed);
}

TEST_CASE("custom family uses the callables") {
  ModelParams mp;
  auto spec = ReactionSpec::custom([](double p, double c) { return (1.0 - p) * (c + 0.5) - 0.6; },
                                   [](double c) { return 2.0 * c; }, [](double) { return 0.0; });
  Reactions r(mp, spec);
  CHECK(r.growth(0.0, 1.0) == doctest::Approx(0.9));
  CHECK(r.consumption(0.25) == doctest::Approx(0.5));
  CHECK(r.growth_primitive(1.0, 1.0) == doctest::Approx(0.15).epsilon(1e-6));
}

TEST_CASE("inert family is identically zero") {
  Reactions r(ModelParams{}, ReactionSpec::inert());
  CHECK(r.growth(0.3, 0.4) == 0.0);
  CHECK(r.consumption(0.4) == 0.0);
  CHECK(r.release(0.2) == 0.0);
}

TEST_CASE("parameter checks") {
  ModelParams mp;
  mp.gamma = 0.5;
  CHECK_THROWS_AS(mp.check(), std::invalid_argument);
  mp.gamma = 2.0;
  mp.p_H = -1.0;
  CHECK_THROWS_AS(mp.check(), std::invalid_argument);
  CHECK(ab_gamma_threshold(1) == doctest::Approx(1.0));
  CHECK(ab_gamma_threshold(2) == doctest::Approx(1.0));
  CHECK(ab_gamma_threshold(3) == doctest::Approx(1.0));
  CHECK_THROWS(reaction_family_from_string("exotic"));
  CHECK(reaction_family_from_string("inert") == ReactionFamily::inert);
}

TEST_CASE("graph product bound") {
  CHECK(graph_product_bound(10.0) == doctest::Approx(0.0350494).epsilon(1e-6));
  for (double g : {5.0, 10.0, 40.0, 80.0}) {
    double best = 0.0;
    for (int i = 0; i <= 200000; ++i) {
      double n = i / 200000.0;
      best = std::max(best, std::pow(n, g) * (1.0 - n));
    }
    CHECK(graph_product_bound(g) == doctest::Approx(best).epsilon(1e-6));
    CHECK(graph_product_bound(g) <= 1.0 / (std::exp(1.0) * g));
    CHECK(graph_product_bound(g) >= 1.0 / (std::exp(1.0) * (g + 1.0)));
  }
}
