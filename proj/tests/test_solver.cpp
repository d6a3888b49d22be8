#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "hsl/analytic.hpp"
#include "hsl/solver.hpp"

using namespace hsl;
using std::numbers::pi;

namespace {

State make_state(const Grid& g, const Field& n, double gamma, double c_B) {
  return State{0.0, n, pressure_from_density(n, gamma), Field(g, c_B)};
}

Reactions standard(double gamma) {
  ModelParams mp;
  mp.gamma = gamma;
  return Reactions(mp, ReactionSpec::standard(1.0, 0.1, 0.5, 0.2));
}

Reactions inert(double gamma) {
  ModelParams mp;
  mp.gamma = gamma;
  return Reactions(mp, ReactionSpec::inert());
}

}  // namespace

TEST_CASE("CFL step") {
  Grid g(1, 1.0, 200);  // h = 0.01
  Field n = Field::sample(g, [](double x, double) { return std::abs(x) < 0.3 ? 1.0 : 0.0; });
  auto r50 = inert(50.0);
  CHECK(cfl_dt(make_state(g, n, 50.0, 1.0), r50, 0.4) == doctest::Approx(4e-7));
  auto r100 = inert(100.0);
  CHECK(cfl_dt(make_state(g, n, 100.0, 1.0), r100, 0.4) == doctest::Approx(2e-7));

  Field zero(g, 0.0);
  CHECK(std::isinf(cfl_dt(make_state(g, zero, 50.0, 1.0), r50, 0.4)));
  auto rs = standard(50.0);
  CHECK(cfl_dt(make_state(g, zero, 50.0, 1.0), rs, 0.4) == doctest::Approx(0.4 / 0.6));
  CHECK_THROWS(cfl_dt(make_state(g, zero, 50.0, 1.0), rs, 1.5));
}

TEST_CASE("zero density is a fixed point") {
  Grid g(2, 1.0, 20);
  auto r = standard(20.0);
  State s = make_state(g, Field(g, 0.0), 20.0, 1.0);
  auto u = step_density(s, 1e-3, r);
  CHECK(u.n.values().abs().maxCoeff() == 0.0);
  CHECK(u.clipped_mass == 0.0);
}

TEST_CASE("density step conserves mass without reactions") {
  Grid g(2, 1.0, 32);
  auto r = inert(6.0);
  Field n = Field::sample(g, [](double x, double y) { return 0.8 * std::exp(-8.0 * (x * x + y * y)) * (x * x + y * y < 0.4 ? 1.0 : 0.0); });
  State s = make_state(g, n, 6.0, 1.0);
  const double m0 = integral(n);
  for (int i = 0; i < 50; ++i) {
    double dt = cfl_dt(s, r, 0.4);
    s.n = step_density(s, dt, r).n;
    s.p = pressure_from_density(s.n, 6.0);
  }
  CHECK(integral(s.n) == doctest::Approx(m0).epsilon(1e-13));
  CHECK(s.n.values().minCoeff() >= 0.0);
}

TEST_CASE("full run conserves mass with G = 0") {
  Grid g(1, 2.0, 200);
  InitialData init;
  init.builder = DensityBuilder::barenblatt;
  ModelParams mp;
  mp.gamma = 4.0;
  Reactions r(mp, ReactionSpec::inert());
  State s0 = build_initial_state(init, g, mp);
  RunSettings rs;
  rs.final_time = 0.5;
  rs.snapshot_interval = 0.1;
  Trajectory tr = run(s0, r, rs);
  REQUIRE(tr.snapshots.size() == 6);
  for (const auto& s : tr.snapshots) CHECK(integral(s.n) == doctest::Approx(tr.initial_mass).epsilon(1e-8));
  CHECK(tr.clipped_mass == 0.0);
  CHECK(tr.final_time() == 0.5);
  for (std::size_t k = 1; k < tr.snapshots.size(); ++k) {
    CHECK(tr.snapshots[k].t == doctest::Approx(0.1 * double(k)).epsilon(1e-14));
  }
}

TEST_CASE("interior plateau follows the growth ODE") {
  Grid g(1, 2.0, 200);
  ModelParams mp;
  mp.gamma = 10.0;
  const double rate = 0.3;
  Reactions r(mp, ReactionSpec::custom([rate](double, double) { return rate; }, [](double) { return 0.0; },
                                       [](double) { return 0.0; }));
  const double n0 = 0.5;
  Field n = Field::sample(g, [&](double x, double) { return std::abs(x) < 1.0 ? n0 : 0.0; });
  State s = make_state(g, n, mp.gamma, 1.0);
  RunSettings rs;
  rs.final_time = 0.2;
  rs.snapshot_interval = 0.2;
  Trajectory tr = run(s, r, rs);
  const State& last = tr.snapshots.back();
  // the edge rarefaction moves with speed |grad p| ~ p0 / h only in the last cells
  CHECK(last.n(g.cells / 2) == doctest::Approx(n0 * std::exp(rate * 0.2)).epsilon(1e-4));
}

TEST_CASE("nutrient fixed point and maximum principle") {
  Grid g(2, 1.0, 16);
  ModelParams mp;
  Reactions r(mp, ReactionSpec::standard(1.0, 0.1, 0.5, 0.2));
  State s = make_state(g, Field(g, 0.0), mp.gamma, mp.c_B);
  Field c = step_nutrient(s, 1e-2, r);
  CHECK((c.values() - mp.c_B).abs().maxCoeff() <= 1e-12);

  Field n = Field::sample(g, [](double x, double y) { return x * x + y * y < 0.3 ? 0.9 : 0.0; });
  s = make_state(g, n, mp.gamma, mp.c_B);
  s.c = Field::sample(g, [](double x, double y) { return 0.4 + 0.5 * std::exp(-(x * x + y * y)); });
  const double lo = s.c.values().minCoeff();
  NutrientStepper stepper(g, mp.c_B);
  for (int i = 0; i < 20; ++i) {
    s.c = stepper.step(s, 5e-3, r);
    CHECK(s.c.values().maxCoeff() <= mp.c_B + 1e-10);
  }
  // consumption can push c below its initial minimum; the lower bound is 0
  CHECK(s.c.values().minCoeff() >= 0.0);
  (void)lo;
}

TEST_CASE("nutrient without consumption keeps min c") {
  Grid g(1, 1.0, 40);
  ModelParams mp;
  Reactions r(mp, ReactionSpec::custom([](double, double) { return 0.0; }, [](double) { return 0.0; },
                                       [](double p) { return p < 2.0 ? 1.0 - p / 2.0 : 0.0; }));
  State s = make_state(g, Field(g, 0.0), mp.gamma, mp.c_B);
  s.c = Field::sample(g, [](double x, double) { return 0.3 + 0.6 * x * x; });
  const double lo = s.c.values().minCoeff();
  NutrientStepper stepper(g, mp.c_B);
  for (int i = 0; i < 30; ++i) {
    s.c = stepper.step(s, 1e-2, r);
    CHECK(s.c.values().minCoeff() >= lo - 1e-12);
    CHECK(s.c.values().maxCoeff() <= mp.c_B + 1e-12);
  }
}

TEST_CASE("nutrient heat equation against the separable solution") {
  const double L = 1.0, A = 0.4, c_B = 1.0;
  Grid g(1, L, 100);
  const double h = g.spacing();
  ModelParams mp;
  Reactions r(mp, ReactionSpec::custom([](double, double) { return 0.0; }, [](double) { return 1.0; },
                                       [](double) { return 0.0; }));
  const double k = pi / (2.0 * L);
  State s = make_state(g, Field(g, 0.0), mp.gamma, c_B);
  s.c = Field::sample(g, [&](double x, double) { return c_B - A * std::cos(k * x); });
  NutrientStepper stepper(g, c_B);
  const double dt = 1e-3;
  const int steps = 200;
  for (int i = 0; i < steps; ++i) s.c = stepper.step(s, dt, r);

  // discrete eigenvalue of the cell-centred Dirichlet Laplacian
  const double lambda = 4.0 / (h * h) * std::pow(std::sin(k * h / 2.0), 2);
  const double discrete = std::pow(1.0 + dt * lambda, -steps);
  const double exact = std::exp(-k * k * dt * steps);
  double err_discrete = 0.0, err_exact = 0.0;
  for (int i = 0; i < g.cells; ++i) {
    const double x = g.center(i);
    err_discrete = std::max(err_discrete, std::abs(s.c(i) - (c_B - A * discrete * std::cos(k * x))));
    err_exact = std::max(err_exact, std::abs(s.c(i) - (c_B - A * exact * std::cos(k * x))));
  }
  CHECK(err_discrete <= 1e-8);
  CHECK(err_exact <= A * (k * k * k * k * dt * dt * steps + k * k * k * k * h * h / 12.0 * dt * steps) * 2.0);
}

TEST_CASE("initial data builders") {
  Grid g(1, 2.0, 200);
  ModelParams mp;
  mp.gamma = 20.0;
  InitialData d;
  d.builder = DensityBuilder::plateau;
  State s = build_initial_state(d, g, mp);
  CHECK(s.n.values().maxCoeff() == doctest::Approx(d.theta * mp.n_H()));
  CHECK((s.p.values() - s.n.values().pow(mp.gamma)).abs().maxCoeff() <= 1e-15);

  d.builder = DensityBuilder::pressure_plateau;
  d.theta = 0.2;
  s = build_initial_state(d, g, mp);
  CHECK(s.p.values().maxCoeff() == doctest::Approx(0.2 * mp.p_H));
  State s40 = build_initial_state(d, g, ModelParams{});
  CHECK((s40.p.values() - s.p.values()).abs().maxCoeff() <= 1e-12);

  d.nutrient = NutrientProfile::deficit;
  s = build_initial_state(d, g, mp);
  CHECK(s.c.values().minCoeff() == doctest::Approx(mp.c_B * (1.0 - d.deficit_amplitude)).epsilon(1e-3));
  CHECK(s.c.values().maxCoeff() <= mp.c_B);

  InitialData bad;
  bad.theta = 1.5;
  CHECK_THROWS(build_initial_state(bad, g, mp));

  auto rep = describe_initial(s, mp.c_B);
  CHECK(rep.mass > 0.0);
  CHECK(rep.support_radius < 2.0);
}

TEST_CASE("run with T = 0 and solver errors") {
  Grid g(1, 1.0, 50);
  ModelParams mp;
  Reactions r(mp, ReactionSpec::standard(1.0, 0.1, 0.5, 0.2));
  InitialData d;
  State s = build_initial_state(d, g, mp);
  RunSettings rs;
  rs.final_time = 0.0;
  auto tr = run(s, r, rs);
  CHECK(tr.snapshots.size() == 1);
  CHECK(tr.steps.empty());

  // support reaching the box boundary
  State bad = s;
  bad.n = Field(g, 0.5);
  bad.p = pressure_from_density(bad.n, mp.gamma);
  rs.final_time = 0.1;
  try {
    run(bad, r, rs);
    FAIL("expected a solver error");
  } catch (const SolverError& e) {
    REQUIRE(e.partial());
    CHECK(e.partial()->snapshots.size() == 1);
  }
}

TEST_CASE("support mask") {
  Grid g(1, 1.0, 8);
  std::vector<double> v{0.0, 1e-13, 0.2, 0.0, 0.0, 1.0, 0.0, 0.0};
  Field n(g, Field::Array::Map(v.data(), 8));
  auto m = support_mask(n);
  CHECK(m == std::vector<bool>{false, false, true, false, false, true, false, false});
}
