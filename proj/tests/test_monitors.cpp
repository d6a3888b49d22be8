#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hsl/monitors.hpp"

using namespace hsl;

namespace {

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

// Snapshots at the given times, all carrying the same (p, c) and n = p^(1/gamma).
Trajectory frozen(const Field& p, const Field& c, double gamma, std::vector<double> times) {
  Trajectory tr;
  tr.params.gamma = gamma;
  tr.grid = p.grid();
  for (double t : times) tr.snapshots.push_back(State{t, density_from_pressure(p, gamma), p, c});
  return tr;
}

Field parabola(const Grid& g) {
  return Field::sample(g, [](double x, double) { return std::max(0.0, 1.0 - x * x); });
}

}  // namespace

TEST_CASE("ab field on a plateau and a parabola") {
  Grid g(1, 2.0, 200);
  auto r = standard(20.0);
  Field p = Field::sample(g, [](double x, double) { return std::abs(x) < 1.0 ? 0.3 : 0.0; });
  Field c(g, 0.8);
  Field w = ab_field(State{0.0, density_from_pressure(p, 20.0), p, c}, r);
  CHECK(w(g.cells / 2) == doctest::Approx(r.growth(0.3, 0.8)));

  auto r0 = inert(20.0);
  Field q = parabola(g);
  Field wq = ab_field(State{0.0, density_from_pressure(q, 20.0), q, c}, r0);
  for (int i = 0; i < g.cells; ++i) {
    double x = g.center(i);
    if (std::abs(x) < 1.0 - 2.0 * g.spacing()) CHECK(wq(i) == doctest::Approx(-2.0).epsilon(1e-9));
  }
}

TEST_CASE("time weights") {
  Grid g(1, 1.0, 8);
  auto tr = frozen(Field(g, 0.0), Field(g, 1.0), 10.0, {0.0, 0.25, 0.75, 1.0});
  auto w = time_weights(tr);
  CHECK(w == std::vector<double>{0.25, 0.5, 0.25, 0.0});
}

TEST_CASE("zero pressure: ab accumulator equals quadrature of G(0, c)") {
  Grid g(1, 1.0, 50);
  auto r = standard(10.0);
  Field c = Field::sample(g, [](double x, double) { return 0.2 + 0.3 * x * x; });
  auto tr = frozen(Field(g, 0.0), c, 10.0, {0.0, 0.5, 1.0});
  double direct = 0.0, weighted = 0.0;
  WeightFunction phi(g);
  for (int i = 0; i < g.cells; ++i) {
    double gv = 1.1 * 0.0 + (c(i) + 0.1) - 0.5;
    double neg = gv < 0.0 ? -gv : 0.0;
    direct += neg * neg * neg * g.spacing();
    weighted += neg * neg * neg * phi.values()(i) * g.spacing();
  }
  CHECK(ab_negative_l3(tr, r) == doctest::Approx(direct).epsilon(1e-12));
  CHECK(weighted_ab_l3(tr, phi, r) == doctest::Approx(weighted).epsilon(1e-12));
  CHECK(laplacian_l1(tr) == 0.0);
  CHECK(grad_p_l4(tr) == 0.0);
  auto d = dissipation(tr, r);
  CHECK(d.pressure_defect == 0.0);
  CHECK(d.hessian == 0.0);
  TestFunction z({0.0, 0.0}, 0.5, 0.1, 0.9);
  auto comp = complementarity_residual(tr, z, r);
  CHECK(comp.lhs == 0.0);
  CHECK(comp.rhs == 0.0);
}

TEST_CASE("frozen parabola gradient integral") {
  // int_0^1 int_{-1}^{1} 16 x^4 dx dt = 32 / 5; the kinks at x = +-1 cost O(h)
  std::vector<double> errors;
  for (int cells : {1000, 2000, 4000}) {
    Grid g(1, 2.0, cells);
    auto tr = frozen(parabola(g), Field(g, 1.0), 10.0, {0.0, 0.5, 1.0});
    errors.push_back(std::abs(grad_p_l4(tr) - 6.4));
    if (cells == 4000) {
      CHECK(grad_p_l4(tr) == doctest::Approx(6.4).epsilon(1e-2));
      // int |p''| = 2 * 2 in the interior plus the two kinks of jump 2 each
      CHECK(laplacian_l1(tr) == doctest::Approx(8.0).epsilon(1e-2));
    }
  }
  CHECK(errors[1] < 0.6 * errors[0]);
  CHECK(errors[2] < 0.6 * errors[1]);
}

TEST_CASE("homogeneity and box scaling") {
  Grid g(1, 1.0, 100);
  Field p = Field::sample(g, [](double x, double) { return std::abs(x) < 0.6 ? 0.5 * std::cos(x * 2.6) : 0.0; });
  Field p2 = p;
  p2.values() *= 2.0;
  auto a = frozen(p, Field(g, 1.0), 10.0, {0.0, 1.0});
  auto b = frozen(p2, Field(g, 1.0), 10.0, {0.0, 1.0});
  CHECK(grad_p_l4(b) == doctest::Approx(16.0 * grad_p_l4(a)));
  CHECK(laplacian_l1(b) == doctest::Approx(2.0 * laplacian_l1(a)));
  auto r0 = inert(10.0);
  CHECK(ab_negative_l3(b, r0) == doctest::Approx(8.0 * ab_negative_l3(a, r0)));

  Grid big(1, 2.0, 200);  // same spacing, twice the box
  Field pb = Field::sample(big, [](double x, double) { return std::abs(x) < 0.6 ? 0.5 * std::cos(x * 2.6) : 0.0; });
  auto c = frozen(pb, Field(big, 1.0), 10.0, {0.0, 1.0});
  CHECK(ab_negative_l3(c, r0) == doctest::Approx(ab_negative_l3(a, r0)).epsilon(1e-12));
  CHECK(grad_p_l4(c) == doctest::Approx(grad_p_l4(a)).epsilon(1e-12));
}

TEST_CASE("ab monitors refuse gamma below the threshold") {
  Grid g(1, 1.0, 10);
  auto tr = frozen(Field(g, 0.0), Field(g, 1.0), 1.0 + 1e-12, {0.0, 1.0});
  tr.params.gamma = 1.0;
  CHECK_THROWS_AS(ab_negative_l3(tr, inert(1.5)), std::invalid_argument);
}

TEST_CASE("graph residual and energy") {
  Grid g(1, 1.0, 20);
  Field n(g, 1.0);
  CHECK(graph_residual(State{0.0, n, Field(g, 0.7), Field(g, 1.0)}) == 0.0);
  Field half(g, 0.5);
  CHECK(graph_residual(State{0.0, half, pressure_from_density(half, 10.0), Field(g, 1.0)}) ==
        doctest::Approx(std::pow(0.5, 11)));

  auto r = standard(40.0);
  CHECK(energy(State{0.0, Field(g, 0.0), Field(g, 0.0), Field(g, 1.0)}, r) == 0.0);
  Field one(g, 1.0);
  State s{0.0, one, one, Field(g, 1.0)};
  const double boundary = 0.5 * integral(grad_norm_sq(one, Boundary::dirichlet(0.0)));
  CHECK(energy(s, r) == doctest::Approx(-0.05 * 2.0 + boundary));
}

TEST_CASE("weight function bounds") {
  for (int d : {1, 2}) {
    Grid g(d, 3.0, 60);
    WeightFunction phi(g);
    CHECK_NOTHROW(phi.check());
    CHECK(phi.gradient_ratio() <= 1.0);
    CHECK(phi.laplacian_constant() <= 1.0 + d);
    for (Eigen::Index k = 0; k < g.size(); ++k) {
      CHECK(phi.gradient_norm()[k] <= phi.values()[k]);
      CHECK(std::abs(phi.laplacian()[k]) <= phi.laplacian_constant() * phi.values()[k] * (1.0 + 1e-12));
    }
    // analytic Laplacian against the discrete stencil away from the boundary
    Field lap = laplacian(phi.values(), Boundary::neumann_zero());
    Eigen::Index centre = d == 1 ? g.index(17) : g.index(17, 40);
    CHECK(lap[centre] == doctest::Approx(phi.laplacian()[centre]).epsilon(1e-2));
  }
}

TEST_CASE("weighted accumulator is dominated by the unweighted one") {
  Grid g(1, 2.0, 200);
  auto r = standard(20.0);
  Field p = Field::sample(g, [](double x, double) { return std::abs(x) < 1.0 ? 0.4 * (1.0 - x * x) : 0.0; });
  auto tr = frozen(p, Field(g, 0.5), 20.0, {0.0, 0.5, 1.0});
  WeightFunction phi(g);
  CHECK(weighted_ab_l3(tr, phi, r) <= ab_negative_l3(tr, r) * std::exp(-1.0) * (1.0 + 1e-12));
  CHECK(weighted_ab_l3(tr, phi, r) > 0.0);
}

TEST_CASE("complementarity of a frozen profile") {
  Grid g(1, 2.0, 400);
  auto r = standard(20.0);
  auto tr = frozen(parabola(g), Field(g, 1.0), 20.0, {0.0, 0.25, 0.5, 0.75, 1.0});
  TestFunction z({0.0, 0.0}, 1.5, 0.1, 0.9);
  auto comp = complementarity_residual(tr, z, r);
  CHECK(comp.lhs_within_bound());
  CHECK(comp.lhs_bound > 0.0);
  TestFunction outside({0.0, 0.0}, 2.5, 0.1, 0.9);
  CHECK_THROWS(complementarity_residual(tr, outside, r));
}

TEST_CASE("direct estimates: running accumulators and additivity") {
  Grid g(1, 2.0, 100);
  auto r = standard(20.0);
  Trajectory tr;
  tr.params.gamma = 20.0;
  tr.grid = g;
  for (int k = 0; k <= 6; ++k) {
    double t = 0.1 * k;
    Field p = Field::sample(g, [t](double x, double) { return std::max(0.0, (0.3 + 0.1 * t) * (1.0 - x * x / (1.0 + t))); });
    Field c = Field::sample(g, [t](double x, double) { return 1.0 - 0.3 * std::exp(-x * x) * (1.0 - t); });
    tr.snapshots.push_back(State{t, density_from_pressure(p, 20.0), p, c});
  }
  MonitorOptions o;
  o.zeta = TestFunction({0.0, 0.0}, 1.5, 0.1, 0.5);
  auto rep = direct_estimates(tr, r, o);
  REQUIRE(rep.rows.size() == tr.snapshots.size());
  REQUIRE(rep.running.size() == rep.rows.size());
  CHECK(rep.running.back().ab_negative_l3 == doctest::Approx(rep.totals.ab_negative_l3));
  CHECK(rep.totals.ab_negative_l3 == doctest::Approx(ab_negative_l3(tr, r)));
  CHECK(rep.totals.grad_p_l4 == doctest::Approx(grad_p_l4(tr)));
  for (std::size_t k = 1; k < rep.running.size(); ++k) CHECK(rep.running[k].grad_p_l4 >= rep.running[k - 1].grad_p_l4);
  CHECK(rep.pressure_l1_bound());
  CHECK(rep.nutrient_inequality(1.0));
  REQUIRE(rep.complementarity);
  CHECK(rep.complementarity->lhs_within_bound());

  // splitting [0, T] at an interior snapshot adds up
  Trajectory left = tr, right = tr;
  left.snapshots.assign(tr.snapshots.begin(), tr.snapshots.begin() + 4);
  right.snapshots.assign(tr.snapshots.begin() + 3, tr.snapshots.end());
  CHECK(ab_negative_l3(left, r) + ab_negative_l3(right, r) == doctest::Approx(ab_negative_l3(tr, r)));
  CHECK(grad_p_l4(left) + grad_p_l4(right) == doctest::Approx(grad_p_l4(tr)));

  CHECK(monitor_csv_header().size() == monitor_csv_row(rep.rows[0], rep.running[0]).size());

  Trajectory still = frozen(Field(g, 0.0), Field(g, 1.0), 20.0, {0.0, 0.5, 1.0});
  auto z = direct_estimates(still, r);
  CHECK(z.totals.grad_c_l4 == 0.0);
  CHECK(z.totals.laplacian_c_l2_sq == 0.0);
  CHECK(z.totals.dt_c_l2_sq == 0.0);
}
