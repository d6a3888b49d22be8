#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "hsl/field_io.hpp"
#include "hsl/grid.hpp"

using namespace hsl;
using std::numbers::pi;

TEST_CASE("grid geometry") {
  Grid g(2, 1.0, 10);
  CHECK(g.spacing() == doctest::Approx(0.2));
  CHECK(g.cell_volume() == doctest::Approx(0.04));
  CHECK(g.size() == 100);
  CHECK(g.center(0) == doctest::Approx(-0.9));
  CHECK(g.center(9) == doctest::Approx(0.9));
  auto c = g.cell(g.index(3, 7));
  CHECK(c[0] == 3);
  CHECK(c[1] == 7);
  CHECK(g.on_boundary(g.index(0, 4)));
  CHECK_FALSE(g.on_boundary(g.index(4, 4)));
  CHECK_THROWS(Grid(3, 1.0, 10));
  CHECK_THROWS(Grid(1, -1.0, 10));
}

TEST_CASE("laplacian is exact on quadratics and zero on constants") {
  Grid g(1, 1.0, 20);
  Field one(g, 3.0);
  Field lap = laplacian(one, Boundary::neumann_zero());
  CHECK(lap.values().abs().maxCoeff() == 0.0);

  Field q = Field::sample(g, [](double x, double) { return x * x; });
  Field lq = laplacian(q, Boundary::dirichlet(0.0));
  for (int i = 1; i + 1 < g.cells; ++i) CHECK(lq(i) == doctest::Approx(2.0).epsilon(1e-10));

  Grid g2(2, 1.0, 16);
  Field q2 = Field::sample(g2, [](double x, double y) { return x * x + 3.0 * y * y; });
  Field l2 = laplacian(q2, Boundary::dirichlet(0.0));
  CHECK(l2(5, 7) == doctest::Approx(8.0).epsilon(1e-10));
}

TEST_CASE("laplacian truncation error for sin(pi x)") {
  Grid g(1, 1.0, 200);
  const double h = g.spacing();
  Field f = Field::sample(g, [](double x, double) { return std::sin(pi * x); });
  Field lap = laplacian(f, Boundary::dirichlet(0.0));
  double worst = 0.0;
  for (int i = 1; i + 1 < g.cells; ++i) worst = std::max(worst, std::abs(lap(i) + pi * pi * std::sin(pi * g.center(i))));
  CHECK(worst <= std::pow(pi, 4) * h * h / 12.0 + 1e-9);
}

TEST_CASE("gradient exactness") {
  Grid g(1, 1.0, 40);
  Field lin = Field::sample(g, [](double x, double) { return x; });
  auto d = partial(lin, 0, Boundary::dirichlet(0.0));
  for (int i = 1; i + 1 < g.cells; ++i) CHECK(d(i) == doctest::Approx(1.0).epsilon(1e-12));

  for (int cells : {12, 36}) {
    Grid g3(1, 2.0, cells);  // h = 1/3 or 1/9, so some centre sits at x = 0.5
    Field q = Field::sample(g3, [](double x, double) { return x * x; });
    auto dq = partial(q, 0, Boundary::dirichlet(0.0));
    int i = int(std::lround((0.5 + 2.0) / g3.spacing() - 0.5));
    REQUIRE(g3.center(i) == doctest::Approx(0.5));
    CHECK(dq(i) == doctest::Approx(1.0).epsilon(1e-12));
  }

  Field c(g, 2.0);
  auto gc = gradient(c, Boundary::neumann_zero());
  REQUIRE(gc.size() == 1);
  CHECK(gc[0].values().abs().maxCoeff() == 0.0);
}

TEST_CASE("integral and space-time norms") {
  Grid g2(2, 0.5, 10);  // [-0.5, 0.5]^2, unit area
  CHECK(integral(Field(g2, 1.0)) == doctest::Approx(1.0));

  Grid g(1, 0.5, 100);  // [-0.5, 0.5]; x + 0.5 maps to [0, 1]
  Field x = Field::sample(g, [](double s, double) { return s + 0.5; });
  CHECK(integral(x) == doctest::Approx(0.5).epsilon(1e-12));

  std::vector<Field> series{Field(g, 2.0), Field(g, 2.0), Field(g, 2.0)};
  std::vector<double> w{0.5, 0.5, 0.0};
  CHECK(lp_spacetime<double>(series, 4.0, w) == doctest::Approx(2.0));
  CHECK_THROWS(lp_spacetime<double>(series, 0.5, w));
}

TEST_CASE("summation by parts for the Dirichlet energy") {
  for (int d : {1, 2}) {
    Grid g(d, 1.0, 24);
    Field f = Field::sample(g, [](double x, double y) { return std::exp(-4.0 * (x * x + y * y)) * (1.0 + 0.3 * x); });
    for (auto bc : {Boundary::dirichlet(0.0), Boundary::neumann_zero()}) {
      Field fl = f;
      fl.values() *= laplacian(f, bc).values();
      CHECK(integral(fl) == doctest::Approx(-dirichlet_energy(f, bc)).epsilon(1e-12));
    }
  }
}

TEST_CASE("mollifier and test function") {
  CHECK(mollifier(0.0) == doctest::Approx(std::exp(-1.0)));
  CHECK(mollifier(1.0) == 0.0);
  CHECK(mollifier(-1.5) == 0.0);
  const double s = std::sqrt(1.0 / std::sqrt(3.0));
  CHECK(std::abs(mollifier_derivative(s)) == doctest::Approx(mollifier_derivative_sup()));
  for (double t = -0.99; t < 1.0; t += 0.01) {
    CHECK(std::abs(mollifier_derivative(t)) <= mollifier_derivative_sup() * (1.0 + 1e-12));
    double fd = (mollifier(t + 1e-6) - mollifier(t - 1e-6)) / 2e-6;
    CHECK(mollifier_derivative(t) == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
  }
  CHECK(smooth_step_down(-0.1) == 1.0);
  CHECK(smooth_step_down(1.1) == 0.0);
  CHECK(smooth_step_down(0.5) == doctest::Approx(0.5));

  TestFunction z({0.0, 0.0}, 1.0, 0.1, 0.9);
  CHECK(z.sup() == doctest::Approx(std::exp(-2.0)));
  CHECK(z.value(0.0, 0.0, 0.5) == doctest::Approx(std::exp(-2.0)));
  CHECK(z.value(1.0, 0.0, 0.5) == 0.0);
  CHECK(z.value(0.0, 0.0, 0.05) == 0.0);
  double worst = 0.0;
  for (double t = 0.1; t <= 0.9; t += 1e-4) worst = std::max(worst, std::abs(z.time_derivative(0.0, 0.0, t)));
  CHECK(worst <= z.sup_time_derivative() * (1.0 + 1e-9));
  CHECK(worst >= 0.99 * z.sup_time_derivative());
  double fd = (z.value(0.3, 0.0, 0.4 + 1e-6) - z.value(0.3, 0.0, 0.4 - 1e-6)) / 2e-6;
  CHECK(z.time_derivative(0.3, 0.0, 0.4) == doctest::Approx(fd).epsilon(1e-5));
  double gx = (z.value(0.3 + 1e-6, 0.2, 0.4) - z.value(0.3 - 1e-6, 0.2, 0.4)) / 2e-6;
  CHECK(z.gradient(0.3, 0.2, 0.4)[0] == doctest::Approx(gx).epsilon(1e-5));

  CHECK(z.supported_inside(Grid(1, 2.0, 10), 1.0));
  CHECK_FALSE(z.supported_inside(Grid(1, 0.9, 10), 1.0));
  CHECK_FALSE(z.supported_inside(Grid(1, 2.0, 10), 0.8));
}

TEST_CASE("field bundle round trip") {
  auto dir = std::filesystem::temp_directory_path() / "hsl_test_bundle";
  std::filesystem::create_directories(dir);
  Grid g(2, 1.5, 9);
  std::vector<NamedField> fields{{"n", 0.25, Field::sample(g, [](double x, double y) { return x - 2.0 * y + 1.0 / 3.0; })},
                                 {"c", 0.5, Field(g, 0.1)}};
  write_field_bundle(dir / "f.bin", dir / "f.json", fields);
  auto back = read_field_bundle(dir / "f.json");
  REQUIRE(back.size() == 2);
  CHECK(back[0].name == "n");
  CHECK(back[1].time == 0.5);
  CHECK(back[0].field.grid() == g);
  CHECK((back[0].field.values() == fields[0].field.values()).all());
  write_fields_csv(dir / "f.csv", fields);
  CHECK(std::filesystem::file_size(dir / "f.csv") > 0);
  std::filesystem::remove_all(dir);
}
