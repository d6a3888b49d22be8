#pragma once

#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

namespace hsl {

/// Uniform cell-centred grid on the box [-L, L]^d, d in {1, 2}.
struct Grid {
  int dimension = 1;
  double half_width = 1.0;
  int cells = 64;  ///< cells per axis

  Grid() = default;
  Grid(int dimension, double half_width, int cells);

  double spacing() const { return 2.0 * half_width / cells; }
  double cell_volume() const { return dimension == 1 ? spacing() : spacing() * spacing(); }
  Eigen::Index size() const {
    return dimension == 1 ? Eigen::Index(cells) : Eigen::Index(cells) * cells;
  }
  double center(int i) const { return -half_width + (i + 0.5) * spacing(); }
  Eigen::Index index(int i, int j = 0) const { return i + Eigen::Index(cells) * j; }
  std::array<int, 2> cell(Eigen::Index k) const {
    return {int(k % cells), dimension == 1 ? 0 : int(k / cells)};
  }
  std::array<double, 2> position(Eigen::Index k) const {
    auto [i, j] = cell(k);
    return {center(i), dimension == 1 ? 0.0 : center(j)};
  }
  double radius(Eigen::Index k) const {
    auto x = position(k);
    return std::hypot(x[0], x[1]);
  }
  bool on_boundary(Eigen::Index k) const;

  bool operator==(const Grid&) const = default;
};

/// One scalar per grid cell.
template <typename Scalar>
class BasicField {
 public:
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  BasicField() = default;
  explicit BasicField(const Grid& grid, Scalar fill = Scalar(0))
      : grid_(grid), values_(Array::Constant(grid.size(), fill)) {}
  BasicField(const Grid& grid, Array values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) throw std::invalid_argument("field size does not match grid");
  }

  /// Samples f(x, y) at cell centres (y = 0 in 1D).
  template <typename F>
  static BasicField sample(const Grid& grid, F&& f) {
    BasicField out(grid);
    for (Eigen::Index k = 0; k < grid.size(); ++k) {
      auto x = grid.position(k);
      out.values_[k] = Scalar(f(x[0], x[1]));
    }
    return out;
  }

  const Grid& grid() const { return grid_; }
  Eigen::Index size() const { return values_.size(); }
  Array& values() { return values_; }
  const Array& values() const { return values_; }
  Scalar operator[](Eigen::Index k) const { return values_[k]; }
  Scalar& operator[](Eigen::Index k) { return values_[k]; }
  Scalar operator()(int i, int j = 0) const { return values_[grid_.index(i, j)]; }

  bool compatible(const BasicField& other) const { return grid_ == other.grid_; }

 private:
  Grid grid_;
  Array values_;
};

using Field = BasicField<double>;

/// Ghost-cell boundary treatment. Dirichlet values are imposed on the box
/// faces (ghost = 2 v - inner); Neumann-zero mirrors the inner value.
struct Boundary {
  enum class Kind { dirichlet, neumann_zero };
  Kind kind = Kind::dirichlet;
  double value = 0.0;

  static Boundary dirichlet(double value = 0.0) { return {Kind::dirichlet, value}; }
  static Boundary neumann_zero() { return {Kind::neumann_zero, 0.0}; }

  template <typename Scalar>
  Scalar ghost(Scalar inner) const {
    return kind == Kind::dirichlet ? Scalar(2.0 * value) - inner : inner;
  }
};

namespace detail {

// Value of the neighbour of cell k along axis (0 = x, 1 = y) in direction
// dir (-1 or +1), falling back to the ghost value outside the box.
template <typename Scalar>
Scalar neighbour(const BasicField<Scalar>& f, Eigen::Index k, int axis, int dir, const Boundary& bc) {
  const Grid& g = f.grid();
  auto c = g.cell(k);
  int m = c[axis] + dir;
  if (m < 0 || m >= g.cells) return bc.ghost(f[k]);
  return axis == 0 ? f(m, c[1]) : f(c[0], m);
}

}  // namespace detail

/// 3-point (1D) / 5-point (2D) Laplacian.
template <typename Scalar>
BasicField<Scalar> laplacian(const BasicField<Scalar>& f, const Boundary& bc) {
  const Grid& g = f.grid();
  const Scalar inv_h2 = Scalar(1.0 / (g.spacing() * g.spacing()));
  BasicField<Scalar> out(g);
  for (Eigen::Index k = 0; k < g.size(); ++k) {
    Scalar acc(0);
    for (int axis = 0; axis < g.dimension; ++axis) {
      acc += detail::neighbour(f, k, axis, -1, bc) + detail::neighbour(f, k, axis, +1, bc) - Scalar(2) * f[k];
    }
    out[k] = acc * inv_h2;
  }
  return out;
}

/// Centred first differences along one axis.
template <typename Scalar>
BasicField<Scalar> partial(const BasicField<Scalar>& f, int axis, const Boundary& bc) {
  const Grid& g = f.grid();
  const Scalar inv_2h = Scalar(0.5 / g.spacing());
  BasicField<Scalar> out(g);
  for (Eigen::Index k = 0; k < g.size(); ++k) {
    out[k] = (detail::neighbour(f, k, axis, +1, bc) - detail::neighbour(f, k, axis, -1, bc)) * inv_2h;
  }
  return out;
}

template <typename Scalar>
std::vector<BasicField<Scalar>> gradient(const BasicField<Scalar>& f, const Boundary& bc) {
  std::vector<BasicField<Scalar>> out;
  for (int axis = 0; axis < f.grid().dimension; ++axis) out.push_back(partial(f, axis, bc));
  return out;
}

template <typename Scalar>
BasicField<Scalar> grad_norm_sq(const BasicField<Scalar>& f, const Boundary& bc) {
  BasicField<Scalar> out(f.grid());
  for (const auto& component : gradient(f, bc)) out.values() += component.values().square();
  return out;
}

/// Midpoint-rule integral over the box.
template <typename Scalar>
Scalar integral(const BasicField<Scalar>& f) {
  return f.values().sum() * Scalar(f.grid().cell_volume());
}

/// Face-based Dirichlet energy sum_faces |D f|^2 h^d. Boundary faces use the
/// half-cell distance to the imposed face value, which makes
/// integral(f * laplacian(f)) == -dirichlet_energy(f) hold exactly for
/// Dirichlet-zero and Neumann-zero data.
template <typename Scalar>
Scalar dirichlet_energy(const BasicField<Scalar>& f, const Boundary& bc) {
  const Grid& g = f.grid();
  const double h = g.spacing();
  Scalar acc(0);
  for (Eigen::Index k = 0; k < g.size(); ++k) {
    auto c = g.cell(k);
    for (int axis = 0; axis < g.dimension; ++axis) {
      if (c[axis] + 1 < g.cells) {
        Scalar d = detail::neighbour(f, k, axis, +1, bc) - f[k];
        acc += d * d;
      }
      if (c[axis] == 0 || c[axis] + 1 == g.cells) {
        Scalar d = bc.ghost(f[k]) - f[k];
        acc += Scalar(0.5) * d * d;
      }
    }
  }
  return acc / Scalar(h * h) * Scalar(g.cell_volume());
}

/// (sum_k w_k sum_cells |f_k|^q h^d)^(1/q), with w_k the left-endpoint time
/// weight of slice k.
template <typename Scalar>
Scalar lp_spacetime(std::span<const BasicField<Scalar>> series, double q, std::span<const double> weights) {
  if (q < 1.0) throw std::invalid_argument("lp_spacetime: exponent must be >= 1");
  if (series.size() != weights.size()) throw std::invalid_argument("lp_spacetime: one weight per slice required");
  Scalar acc(0);
  for (std::size_t k = 0; k < series.size(); ++k) {
    acc += Scalar(weights[k]) * series[k].values().abs().pow(Scalar(q)).sum() *
           Scalar(series[k].grid().cell_volume());
  }
  using std::pow;
  return pow(acc, Scalar(1.0 / q));
}

/// Standard mollifier exp(-1 / (1 - s^2)) on |s| < 1, zero outside.
double mollifier(double s);
double mollifier_derivative(double s);
/// sup over s of |mollifier'(s)|, attained at s^2 = 1/sqrt(3).
double mollifier_derivative_sup();

/// Smooth step: 1 for s <= 0, 0 for s >= 1, C-infinity in between.
double smooth_step_down(double s);

/// Space-time bump zeta(x, t) = eta(|x - x0| / rho) * eta((t - t_mid) / tau).
class TestFunction {
 public:
  TestFunction(std::array<double, 2> center, double radius, double t_start, double t_end);

  double value(double x, double y, double t) const;
  double time_derivative(double x, double y, double t) const;
  std::array<double, 2> gradient(double x, double y, double t) const;

  double sup() const;
  double sup_time_derivative() const;

  /// True when the spatial ball lies strictly inside the box and the time
  /// window strictly inside (0, final_time).
  bool supported_inside(const Grid& grid, double final_time) const;

  std::array<double, 2> center() const { return center_; }
  double radius() const { return radius_; }
  double t_start() const { return t_start_; }
  double t_end() const { return t_end_; }

 private:
  double spatial(double x, double y) const;
  double temporal(double t) const;

  std::array<double, 2> center_;
  double radius_;
  double t_start_;
  double t_end_;
};

}  // namespace hsl
