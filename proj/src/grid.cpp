#include "hsl/grid.hpp"

#include <string>

namespace hsl {

Grid::Grid(int dimension_, double half_width_, int cells_)
    : dimension(dimension_), half_width(half_width_), cells(cells_) {
  if (dimension != 1 && dimension != 2) throw std::invalid_argument("grid dimension must be 1 or 2");
  if (!(half_width > 0.0)) throw std::invalid_argument("grid half width must be positive");
  if (cells < 8) throw std::invalid_argument("grid needs at least 8 cells per axis, got " + std::to_string(cells));
}

bool Grid::on_boundary(Eigen::Index k) const {
  auto [i, j] = cell(k);
  bool edge = i == 0 || i == cells - 1;
  if (dimension == 2) edge = edge || j == 0 || j == cells - 1;
  return edge;
}

double mollifier(double s) {
  double q = 1.0 - s * s;
  return q > 0.0 ? std::exp(-1.0 / q) : 0.0;
}

double mollifier_derivative(double s) {
  double q = 1.0 - s * s;
  return q > 0.0 ? -2.0 * s / (q * q) * std::exp(-1.0 / q) : 0.0;
}

double mollifier_derivative_sup() {
  const double s = std::pow(3.0, -0.25);
  return std::abs(mollifier_derivative(s));
}

double smooth_step_down(double s) {
  if (s <= 0.0) return 1.0;
  if (s >= 1.0) return 0.0;
  double a = std::exp(-1.0 / (1.0 - s));
  double b = std::exp(-1.0 / s);
  return a / (a + b);
}

TestFunction::TestFunction(std::array<double, 2> center, double radius, double t_start, double t_end)
    : center_(center), radius_(radius), t_start_(t_start), t_end_(t_end) {
  if (!(radius > 0.0)) throw std::invalid_argument("test function radius must be positive");
  if (!(t_end > t_start)) throw std::invalid_argument("test function window must have t_end > t_start");
}

double TestFunction::spatial(double x, double y) const {
  return mollifier(std::hypot(x - center_[0], y - center_[1]) / radius_);
}

double TestFunction::temporal(double t) const {
  double half = 0.5 * (t_end_ - t_start_);
  return mollifier((t - 0.5 * (t_start_ + t_end_)) / half);
}

double TestFunction::value(double x, double y, double t) const { return spatial(x, y) * temporal(t); }

double TestFunction::time_derivative(double x, double y, double t) const {
  double half = 0.5 * (t_end_ - t_start_);
  return spatial(x, y) * mollifier_derivative((t - 0.5 * (t_start_ + t_end_)) / half) / half;
}

std::array<double, 2> TestFunction::gradient(double x, double y, double t) const {
  double dx = x - center_[0];
  double dy = y - center_[1];
  double r = std::hypot(dx, dy);
  if (r == 0.0) return {0.0, 0.0};
  double radial = mollifier_derivative(r / radius_) / radius_ * temporal(t);
  return {radial * dx / r, radial * dy / r};
}

double TestFunction::sup() const { return std::exp(-2.0); }

double TestFunction::sup_time_derivative() const {
  return std::exp(-1.0) * mollifier_derivative_sup() / (0.5 * (t_end_ - t_start_));
}

bool TestFunction::supported_inside(const Grid& grid, double final_time) const {
  if (!(t_start_ > 0.0 && t_end_ < final_time)) return false;
  for (int axis = 0; axis < grid.dimension; ++axis) {
    if (std::abs(center_[axis]) + radius_ >= grid.half_width) return false;
  }
  return true;
}

}  // namespace hsl
