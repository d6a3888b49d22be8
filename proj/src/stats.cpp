#include "hsl/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace hsl {

namespace {

std::vector<double> ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = 0.5 * double(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
    i = j + 1;
  }
  return r;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  const double n = double(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

// Regularized incomplete beta via continued fraction (Lentz).
double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  if (x > (a + 1.0) / (a + b + 2.0)) return 1.0 - incomplete_beta(b, a, 1.0 - x);
  const double front = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x)) / a;
  double f = 1.0, c = 1.0, d = 0.0;
  for (int i = 0; i <= 400; ++i) {
    const int m = i / 2;
    double num;
    if (i == 0) {
      num = 1.0;
    } else if (i % 2 == 0) {
      num = m * (b - m) * x / ((a + 2.0 * m - 1.0) * (a + 2.0 * m));
    } else {
      num = -((a + m) * (a + b + m) * x) / ((a + 2.0 * m) * (a + 2.0 * m + 1.0));
    }
    d = 1.0 + num * d;
    if (std::abs(d) < 1e-300) d = 1e-300;
    d = 1.0 / d;
    c = 1.0 + num / c;
    if (std::abs(c) < 1e-300) c = 1e-300;
    const double cd = c * d;
    f *= cd;
    if (std::abs(1.0 - cd) < 1e-15) break;
  }
  return front * (f - 1.0);
}

// P(T <= t) for Student's t.
double student_t_cdf(double t, int dof) {
  const double x = dof / (dof + t * t);
  const double tail = 0.5 * incomplete_beta(0.5 * dof, 0.5, x);
  return t >= 0.0 ? 1.0 - tail : tail;
}

}  // namespace

double student_t_975(int dof) {
  if (dof < 1) throw std::invalid_argument("student_t_975: need at least one degree of freedom");
  double lo = 0.0, hi = 1000.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (student_t_cdf(mid, dof) < 0.975 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

DecayFit fit_decay_exponent(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_decay_exponent: size mismatch");
  if (x.size() < 3) throw std::invalid_argument("fit_decay_exponent: at least 3 points required");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw std::invalid_argument("fit_decay_exponent: values must be positive");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  const double n = double(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_decay_exponent: x values must not all coincide");
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - (intercept + slope * lx[i]);
    ssr += r * r;
  }
  const int dof = int(lx.size()) - 2;
  const double se = std::sqrt(ssr / dof / sxx);
  const double half = student_t_975(dof) * se;

  DecayFit fit;
  fit.exponent = -slope;
  fit.log_prefactor = intercept;
  fit.ci_low = fit.exponent - half;
  fit.ci_high = fit.exponent + half;
  fit.residual_rms = std::sqrt(ssr / n);
  fit.points = lx.size();
  return fit;
}

Spearman spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("spearman: size mismatch");
  if (x.size() < 2) throw std::invalid_argument("spearman: at least 2 points required");
  auto rx = ranks(x);
  auto ry = ranks(y);
  Spearman out;
  out.rho = pearson(rx, ry);

  const std::size_t n = x.size();
  if (n <= 9) {
    std::vector<double> perm = ry;
    std::sort(perm.begin(), perm.end());
    long total = 0, at_least = 0;
    do {
      ++total;
      if (pearson(rx, perm) >= out.rho - 1e-12) ++at_least;
    } while (std::next_permutation(perm.begin(), perm.end()));
    out.p_positive = double(at_least) / double(total);
  } else {
    const double r = std::clamp(out.rho, -0.999999999, 0.999999999);
    const double t = r * std::sqrt((n - 2.0) / (1.0 - r * r));
    out.p_positive = 1.0 - student_t_cdf(t, int(n) - 2);
  }
  return out;
}

double band_ratio(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("band_ratio: empty sequence");
  auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (!(*lo > 0.0)) throw std::invalid_argument("band_ratio: values must be positive");
  return *hi / *lo;
}

}  // namespace hsl
