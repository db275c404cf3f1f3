#include "flatblow/interp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "flatblow/errors.hpp"

namespace flatblow {

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  const std::size_t n = x_.size();
  if (n < 2 || y_.size() != n) throw DomainError("interpolant needs matching grids of size >= 2");
  for (std::size_t k = 1; k < n; ++k) {
    if (!(x_[k] > x_[k - 1])) throw DomainError("interpolation grid must be strictly increasing");
  }
  std::vector<double> d(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) d[k] = (y_[k + 1] - y_[k]) / (x_[k + 1] - x_[k]);
  m_.assign(n, 0.0);
  if (n == 2) {
    m_[0] = m_[1] = d[0];
    return;
  }
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const double hm = x_[k] - x_[k - 1];
    const double hp = x_[k + 1] - x_[k];
    double s = (hp * d[k - 1] + hm * d[k]) / (hm + hp);
    const double a = d[k - 1];
    const double b = d[k];
    if (a == 0.0 || b == 0.0) {
      s = 0.0;
    } else if ((a > 0.0) == (b > 0.0)) {
      const double cap = 3.0 * std::min(std::abs(a), std::abs(b));
      if ((s > 0.0) != (a > 0.0)) s = 0.0;
      s = std::copysign(std::min(std::abs(s), cap), a);
    }
    m_[k] = s;
  }
  // Second-order one-sided end slopes, limited like the interior.
  auto end_slope = [](double h0, double h1, double d0, double d1) {
    double s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (d0 == 0.0 || (s > 0.0) != (d0 > 0.0)) return 0.0;
    if ((d0 > 0.0) != (d1 > 0.0) && std::abs(s) > 3.0 * std::abs(d0)) s = 3.0 * d0;
    return s;
  };
  m_[0] = end_slope(x_[1] - x_[0], x_[2] - x_[1], d[0], d[1]);
  m_[n - 1] = end_slope(x_[n - 1] - x_[n - 2], x_[n - 2] - x_[n - 3], d[n - 2], d[n - 3]);
}

double MonotoneCubic::operator()(double x) const {
  if (!(x >= x_.front() && x <= x_.back())) {
    throw BoundsError("interpolation point " + std::to_string(x) + " outside [" +
                      std::to_string(x_.front()) + ", " + std::to_string(x_.back()) + "]");
  }
  auto it = std::upper_bound(x_.begin(), x_.end(), x);
  std::size_t k = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
  if (k >= x_.size() - 1) k = x_.size() - 2;
  const double h = x_[k + 1] - x_[k];
  const double t = (x - x_[k]) / h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
  const double h10 = t3 - 2.0 * t2 + t;
  const double h01 = -2.0 * t3 + 3.0 * t2;
  const double h11 = t3 - t2;
  return h00 * y_[k] + h10 * h * m_[k] + h01 * y_[k + 1] + h11 * h * m_[k + 1];
}

}  // namespace flatblow
