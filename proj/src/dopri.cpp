#include "flatblow/dopri.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "flatblow/kernels.hpp"

namespace flatblow {

namespace {
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
}  // namespace

DormandPrince::DormandPrince(std::size_t n)
    : n_(n), k2_(n), k3_(n), k4_(n), k5_(n), k6_(n), tmp_(n), zeros_(n, 0.0) {}

double DormandPrince::attempt(const OdeRhs& f, double t, const double* x, const double* k1,
                              double h, double* x_new, double* k_new, double rtol, double atol) {
  const auto& K = kernels::active();
  double* tmp = tmp_.data();
  {
    const double c[] = {h * a21};
    const double* v[] = {k1};
    K.lincomb(tmp, x, c, v, 1, n_);
    f(t + c2 * h, tmp, k2_.data());
  }
  {
    const double c[] = {h * a31, h * a32};
    const double* v[] = {k1, k2_.data()};
    K.lincomb(tmp, x, c, v, 2, n_);
    f(t + c3 * h, tmp, k3_.data());
  }
  {
    const double c[] = {h * a41, h * a42, h * a43};
    const double* v[] = {k1, k2_.data(), k3_.data()};
    K.lincomb(tmp, x, c, v, 3, n_);
    f(t + c4 * h, tmp, k4_.data());
  }
  {
    const double c[] = {h * a51, h * a52, h * a53, h * a54};
    const double* v[] = {k1, k2_.data(), k3_.data(), k4_.data()};
    K.lincomb(tmp, x, c, v, 4, n_);
    f(t + c5 * h, tmp, k5_.data());
  }
  {
    const double c[] = {h * a61, h * a62, h * a63, h * a64, h * a65};
    const double* v[] = {k1, k2_.data(), k3_.data(), k4_.data(), k5_.data()};
    K.lincomb(tmp, x, c, v, 5, n_);
    f(t + h, tmp, k6_.data());
  }
  {
    const double c[] = {h * b1, h * b3, h * b4, h * b5, h * b6};
    const double* v[] = {k1, k3_.data(), k4_.data(), k5_.data(), k6_.data()};
    K.lincomb(x_new, x, c, v, 5, n_);
    f(t + h, x_new, k_new);
  }
  const double c[] = {h * e1, h * e3, h * e4, h * e5, h * e6, h * e7};
  const double* v[] = {k1, k3_.data(), k4_.data(), k5_.data(), k6_.data(), k_new};
  K.lincomb(tmp, zeros_.data(), c, v, 6, n_);
  double err = 0.0;
  for (std::size_t j = 0; j < n_; ++j) {
    const double sc = atol + rtol * std::max(std::abs(x[j]), std::abs(x_new[j]));
    err = std::max(err, std::abs(tmp[j]) / sc);
  }
  if (!std::isfinite(err)) return std::numeric_limits<double>::infinity();
  return err;
}

double DormandPrince::step_factor(double err) {
  if (err <= 0.0) return 5.0;
  return std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
}

}  // namespace flatblow
