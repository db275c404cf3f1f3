#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

#include "flatblow/exact_poly.hpp"

namespace flatblow {

// Largest Hermite index kept in tails and accepted by hermite_poly by default.
inline constexpr int kMaxMode = 16;
// Modes 0..kLowModes-1 are tracked individually, the rest goes into q_minus.
inline constexpr int kLowModes = 7;

// h_m(y) = sum_n m!/(n!(m-2n)!) (-1)^n y^(m-2n), orthogonal for rho_1.
ExactPoly hermite_poly(int m, int m_max = kMaxMode);

// 2^m m!, the squared L2(rho_1) norm of h_m.
mpq_class hermite_norm_sq(int m);
double hermite_norm_sq_d(int m);

// h_0..h_mmax at y via h_{m+1} = y h_m - 2m h_{m-1}.
template <class T>
void hermite_values(int mmax, T y, T* out) {
  out[0] = T(1);
  if (mmax >= 1) out[1] = y;
  for (int m = 1; m < mmax; ++m) out[m + 1] = y * out[m] - T(2 * m) * out[m - 1];
}

// rho_d(y) = exp(-|y|^2/4)/(4 pi)^(d/2), evaluated for a radial argument.
double rho(double y_norm, int d = 1);

/**
 * Nodes and weights with sum_k w_k f(y_k) ~ int f rho_1 dy.
 * basis[m][k] holds h_m(y_k) for m <= kMaxMode.
 */
struct Quadrature {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::vector<std::vector<double>> basis;
};

// Gauss-Hermite rule for exp(-x^2), returned as (x_k, W_k) ascending.
template <class T>
void gauss_hermite_raw(int n, std::vector<T>& x, std::vector<T>& w) {
  using std::abs;
  using std::pow;
  using std::sqrt;
  x.assign(static_cast<std::size_t>(n), T(0));
  w.assign(static_cast<std::size_t>(n), T(0));
  const T pim4 = pow(T(std::numbers::pi_v<long double>), T(-0.25));
  const T eps = std::numeric_limits<T>::epsilon() * T(16);
  const int half = (n + 1) / 2;
  T z = 0;
  T pp = 0;
  for (int i = 0; i < half; ++i) {
    if (i == 0) {
      z = sqrt(T(2 * n + 1)) - T(1.85575) * pow(T(2 * n + 1), T(-1.0 / 6.0));
    } else if (i == 1) {
      z -= T(1.14) * pow(T(n), T(0.426)) / z;
    } else if (i == 2) {
      z = T(1.86) * z - T(0.86) * x[0];
    } else if (i == 3) {
      z = T(1.91) * z - T(0.91) * x[1];
    } else {
      z = T(2) * z - x[static_cast<std::size_t>(i - 2)];
    }
    for (int it = 0; it < 100; ++it) {
      T p1 = pim4;
      T p2 = 0;
      for (int j = 0; j < n; ++j) {
        T p3 = p2;
        p2 = p1;
        p1 = z * sqrt(T(2) / T(j + 1)) * p2 - sqrt(T(j) / T(j + 1)) * p3;
      }
      pp = sqrt(T(2 * n)) * p2;
      T z1 = z;
      z = z1 - p1 / pp;
      if (abs(z - z1) <= eps * (T(1) + abs(z))) break;
    }
    x[static_cast<std::size_t>(i)] = z;
    x[static_cast<std::size_t>(n - 1 - i)] = -z;
    w[static_cast<std::size_t>(i)] = T(2) / (pp * pp);
    w[static_cast<std::size_t>(n - 1 - i)] = w[static_cast<std::size_t>(i)];
  }
  std::reverse(x.begin(), x.end());
  std::reverse(w.begin(), w.end());
}

// Gauss-Hermite rule mapped to the weight rho_1 (y = 2x, w = W/sqrt(pi)).
template <class T>
void gauss_hermite_rho(int n, std::vector<T>& y, std::vector<T>& w) {
  gauss_hermite_raw<T>(n, y, w);
  const T isp = T(1) / std::sqrt(T(std::numbers::pi_v<long double>));
  for (std::size_t k = 0; k < y.size(); ++k) {
    y[k] *= T(2);
    w[k] *= isp;
  }
}

Quadrature gauss_hermite_rule(int order = 64);

// Cached order-64 rule.
const Quadrature& default_rule();

// Trapezoid rule on a (possibly nonuniform) grid weighted by rho_1.
Quadrature grid_rule(const std::vector<double>& y_grid);

// Total mass of rho_d under a tensor rule of the given order.
double gaussian_weight_mass(int d, int order = 64);

using Fn = std::function<double(double)>;

double inner_product(const Fn& f, const Fn& g, const Quadrature& rule = default_rule());

/**
 * q = sum_{m<=6} q_m h_m + q_minus with q_m = <q,h_m>/(2^m m!).
 * tail holds q_7..q_{kMaxMode} when requested.
 */
struct SpectralDecomp {
  std::array<double, kLowModes> q{};
  double q_minus_norm = 0.0;
  std::vector<double> tail;
  double norm_sq = 0.0;
};

SpectralDecomp project(const Fn& f, const Quadrature& rule = default_rule(), bool with_tail = false);

// Same, with f already sampled at rule.nodes.
SpectralDecomp project_values(const std::vector<double>& values, const Quadrature& rule,
                              bool with_tail = false);

// Exact coefficients c_m with poly = sum c_m h_m (size degree+1).
std::vector<mpq_class> to_hermite_basis(const ExactPoly& poly);
ExactPoly from_hermite_basis(const std::vector<mpq_class>& c);

// Floating version for polynomials with irrational coefficients (monomial basis in).
std::vector<double> to_hermite_basis_numeric(const std::vector<double>& monomial);

// L = d^2/dy^2 - (y/2) d/dy + 1, exactly.
ExactPoly apply_L(const ExactPoly& poly);

// Multiplies the m-th coefficient by exp((1 - m/2) ds).
SpectralDecomp semigroup_step(const SpectralDecomp& decomp, double ds);

}  // namespace flatblow
