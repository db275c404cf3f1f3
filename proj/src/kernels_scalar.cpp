#include "flatblow/kernels.hpp"

#include <cmath>

namespace flatblow::kernels {
namespace {

void stencil3(const double* lo, const double* di, const double* hi, const double* x,
              double* out, std::size_t n) {
  for (std::size_t j = 1; j + 1 < n; ++j) {
    out[j] = lo[j] * x[j - 1] + di[j] * x[j] + hi[j] * x[j + 1];
  }
}

double dot3(const double* w, const double* f, const double* g, std::size_t n) {
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) acc += w[j] * f[j] * g[j];
  return acc;
}

void lincomb(double* out, const double* x, const double* c, const double* const* v,
             std::size_t nv, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    double acc = x[j];
    for (std::size_t k = 0; k < nv; ++k) acc += c[k] * v[k][j];
    out[j] = acc;
  }
}

double absmax(const double* x, std::size_t n) {
  double m = 0.0;
  for (std::size_t j = 0; j < n; ++j) m = std::fmax(m, std::fabs(x[j]));
  return m;
}

}  // namespace

const Table& scalar() {
  static const Table t{"scalar", stencil3, dot3, lincomb, absmax};
  return t;
}

}  // namespace flatblow::kernels
