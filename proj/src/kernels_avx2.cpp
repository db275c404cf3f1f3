// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include <immintrin.h>

#include <cmath>

#include "flatblow/kernels.hpp"

namespace flatblow::kernels {
namespace detail {

namespace {

void stencil3(const double* lo, const double* di, const double* hi, const double* x,
              double* out, std::size_t n) {
  if (n < 3) return;
  std::size_t j = 1;
  const std::size_t end = n - 1;
  for (; j + 4 <= end; j += 4) {
    __m256d xm = _mm256_loadu_pd(x + j - 1);
    __m256d x0 = _mm256_loadu_pd(x + j);
    __m256d xp = _mm256_loadu_pd(x + j + 1);
    __m256d acc = _mm256_mul_pd(_mm256_loadu_pd(lo + j), xm);
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(di + j), x0, acc);
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(hi + j), xp, acc);
    _mm256_storeu_pd(out + j, acc);
  }
  for (; j < end; ++j) out[j] = lo[j] * x[j - 1] + di[j] * x[j] + hi[j] * x[j + 1];
}

double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double dot3(const double* w, const double* f, const double* g, std::size_t n) {
  __m256d a0 = _mm256_setzero_pd();
  __m256d a1 = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 8 <= n; j += 8) {
    __m256d p0 = _mm256_mul_pd(_mm256_loadu_pd(w + j), _mm256_loadu_pd(f + j));
    __m256d p1 = _mm256_mul_pd(_mm256_loadu_pd(w + j + 4), _mm256_loadu_pd(f + j + 4));
    a0 = _mm256_fmadd_pd(p0, _mm256_loadu_pd(g + j), a0);
    a1 = _mm256_fmadd_pd(p1, _mm256_loadu_pd(g + j + 4), a1);
  }
  double acc = hsum(_mm256_add_pd(a0, a1));
  for (; j < n; ++j) acc += w[j] * f[j] * g[j];
  return acc;
}

void lincomb(double* out, const double* x, const double* c, const double* const* v,
             std::size_t nv, std::size_t n) {
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    __m256d acc = _mm256_loadu_pd(x + j);
    for (std::size_t k = 0; k < nv; ++k) {
      acc = _mm256_fmadd_pd(_mm256_set1_pd(c[k]), _mm256_loadu_pd(v[k] + j), acc);
    }
    _mm256_storeu_pd(out + j, acc);
  }
  for (; j < n; ++j) {
    double acc = x[j];
    for (std::size_t k = 0; k < nv; ++k) acc += c[k] * v[k][j];
    out[j] = acc;
  }
}

double absmax(const double* x, std::size_t n) {
  const __m256d mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
  __m256d m = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) m = _mm256_max_pd(m, _mm256_and_pd(mask, _mm256_loadu_pd(x + j)));
  alignas(32) double buf[4];
  _mm256_store_pd(buf, m);
  double r = std::fmax(std::fmax(buf[0], buf[1]), std::fmax(buf[2], buf[3]));
  for (; j < n; ++j) r = std::fmax(r, std::fabs(x[j]));
  return r;
}

}  // namespace

const Table& avx2_table() {
  static const Table t{"avx2", stencil3, dot3, lincomb, absmax};
  return t;
}

}  // namespace detail
}  // namespace flatblow::kernels
