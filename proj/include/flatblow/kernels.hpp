#pragma once

#include <cstddef>

// Hot loops shared by the solvers and the projections. Each kernel has a
// scalar reference version and an AVX2/FMA version picked at runtime.
namespace flatblow::kernels {

// out[j] = lo[j]*x[j-1] + di[j]*x[j] + hi[j]*x[j+1] for 1 <= j < n-1.
// out[0] and out[n-1] are left untouched.
using Stencil3Fn = void (*)(const double* lo, const double* di, const double* hi,
                            const double* x, double* out, std::size_t n);

// sum_j w[j]*f[j]*g[j]
using Dot3Fn = double (*)(const double* w, const double* f, const double* g, std::size_t n);

// out[j] = x[j] + sum_k c[k]*v[k][j]; out may alias x.
using LinCombFn = void (*)(double* out, const double* x, const double* c,
                           const double* const* v, std::size_t nv, std::size_t n);

// max_j |x[j]|
using AbsMaxFn = double (*)(const double* x, std::size_t n);

struct Table {
  const char* name;
  Stencil3Fn stencil3;
  Dot3Fn dot3;
  LinCombFn lincomb;
  AbsMaxFn absmax;
};

const Table& scalar();

// nullptr when the CPU lacks AVX2/FMA.
const Table* avx2();

// AVX2 when available unless FLATBLOW_SIMD=scalar is set.
const Table& active();

}  // namespace flatblow::kernels
