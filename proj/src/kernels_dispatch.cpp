#include <cstdlib>
#include <cstring>

#include "flatblow/kernels.hpp"

namespace flatblow::kernels {
namespace detail {
const Table& avx2_table();
}

const Table* avx2() {
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok ? &detail::avx2_table() : nullptr;
}

const Table& active() {
  static const Table* chosen = [] {
    const char* env = std::getenv("FLATBLOW_SIMD");
    if (env != nullptr && std::strcmp(env, "scalar") == 0) return &scalar();
    const Table* v = avx2();
    return v != nullptr ? v : &scalar();
  }();
  return *chosen;
}

}  // namespace flatblow::kernels
