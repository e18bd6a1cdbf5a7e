// Runtime selection of the batched normal-transform kernel. The choice is
// made once per process: the vector path when it is compiled in and the CPU
// supports it, unless MAPWH_KERNEL=scalar overrides. Either way the numbers
// are identical; only throughput differs.

#include <cstdlib>
#include <cstring>

#include "mapwh/kernels.hpp"

namespace mapwh {

namespace detail {
void normals_scalar_impl(const double* u, double* z, std::size_t n);
#if defined(MAPWH_HAVE_AVX2)
void normals_avx2_impl(const double* u, double* z, std::size_t n);
#endif
}  // namespace detail

NormalsFn normals_kernel_vector() {
#if defined(MAPWH_HAVE_AVX2)
  if (__builtin_cpu_supports("avx2")) return &detail::normals_avx2_impl;
#endif
  return nullptr;
}

namespace {

NormalsFn choose_kernel() {
  const char* pref = std::getenv("MAPWH_KERNEL");
  if (pref != nullptr && std::strcmp(pref, "scalar") == 0)
    return normals_kernel_scalar();
  if (NormalsFn v = normals_kernel_vector()) return v;
  return normals_kernel_scalar();
}

}  // namespace

NormalsFn normals_kernel() {
  static const NormalsFn chosen = choose_kernel();
  return chosen;
}

const char* normals_kernel_name() {
  return normals_kernel() == normals_kernel_scalar() ? "scalar" : "avx2";
}

}  // namespace mapwh
