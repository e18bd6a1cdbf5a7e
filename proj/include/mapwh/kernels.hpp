#pragma once
// Counter-based random number kernels for path simulation: Philox4x32-10
// blocks, uniform doubles derived from them, and a batched inverse-normal
// transform with scalar and AVX2 implementations that produce bit-identical
// outputs (the vector path uses no FMA and falls back to the very same scalar
// code outside the central region of the rational approximation).
//
// Streams are addressed, never seeked: output block k of stream `key` is a
// pure function of (key, k), so any path or thread can regenerate its own
// draws regardless of scheduling.

#include <cstddef>
#include <cstdint>

namespace mapwh {

struct PhiloxBlock {
  std::uint32_t x[4];
};

// Raw 10-round Philox4x32 block function on explicit counter and key words.
PhiloxBlock philox4x32(const std::uint32_t counter[4],
                       const std::uint32_t key[2]);

// Convenience form: 64-bit counter in words 0-1 (low, high), zero upper
// words, 64-bit key split the same way.
PhiloxBlock philox4x32(std::uint64_t key, std::uint64_t counter);

// n doubles in the open interval (0, 1), two per block, starting at
// `counter0`; block k uses counter0 + k. 53 leading bits plus a half-ulp
// offset, so 0 and 1 are never produced.
void fill_uniform(std::uint64_t key, std::uint64_t counter0, double* out,
                  std::size_t n);

// Inverse standard-normal distribution function, rational approximation with
// relative error below 1.2e-9 everywhere on (0, 1).
double inverse_normal_cdf(double p);

// Batched uniform -> standard normal transform kernels.
using NormalsFn = void (*)(const double* u, double* z, std::size_t n);

NormalsFn normals_kernel_scalar();
// Vector implementation, or nullptr when unavailable (not compiled in or not
// supported by the running CPU).
NormalsFn normals_kernel_vector();
// The kernel the library actually uses: the vector one when available unless
// the environment variable MAPWH_KERNEL=scalar forces the scalar path. The
// choice never changes results, only speed.
NormalsFn normals_kernel();
const char* normals_kernel_name();

// fill_uniform + active kernel in one call.
void fill_normals(std::uint64_t key, std::uint64_t counter0, double* z,
                  std::size_t n);

}  // namespace mapwh
