// AVX2 implementation of the batched inverse-normal transform. Keeps the
// exact operation order of the scalar kernel (multiply, add, divide - never
// FMA) so both paths produce bit-identical doubles; lanes falling outside the
// central region are recomputed with the shared scalar routine.

#include <immintrin.h>

#include <cstddef>

#include "mapwh/kernels.hpp"

namespace mapwh {
namespace detail {

void normals_scalar_impl(const double* u, double* z, std::size_t n);

namespace {

constexpr double kA0 = -3.969683028665376e+01;
constexpr double kA1 = 2.209460984245205e+02;
constexpr double kA2 = -2.759285104469687e+02;
constexpr double kA3 = 1.383577518672690e+02;
constexpr double kA4 = -3.066479806614716e+01;
constexpr double kA5 = 2.506628277459239e+00;

constexpr double kB0 = -5.447609879822406e+01;
constexpr double kB1 = 1.615858368580409e+02;
constexpr double kB2 = -1.556989798598866e+02;
constexpr double kB3 = 6.680131188771972e+01;
constexpr double kB4 = -1.328068155288572e+01;

inline __m256d horner5(__m256d r, double c0, double c1, double c2, double c3,
                       double c4, double c5) {
  __m256d acc = _mm256_set1_pd(c0);
  acc = _mm256_add_pd(_mm256_mul_pd(acc, r), _mm256_set1_pd(c1));
  acc = _mm256_add_pd(_mm256_mul_pd(acc, r), _mm256_set1_pd(c2));
  acc = _mm256_add_pd(_mm256_mul_pd(acc, r), _mm256_set1_pd(c3));
  acc = _mm256_add_pd(_mm256_mul_pd(acc, r), _mm256_set1_pd(c4));
  acc = _mm256_add_pd(_mm256_mul_pd(acc, r), _mm256_set1_pd(c5));
  return acc;
}

}  // namespace

void normals_avx2_impl(const double* u, double* z, std::size_t n) {
  constexpr double kLow = 0.02425;
  const __m256d vlow = _mm256_set1_pd(kLow);
  const __m256d vhigh = _mm256_set1_pd(1.0 - kLow);
  const __m256d vhalf = _mm256_set1_pd(0.5);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d p = _mm256_loadu_pd(u + i);
    alignas(32) double pbuf[4];
    _mm256_store_pd(pbuf, p);  // survive in-place use (z may alias u)
    const __m256d q = _mm256_sub_pd(p, vhalf);
    const __m256d r = _mm256_mul_pd(q, q);
    const __m256d num = horner5(r, kA0, kA1, kA2, kA3, kA4, kA5);
    const __m256d den = horner5(r, kB0, kB1, kB2, kB3, kB4, 1.0);
    const __m256d central = _mm256_div_pd(_mm256_mul_pd(num, q), den);
    const __m256d tails = _mm256_or_pd(_mm256_cmp_pd(p, vlow, _CMP_LT_OQ),
                                       _mm256_cmp_pd(p, vhigh, _CMP_GT_OQ));
    _mm256_storeu_pd(z + i, central);
    const int mask = _mm256_movemask_pd(tails);
    if (mask)
      for (int lane = 0; lane < 4; ++lane)
        if (mask & (1 << lane)) z[i + lane] = inverse_normal_cdf(pbuf[lane]);
  }
  if (i < n) normals_scalar_impl(u + i, z + i, n - i);
}

}  // namespace detail
}  // namespace mapwh
