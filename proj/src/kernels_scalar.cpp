#include <cmath>
#include <cstdint>

#include "mapwh/errors.hpp"
#include "mapwh/kernels.hpp"

namespace mapwh {

// ------------------------------------------------------------- philox ------

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kBump0 = 0x9E3779B9u;  // golden-ratio word
constexpr std::uint32_t kBump1 = 0xBB67AE85u;  // sqrt(3)-1 word

inline void philox_round(std::uint32_t c[4], const std::uint32_t k[2]) {
  const std::uint64_t p0 = std::uint64_t(kMul0) * c[0];
  const std::uint64_t p1 = std::uint64_t(kMul1) * c[2];
  const std::uint32_t hi0 = std::uint32_t(p0 >> 32), lo0 = std::uint32_t(p0);
  const std::uint32_t hi1 = std::uint64_t(p1) >> 32, lo1 = std::uint32_t(p1);
  const std::uint32_t n0 = hi1 ^ c[1] ^ k[0];
  const std::uint32_t n1 = lo1;
  const std::uint32_t n2 = hi0 ^ c[3] ^ k[1];
  const std::uint32_t n3 = lo0;
  c[0] = n0;
  c[1] = n1;
  c[2] = n2;
  c[3] = n3;
}

}  // namespace

PhiloxBlock philox4x32(const std::uint32_t counter[4],
                       const std::uint32_t key[2]) {
  std::uint32_t c[4] = {counter[0], counter[1], counter[2], counter[3]};
  std::uint32_t k[2] = {key[0], key[1]};
  for (int r = 0; r < 10; ++r) {
    philox_round(c, k);
    k[0] += kBump0;
    k[1] += kBump1;
  }
  return PhiloxBlock{{c[0], c[1], c[2], c[3]}};
}

PhiloxBlock philox4x32(std::uint64_t key, std::uint64_t counter) {
  const std::uint32_t c[4] = {std::uint32_t(counter),
                              std::uint32_t(counter >> 32), 0u, 0u};
  const std::uint32_t k[2] = {std::uint32_t(key), std::uint32_t(key >> 32)};
  return philox4x32(c, k);
}

void fill_uniform(std::uint64_t key, std::uint64_t counter0, double* out,
                  std::size_t n) {
  std::size_t i = 0;
  std::uint64_t ctr = counter0;
  while (i < n) {
    const PhiloxBlock b = philox4x32(key, ctr++);
    const std::uint64_t v0 = (std::uint64_t(b.x[0]) << 32) | b.x[1];
    const std::uint64_t v1 = (std::uint64_t(b.x[2]) << 32) | b.x[3];
    out[i++] = (double(v0 >> 11) + 0.5) * 0x1p-53;
    if (i < n) out[i++] = (double(v1 >> 11) + 0.5) * 0x1p-53;
  }
}

// ---------------------------------------------- inverse normal cdf ---------
//
// Central region uses a degree-5/5 rational minimax approximation in
// q = p - 1/2; the tails switch to a rational form in sqrt(-2 log p). The
// scalar and vector kernels must keep the exact operation order below.

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

constexpr double kC0 = -7.784894002430293e-03;
constexpr double kC1 = -3.223964580411365e-01;
constexpr double kC2 = -2.400758277161838e+00;
constexpr double kC3 = -2.549732539343734e+00;
constexpr double kC4 = 4.374664141464968e+00;
constexpr double kC5 = 2.938163982698783e+00;

constexpr double kD0 = 7.784695709041462e-03;
constexpr double kD1 = 3.224671290700398e-01;
constexpr double kD2 = 2.445134137142996e+00;
constexpr double kD3 = 3.754408661907416e+00;

double tail_value(double q) {
  const double num =
      ((((kC0 * q + kC1) * q + kC2) * q + kC3) * q + kC4) * q + kC5;
  const double den = (((kD0 * q + kD1) * q + kD2) * q + kD3) * q + 1.0;
  return num / den;
}

}  // namespace

double inverse_normal_cdf(double p) {
  constexpr double kLow = 0.02425;
  if (!(p > 0.0) || !(p < 1.0))
    throw ValidationError("inverse normal needs p strictly inside (0, 1)");
  if (p < kLow) return tail_value(std::sqrt(-2.0 * std::log(p)));
  if (p > 1.0 - kLow)
    return -tail_value(std::sqrt(-2.0 * std::log(1.0 - p)));
  const double q = p - 0.5;
  const double r = q * q;
  const double num =
      ((((kA0 * r + kA1) * r + kA2) * r + kA3) * r + kA4) * r + kA5;
  const double den =
      ((((kB0 * r + kB1) * r + kB2) * r + kB3) * r + kB4) * r + 1.0;
  return num * q / den;
}

namespace detail {

void normals_scalar_impl(const double* u, double* z, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) z[i] = inverse_normal_cdf(u[i]);
}

}  // namespace detail

NormalsFn normals_kernel_scalar() { return &detail::normals_scalar_impl; }

void fill_normals(std::uint64_t key, std::uint64_t counter0, double* z,
                  std::size_t n) {
  fill_uniform(key, counter0, z, n);
  normals_kernel()(z, z, n);
}

}  // namespace mapwh
