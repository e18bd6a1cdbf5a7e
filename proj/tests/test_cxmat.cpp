#include "mapwh/cxmat.hpp"

#include <cmath>
#include <random>

#include "doctest.h"

using namespace mapwh;

namespace {

CxMat random_mat(std::mt19937_64& rng, int n, double off_scale = 0.2) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  CxMat m = CxMat::identity(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      m(i, j) += off_scale * cxd(u(rng), u(rng));
  return m;
}

}  // namespace

TEST_CASE("arithmetic and norms") {
  CxMat a(2, 2);
  a(0, 0) = {1, 2};
  a(0, 1) = {0, -1};
  a(1, 0) = 3.0;
  a(1, 1) = {0, 0};
  CHECK(a.frobenius() == doctest::Approx(std::sqrt(1 + 4 + 1 + 9)));
  CHECK(a.max_abs() == doctest::Approx(3.0));
  CHECK(a.max_imag_abs() == doctest::Approx(2.0));
  const CxMat t = a.transpose();
  CHECK(t(1, 0) == a(0, 1));
  const CxMat s = a + a - a;
  CHECK((s - a).frobenius() == 0.0);
  const CxMat d = CxMat::diag(std::vector<double>{2.0, 5.0});
  const CxMat p = d * a;
  CHECK(p(0, 0) == cxd{2, 4});
  CHECK(p(1, 0) == cxd{15, 0});
}

TEST_CASE("determinant closed forms") {
  CxMat a(2, 2);
  a(0, 0) = 3;
  a(0, 1) = 1;
  a(1, 0) = 4;
  a(1, 1) = 2;
  CHECK(det(a).real() == doctest::Approx(2.0));
  CHECK(det(a).imag() == doctest::Approx(0.0));
  // Permutation matrix: determinant -1.
  CxMat p(2, 2);
  p(0, 1) = 1;
  p(1, 0) = 1;
  CHECK(det(p).real() == doctest::Approx(-1.0));
  // Complex 2x2 with known determinant (1+i)(1-i) - 1 = 1.
  CxMat c(2, 2);
  c(0, 0) = {1, 1};
  c(0, 1) = 1;
  c(1, 0) = 1;
  c(1, 1) = {1, -1};
  CHECK(det(c).real() == doctest::Approx(1.0));
  CHECK(det(c).imag() == doctest::Approx(0.0).epsilon(1e-14));
  // Singular: repeated rows.
  CxMat z(2, 2);
  z(0, 0) = 1;
  z(0, 1) = 2;
  z(1, 0) = 2;
  z(1, 1) = 4;
  CHECK(std::abs(det(z)) == 0.0);
  CHECK_THROWS_AS(inverse(z), Error);
  CHECK(std::isinf(cond_frobenius(z)));
}

TEST_CASE("determinant is multiplicative") {
  std::mt19937_64 rng(31);
  for (int rep = 0; rep < 10; ++rep) {
    const CxMat a = random_mat(rng, 4), b = random_mat(rng, 4);
    const cxd lhs = det(a * b), rhs = det(a) * det(b);
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(rhs)));
  }
}

TEST_CASE("solve and inverse") {
  std::mt19937_64 rng(37);
  for (int n : {1, 2, 3, 5, 8}) {
    const CxMat a = random_mat(rng, n);
    const CxMat inv = inverse(a);
    CHECK((a * inv - CxMat::identity(n)).max_abs() <= 1e-12);
    CHECK((inv * a - CxMat::identity(n)).max_abs() <= 1e-12);
    CxMat b(n, 2);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < 2; ++j) b(i, j) = cxd(u(rng), u(rng));
    const CxMat x = solve(a, b);
    CHECK((a * x - b).max_abs() <= 1e-12);
  }
  // Real input stays exactly real.
  const CxMat q = to_cxmat({-1.0, 1.0, 0.5, -0.5}, 2, 2);
  CHECK(inverse(q + CxMat::identity(2) * cxd(3.0)).max_imag_abs() == 0.0);
}

TEST_CASE("matrix exponential closed forms") {
  // expm(0) = I.
  CHECK((expm(CxMat(3, 3)) - CxMat::identity(3)).max_abs() <= 1e-15);
  // Diagonal.
  const CxMat d = expm(CxMat::diag(std::vector<double>{0.3, -1.2}));
  CHECK(d(0, 0).real() == doctest::Approx(std::exp(0.3)).epsilon(1e-14));
  CHECK(d(1, 1).real() == doctest::Approx(std::exp(-1.2)).epsilon(1e-14));
  CHECK(std::abs(d(0, 1)) == 0.0);
  // Nilpotent [[0,1],[0,0]]: exp = I + N.
  CxMat nilp(2, 2);
  nilp(0, 1) = 1.0;
  const CxMat en = expm(nilp);
  CHECK(en(0, 0).real() == doctest::Approx(1.0));
  CHECK(en(0, 1).real() == doctest::Approx(1.0));
  CHECK(std::abs(en(1, 0)) <= 1e-15);
  // Rotation generator [[0,-t],[t,0]]: exp = [[cos t, -sin t],[sin t, cos t]].
  const double t = 0.8;
  CxMat rot(2, 2);
  rot(0, 1) = -t;
  rot(1, 0) = t;
  const CxMat er = expm(rot);
  CHECK(er(0, 0).real() == doctest::Approx(std::cos(t)).epsilon(1e-14));
  CHECK(er(1, 0).real() == doctest::Approx(std::sin(t)).epsilon(1e-14));
  // Large norm exercises the squaring phase: scalar 2x2 times 20.
  CxMat big(2, 2);
  big(0, 0) = 20.0;
  big(1, 1) = -20.0;
  const CxMat eb = expm(big);
  CHECK(eb(0, 0).real() == doctest::Approx(std::exp(20.0)).epsilon(1e-12));
  CHECK(eb(1, 1).real() == doctest::Approx(std::exp(-20.0)).epsilon(1e-12));
}

TEST_CASE("matrix exponential properties") {
  std::mt19937_64 rng(41);
  for (int rep = 0; rep < 6; ++rep) {
    const CxMat a = random_mat(rng, 3, 0.5);
    // Semigroup along commuting arguments: exp(a) exp(a) = exp(2a).
    const CxMat e1 = expm(a);
    const CxMat e2 = expm(a * cxd(2.0));
    CHECK((e1 * e1 - e2).max_abs() <= 1e-12 * e2.max_abs());
    // det(exp(a)) = exp(trace(a)).
    cxd tr{};
    for (int i = 0; i < 3; ++i) tr += a(i, i);
    const cxd lhs = det(e1), rhs = std::exp(tr);
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(rhs));
    // Derivative at zero: (exp(h a) - I)/h -> a.
    const double h = 1e-6;
    const CxMat fd = (expm(a * cxd(h)) - CxMat::identity(3)) * cxd(1.0 / h);
    CHECK((fd - a).max_abs() <= 1e-5);
  }
  // Conservative generator: rows of exp(tQ) sum to one, entries nonnegative.
  const CxMat q = to_cxmat({-1.0, 1.0, 2.0, -2.0}, 2, 2);
  for (double t : {0.1, 1.0, 10.0}) {
    const CxMat p = expm(q * cxd(t));
    for (int i = 0; i < 2; ++i) {
      cxd row{};
      for (int j = 0; j < 2; ++j) {
        row += p(i, j);
        CHECK(p(i, j).real() >= -1e-14);
      }
      CHECK(row.real() == doctest::Approx(1.0).epsilon(1e-13));
      CHECK(std::abs(row.imag()) <= 1e-15);
    }
  }
}
