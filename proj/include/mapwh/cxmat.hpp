#pragma once
// Small dense complex matrices, sized for phase counts (n <= 64): arithmetic,
// LU with partial pivoting (determinant / solve / inverse) and the scaling-
// and-squaring matrix exponential. Real-valued inputs stay exactly real
// through every routine here, so real work can share the complex path.

#include <complex>
#include <vector>

#include "mapwh/errors.hpp"

namespace mapwh {

using cxd = std::complex<double>;

class CxMat {
 public:
  CxMat() = default;
  CxMat(int rows, int cols) : r_(rows), c_(cols), v_(size_t(rows) * cols) {
    if (rows < 0 || cols < 0 || rows > 64 || cols > 64)
      throw ValidationError("matrix dimension out of range");
  }

  static CxMat identity(int n);
  static CxMat diag(const std::vector<cxd>& d);
  static CxMat diag(const std::vector<double>& d);

  int rows() const { return r_; }
  int cols() const { return c_; }

  cxd& operator()(int i, int j) { return v_[size_t(i) * c_ + j]; }
  const cxd& operator()(int i, int j) const { return v_[size_t(i) * c_ + j]; }

  CxMat& operator+=(const CxMat& o);
  CxMat& operator-=(const CxMat& o);
  CxMat& operator*=(cxd s);

  CxMat transpose() const;
  double frobenius() const;
  double max_abs() const;
  double max_imag_abs() const;

 private:
  int r_ = 0, c_ = 0;
  std::vector<cxd> v_;
};

CxMat operator+(CxMat a, const CxMat& b);
CxMat operator-(CxMat a, const CxMat& b);
CxMat operator*(CxMat a, cxd s);
CxMat operator*(cxd s, CxMat a);
CxMat operator*(const CxMat& a, const CxMat& b);
std::vector<cxd> operator*(const CxMat& a, const std::vector<cxd>& x);

// Row-major real data <-> complex matrices.
CxMat to_cxmat(const std::vector<double>& rowmajor, int rows, int cols);
std::vector<double> real_part(const CxMat& a);

cxd det(const CxMat& a);
// Both throw Error when a pivot degenerates (matrix numerically singular).
CxMat solve(const CxMat& a, CxMat b);
CxMat inverse(const CxMat& a);

// ||a||_F * ||a^{-1}||_F, or +infinity when the inverse does not exist.
double cond_frobenius(const CxMat& a);

// Matrix exponential, degree-13 Pade approximant with scaling and squaring.
CxMat expm(const CxMat& a);

}  // namespace mapwh
