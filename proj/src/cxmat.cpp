#include "mapwh/cxmat.hpp"

#include <cmath>
#include <limits>
#include <utility>

namespace mapwh {

namespace {

void require_same_shape(const CxMat& a, const CxMat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ValidationError("matrix shape mismatch");
}

// L and U packed in place, pivot rows recorded; sign tracks the permutation
// parity for the determinant.
struct Lu {
  CxMat a;
  std::vector<int> piv;
  int sign = 1;
  bool singular = false;
};

Lu lu_factor(CxMat a) {
  if (a.rows() != a.cols()) throw ValidationError("LU requires a square matrix");
  const int n = a.rows();
  Lu f{std::move(a), std::vector<int>(n), 1, false};
  double scale = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) scale = std::max(scale, std::abs(f.a(i, j)));
  const double tiny = scale * n * std::numeric_limits<double>::epsilon();
  for (int k = 0; k < n; ++k) {
    int p = k;
    for (int i = k + 1; i < n; ++i)
      if (std::abs(f.a(i, k)) > std::abs(f.a(p, k))) p = i;
    f.piv[k] = p;
    if (p != k) {
      for (int j = 0; j < n; ++j) std::swap(f.a(k, j), f.a(p, j));
      f.sign = -f.sign;
    }
    const cxd pivot = f.a(k, k);
    if (std::abs(pivot) <= tiny) {
      f.singular = true;
      continue;
    }
    for (int i = k + 1; i < n; ++i) {
      const cxd m = f.a(i, k) / pivot;
      f.a(i, k) = m;
      for (int j = k + 1; j < n; ++j) f.a(i, j) -= m * f.a(k, j);
    }
  }
  return f;
}

CxMat lu_solve(const Lu& f, CxMat b) {
  if (f.singular) throw Error("solve: singular matrix");
  const int n = f.a.rows();
  if (b.rows() != n) throw ValidationError("solve: shape mismatch");
  const int m = b.cols();
  for (int k = 0; k < n; ++k)
    if (f.piv[k] != k)
      for (int j = 0; j < m; ++j) std::swap(b(k, j), b(f.piv[k], j));
  for (int k = 0; k < n; ++k)
    for (int i = k + 1; i < n; ++i)
      for (int j = 0; j < m; ++j) b(i, j) -= f.a(i, k) * b(k, j);
  for (int k = n - 1; k >= 0; --k) {
    for (int j = 0; j < m; ++j) b(k, j) /= f.a(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < m; ++j) b(i, j) -= f.a(i, k) * b(k, j);
  }
  return b;
}

double norm_1(const CxMat& a) {
  double best = 0.0;
  for (int j = 0; j < a.cols(); ++j) {
    double s = 0.0;
    for (int i = 0; i < a.rows(); ++i) s += std::abs(a(i, j));
    best = std::max(best, s);
  }
  return best;
}

}  // namespace

CxMat CxMat::identity(int n) {
  CxMat m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

CxMat CxMat::diag(const std::vector<cxd>& d) {
  CxMat m(int(d.size()), int(d.size()));
  for (size_t i = 0; i < d.size(); ++i) m(int(i), int(i)) = d[i];
  return m;
}

CxMat CxMat::diag(const std::vector<double>& d) {
  CxMat m(int(d.size()), int(d.size()));
  for (size_t i = 0; i < d.size(); ++i) m(int(i), int(i)) = d[i];
  return m;
}

CxMat& CxMat::operator+=(const CxMat& o) {
  require_same_shape(*this, o);
  for (size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
  return *this;
}

CxMat& CxMat::operator-=(const CxMat& o) {
  require_same_shape(*this, o);
  for (size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
  return *this;
}

CxMat& CxMat::operator*=(cxd s) {
  for (cxd& x : v_) x *= s;
  return *this;
}

CxMat CxMat::transpose() const {
  CxMat t(c_, r_);
  for (int i = 0; i < r_; ++i)
    for (int j = 0; j < c_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

double CxMat::frobenius() const {
  double s = 0.0;
  for (const cxd& x : v_) s += std::norm(x);
  return std::sqrt(s);
}

double CxMat::max_abs() const {
  double s = 0.0;
  for (const cxd& x : v_) s = std::max(s, std::abs(x));
  return s;
}

double CxMat::max_imag_abs() const {
  double s = 0.0;
  for (const cxd& x : v_) s = std::max(s, std::fabs(x.imag()));
  return s;
}

CxMat operator+(CxMat a, const CxMat& b) { return a += b; }
CxMat operator-(CxMat a, const CxMat& b) { return a -= b; }
CxMat operator*(CxMat a, cxd s) { return a *= s; }
CxMat operator*(cxd s, CxMat a) { return a *= s; }

CxMat operator*(const CxMat& a, const CxMat& b) {
  if (a.cols() != b.rows()) throw ValidationError("matrix product shape mismatch");
  CxMat c(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int k = 0; k < a.cols(); ++k) {
      const cxd aik = a(i, k);
      if (aik == cxd{}) continue;
      for (int j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

std::vector<cxd> operator*(const CxMat& a, const std::vector<cxd>& x) {
  if (a.cols() != int(x.size()))
    throw ValidationError("matrix-vector shape mismatch");
  std::vector<cxd> y(a.rows());
  for (int i = 0; i < a.rows(); ++i) {
    cxd s{};
    for (int j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

CxMat to_cxmat(const std::vector<double>& rowmajor, int rows, int cols) {
  if (int(rowmajor.size()) != rows * cols)
    throw ValidationError("to_cxmat: data size mismatch");
  CxMat m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rowmajor[size_t(i) * cols + j];
  return m;
}

std::vector<double> real_part(const CxMat& a) {
  std::vector<double> out(size_t(a.rows()) * a.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      out[size_t(i) * a.cols() + j] = a(i, j).real();
  return out;
}

cxd det(const CxMat& a) {
  const Lu f = lu_factor(a);
  if (f.singular) return 0.0;
  cxd d = double(f.sign);
  for (int i = 0; i < a.rows(); ++i) d *= f.a(i, i);
  return d;
}

CxMat solve(const CxMat& a, CxMat b) { return lu_solve(lu_factor(a), std::move(b)); }

CxMat inverse(const CxMat& a) {
  return lu_solve(lu_factor(a), CxMat::identity(a.rows()));
}

double cond_frobenius(const CxMat& a) {
  try {
    return a.frobenius() * inverse(a).frobenius();
  } catch (const Error&) {
    return std::numeric_limits<double>::infinity();
  }
}

CxMat expm(const CxMat& a) {
  if (a.rows() != a.cols()) throw ValidationError("expm requires a square matrix");
  const int n = a.rows();
  // Degree-13 Pade coefficients.
  static const double b[14] = {64764752532480000.0,
                               32382376266240000.0,
                               7771770303897600.0,
                               1187353796428800.0,
                               129060195264000.0,
                               10559470521600.0,
                               670442572800.0,
                               33522128640.0,
                               1323241920.0,
                               40840800.0,
                               960960.0,
                               16380.0,
                               182.0,
                               1.0};
  const double theta13 = 5.371920351148152;
  const double nrm = norm_1(a);
  int s = 0;
  if (nrm > theta13) {
    s = int(std::ceil(std::log2(nrm / theta13)));
    if (s < 0) s = 0;
  }
  CxMat x = a * cxd(std::ldexp(1.0, -s));
  const CxMat I = CxMat::identity(n);
  const CxMat x2 = x * x;
  const CxMat x4 = x2 * x2;
  const CxMat x6 = x4 * x2;
  CxMat u = x * (x6 * (x6 * cxd(b[13]) + x4 * cxd(b[11]) + x2 * cxd(b[9])) +
                 x6 * cxd(b[7]) + x4 * cxd(b[5]) + x2 * cxd(b[3]) + I * cxd(b[1]));
  CxMat v = x6 * (x6 * cxd(b[12]) + x4 * cxd(b[10]) + x2 * cxd(b[8])) +
            x6 * cxd(b[6]) + x4 * cxd(b[4]) + x2 * cxd(b[2]) + I * cxd(b[0]);
  CxMat r = solve(v - u, v + u);
  for (int k = 0; k < s; ++k) r = r * r;
  return r;
}

}  // namespace mapwh
