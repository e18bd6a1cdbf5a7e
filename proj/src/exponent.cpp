#include "mapwh/exponent.hpp"

#include <cmath>
#include <sstream>

namespace mapwh {

namespace {

// Truncated first moment over [-1, 1] of the two jump measures together.
double trunc_moment(const PhaseComponent& c) {
  return mean_trunc(c.jumps_pos) + mean_trunc(c.jumps_neg);
}

double jump_mass(const PhaseComponent& c) {
  return mass(c.jumps_pos) + mass(c.jumps_neg);
}

cxd jump_cf(const PhaseComponent& c, double theta) {
  return cf(c.jumps_pos, theta) + cf(c.jumps_neg, theta);
}

}  // namespace

cxd psi_phase(const MapSpec& s, int i, double theta) {
  const PhaseComponent& c = s.components[i];
  const cxd itheta(0.0, theta);
  if (s.kind == SpecKind::subordinator)
    return itheta * c.center + jump_cf(c, theta) - jump_mass(c);
  return itheta * c.center - 0.5 * c.gauss * theta * theta +
         (jump_cf(c, theta) - jump_mass(c)) - itheta * trunc_moment(c);
}

CxMat psi_matrix(const MapSpec& s, double theta) {
  const int n = s.n;
  CxMat m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j)
        m(i, i) = psi_phase(s, i, theta) + s.q(i, i) - s.components[i].kill;
      else
        m(i, j) = s.q(i, j) * cf(s.F(i, j), theta);
    }
  }
  return m;
}

CxMat phi_matrix(const MapSpec& s, cxd z) {
  if (s.kind != SpecKind::subordinator)
    throw ValidationError("Laplace exponent needs the subordinator form");
  const int n = s.n;
  CxMat m(n, n);
  for (int i = 0; i < n; ++i) {
    const PhaseComponent& c = s.components[i];
    for (int j = 0; j < n; ++j) {
      if (i == j)
        m(i, i) = c.kill - s.q(i, i) + z * c.center + mass(c.jumps_pos) -
                  laplace(c.jumps_pos, z);
      else
        m(i, j) = -s.q(i, j) * laplace(s.F(i, j), z);
    }
  }
  return m;
}

std::vector<double> recover_kill(const MapSpec& s) {
  const CxMat z = psi_matrix(s, 0.0);
  std::vector<double> kill(s.n);
  for (int i = 0; i < s.n; ++i) {
    cxd row{};
    for (int j = 0; j < s.n; ++j) row += z(i, j);
    kill[i] = -row.real();
  }
  return kill;
}

std::vector<double> recover_Q(const MapSpec& s) {
  const CxMat z = psi_matrix(s, 0.0);
  const std::vector<double> kill = recover_kill(s);
  std::vector<double> q(size_t(s.n) * s.n);
  for (int i = 0; i < s.n; ++i)
    for (int j = 0; j < s.n; ++j)
      q[size_t(i) * s.n + j] = z(i, j).real() + (i == j ? kill[i] : 0.0);
  return q;
}

std::vector<double> mean_vector(const MapSpec& s) {
  if (s.kind != SpecKind::subordinator)
    throw ValidationError("mean vector needs the subordinator form");
  std::vector<double> m(s.n);
  for (int i = 0; i < s.n; ++i) {
    double v = s.components[i].center + mean(s.components[i].jumps_pos);
    for (int j = 0; j < s.n; ++j)
      if (j != i) v += s.q(i, j) * mean(s.F(i, j));
    m[i] = v;
  }
  return m;
}

ExponentDiagnostics validate_exponent(const MapSpec& s) {
  ExponentDiagnostics d;
  const int n = s.n;
  const CxMat z = psi_matrix(s, 0.0);

  d.zero_structure = true;
  if (z.max_imag_abs() > 1e-12 * std::max(1.0, z.max_abs())) {
    d.zero_structure = false;
    d.problems.push_back("Psi(0) is not real");
  }
  for (int i = 0; i < n; ++i) {
    cxd row{};
    for (int j = 0; j < n; ++j) {
      row += z(i, j);
      if (i != j && z(i, j).real() < -1e-12) {
        d.zero_structure = false;
        std::ostringstream os;
        os << "Psi(0) has a negative off-diagonal entry at (" << i << ", " << j
           << ")";
        d.problems.push_back(os.str());
      }
    }
    if (row.real() > 1e-10) {
      d.zero_structure = false;
      std::ostringstream os;
      os << "row " << i << " of Psi(0) sums to " << row.real() << " > 0";
      d.problems.push_back(os.str());
    }
  }

  d.conj_symmetry = true;
  for (double theta : {0.3, 1.0, 4.7, 19.0}) {
    const CxMat a = psi_matrix(s, theta);
    const CxMat b = psi_matrix(s, -theta);
    double err = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        err = std::max(err, std::abs(b(i, j) - std::conj(a(i, j))));
    if (err > 1e-10 * std::max(1.0, a.max_abs())) {
      d.conj_symmetry = false;
      std::ostringstream os;
      os << "Psi(-theta) != conj Psi(theta) at theta = " << theta;
      d.problems.push_back(os.str());
    }
  }

  d.substochastic = true;
  for (double t : {0.1, 1.0, 10.0}) {
    const CxMat p = expm(z * cxd(t));
    for (int i = 0; i < n; ++i) {
      double row = 0.0;
      for (int j = 0; j < n; ++j) {
        if (p(i, j).real() < -1e-12) {
          d.substochastic = false;
          std::ostringstream os;
          os << "exp(" << t << " Psi(0)) has a negative entry at (" << i << ", "
             << j << ")";
          d.problems.push_back(os.str());
        }
        row += p(i, j).real();
      }
      if (row > 1.0 + 1e-10) {
        d.substochastic = false;
        std::ostringstream os;
        os << "exp(" << t << " Psi(0)) row " << i << " sums to " << row
           << " > 1";
        d.problems.push_back(os.str());
      }
    }
  }
  return d;
}

}  // namespace mapwh
