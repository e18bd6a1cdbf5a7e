#pragma once
// Matrix characteristic/Laplace exponents of a Markov-additive process and
// structural diagnostics on them.
//
// The matrix exponent is
//   Psi(theta)_{ii} = psi_i(theta) + Q_{ii} - kill_i
//   Psi(theta)_{ij} = Q_{ij} * cf(F_{ij}, theta),     i != j,
// with psi_i the phase's own (unkilled) scalar exponent in the convention of
// the spec kind: linear drift for subordinators, cutoff-compensated centering
// for the general form. For subordinator kind the Laplace version is
//   Phi(z) = -Psi(iz),
// computed directly from the closed-form Laplace transforms.

#include <complex>
#include <string>
#include <vector>

#include "mapwh/cxmat.hpp"
#include "mapwh/map_spec.hpp"

namespace mapwh {

// Scalar exponent of phase i's own Levy component (no killing, no Q).
cxd psi_phase(const MapSpec& s, int i, double theta);

CxMat psi_matrix(const MapSpec& s, double theta);

// Subordinator kind only; defined for Re z >= 0 (and real z > -beta_min).
CxMat phi_matrix(const MapSpec& s, cxd z);

// kill_i = -(Psi(0) 1)_i and Q = Psi(0) + diag(kill), the structural inverse
// of the assembly above.
std::vector<double> recover_kill(const MapSpec& s);
std::vector<double> recover_Q(const MapSpec& s);

// Expected drift per unit time in each phase (subordinator kind):
//   m_i = d_i + mean(Pi_i) + sum_{j != i} Q_{ij} mean(F_{ij}).
std::vector<double> mean_vector(const MapSpec& s);

// Structural diagnostics on the exponent evaluated from a spec:
//   zero_structure   Psi(0) is real with nonnegative off-diagonal entries and
//                    nonpositive row sums (row sums = -kill)
//   conj_symmetry    Psi(-theta) equals the conjugate of Psi(theta) on a
//                    probe grid
//   substochastic    exp(t Psi(0)) has nonnegative entries with row sums
//                    <= 1 for t in {0.1, 1, 10}
struct ExponentDiagnostics {
  bool zero_structure = false;
  bool conj_symmetry = false;
  bool substochastic = false;
  std::vector<std::string> problems;
  bool ok() const { return zero_structure && conj_symmetry && substochastic; }
};

ExponentDiagnostics validate_exponent(const MapSpec& s);

}  // namespace mapwh
