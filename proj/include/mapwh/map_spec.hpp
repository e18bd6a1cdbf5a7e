#pragma once
// Markov-additive process description: a phase chain with generator Q and
// stationary-reference law pi, plus per-phase Levy data and transitional jump
// distributions. Measures are exponential-polynomial throughout, so every
// transform used downstream has a closed form.

#include <string>
#include <vector>

#include "mapwh/expoly.hpp"

namespace mapwh {

// Which canonical form the per-phase parameters are written in.
//  subordinator: center is the nonnegative linear drift, no Gaussian part,
//                jumps only upward; characteristic exponent needs no cutoff.
//  general:      center is the compensated coefficient (cutoff at |x| <= 1),
//                Gaussian variance allowed, jumps on both sides.
enum class SpecKind { subordinator, general };

struct PhaseComponent {
  double kill = 0.0;    // killing rate while in this phase
  double center = 0.0;  // drift (subordinator) or centering coefficient
  double gauss = 0.0;   // Gaussian variance
  ExpPolyMeasure jumps_pos;
  ExpPolyMeasure jumps_neg;
};

struct MapSpec {
  int n = 0;
  SpecKind kind = SpecKind::subordinator;
  std::vector<double> pi;                 // length n, positive, sums to one
  std::vector<double> Q;                  // row-major n*n, conservative
  std::vector<PhaseComponent> components; // length n
  std::vector<TwoSidedMeasure> trans;     // row-major n*n, diagonal = delta_0

  double q(int i, int j) const { return Q[size_t(i) * n + j]; }
  const TwoSidedMeasure& F(int i, int j) const {
    return trans[size_t(i) * n + j];
  }
};

// Full structural and sign validation; throws ValidationError with the failing
// condition spelled out.
void validate_spec(const MapSpec& s);

// delta_0 transition matrix of size n*n (the default when none is given).
std::vector<TwoSidedMeasure> default_trans(int n);

// Rewrite in the general form (identity on general input): the center picks up
// the truncated first moment of the jumps since the two characteristic-
// function conventions differ by the cutoff compensation.
MapSpec general_form(MapSpec s);

// General form with canonicalized measures; two specs describe the same
// process iff their canonical forms agree.
MapSpec canonical_form(MapSpec s);
bool spec_equal(const MapSpec& a, const MapSpec& b, double tol = 1e-10);

// Time reversal with respect to pi. Requires pi to be invariant for Q
// (pi^T Q = 0 within 1e-10); the result is in general form with
//   Q_hat = diag(pi)^{-1} Q^T diag(pi),  center negated, jumps reflected,
//   F_hat_{ij} = reflect(F_{ji}),  killing and Gaussian parts kept.
MapSpec pi_dual(const MapSpec& s);

// Invariant law of the phase generator alone (pi^G Q = 0, normalized).
std::vector<double> stationary_law(const std::vector<double>& Q, int n);

// Strong connectivity of the phase chain through positive off-diagonal rates.
bool irreducible(const std::vector<double>& Q, int n);

// View over a validated subordinator-kind spec with the accessors the
// factorisation layer speaks in.
class MapSubordinatorSpec {
 public:
  explicit MapSubordinatorSpec(MapSpec s);

  const MapSpec& spec() const { return s_; }
  int n() const { return s_.n; }
  double pi(int i) const { return s_.pi[i]; }
  double d(int i) const { return s_.components[i].center; }
  double kill(int i) const { return s_.components[i].kill; }
  double q(int i, int j) const { return s_.q(i, j); }
  const ExpPolyMeasure& Pi(int i) const { return s_.components[i].jumps_pos; }
  // Transition law of the jump seen when the phase switches i -> j, as a
  // one-sided measure (atom at zero plus upward density).
  ExpPolyMeasure F(int i, int j) const;
  double F_atom(int i, int j) const { return s_.F(i, j).atom0; }

 private:
  MapSpec s_;
};

}  // namespace mapwh
