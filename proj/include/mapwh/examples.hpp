// Parametric generators for two explicit families of friendly pairs, plus the
// two-phase drift gate used as a golden test.
//
// Both families fix the phase count at two. The first drives a spectrally
// positive bonded process: the upward part carries completely monotone jump
// densities given by finite mixtures of exponentials (a discrete
// "representing measure" per phase) and the downward part is pure drift. The
// second produces Markov-modulated double exponential jump diffusions: both
// parts carry single-exponential phase densities, and the switching atoms are
// solved from a two-by-two linear system so that the drift-atom balance holds
// exactly.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mapwh/map_spec.hpp"

namespace mapwh {

// A generated upward/downward pair together with the reference phase law.
struct SubordinatorPair {
  MapSubordinatorSpec plus;
  MapSubordinatorSpec minus;
  std::vector<double> pi;
};

// One atom of a discrete representing measure: the corresponding jump density
// contribution is mass * exp(-rate * x).
struct RepresentingAtom {
  double mass = 0.0;
  double rate = 0.0;
};

// Parameters of the spectrally positive family. Validation enforces:
//  * Qp/Qm are conservative irreducible two-phase generators;
//  * the drift balance d+_i + integral of the upward tail equals
//    (pi_j/pi_i) q+_{ji} d-_j / q-_{ij} for both phases, which makes the
//    switching laws probability measures;
//  * every representing rate a satisfies
//    a (1 + (d-_i/q-_{ij}) a) > q-_{ji}/d-_j, a sufficient condition for the
//    bonded densities to stay nonnegative.
struct SpectrallyPositiveParams {
  std::vector<double> Qp;  // 2x2 row-major upward modulator generator
  std::vector<double> Qm;  // 2x2 row-major downward modulator generator
  std::vector<double> pi;  // reference phase law, 2 entries
  std::vector<std::vector<RepresentingAtom>> mu;  // representing measure per phase
  std::vector<double> dp;  // upward drifts
  std::vector<double> dm;  // downward drifts
};

// Parameters of the double exponential family: per-phase jump densities
// gamma_i exp(-beta_i x) on both sides. Validation enforces:
//  * conservative irreducible two-phase generators;
//  * the drift balance (pi_i/pi_j) q-_{ij} (d+_i + gamma+_i/beta+_i^2) =
//    q+_{ji} (d-_j + gamma-_j/beta-_j^2) for both ordered pairs;
//  * strict lower bounds on the upward drifts that keep the solved switching
//    atoms inside (0, 1);
//  * positivity of the bonded diagonal density coefficients for all four
//    side/pair combinations.
struct DoubleExpParams {
  std::vector<double> Qp;
  std::vector<double> Qm;
  std::vector<double> pi;
  std::vector<double> gp;  // upward density coefficients gamma+
  std::vector<double> gm;  // downward density coefficients gamma-
  std::vector<double> bp;  // upward density rates beta+
  std::vector<double> bm;  // downward density rates beta-
  std::vector<double> dp;  // upward drifts
  std::vector<double> dm;  // downward drifts
};

// Throw ValidationError naming the violated condition.
void validate_params(const SpectrallyPositiveParams& p);
void validate_params(const DoubleExpParams& p);

// Builds the upward/downward pair of the spectrally positive family: diagonal
// upward densities straight from the representing measures, switching laws
// with atom (pi_j/pi_i) q-_{ji} d+_j / (q+_{ij} d-_i) and density proportional
// to the destination-phase tail, and a pure-drift downward part.
SubordinatorPair gen_spectrally_positive(const SpectrallyPositiveParams& p);

// Builds the double exponential pair: single-exponential diagonal densities on
// both sides, switching atoms from the solved linear system, and switching
// densities proportional to the destination-phase tails.
SubordinatorPair gen_double_exp(const DoubleExpParams& p);

// The two-phase gate pair: upward part with unit drifts, standard exponential
// phase jumps and switching law (atom 1/2 + density e^{-x}/2) at unit switch
// rates; downward part pure drift `a`. Friendly for a = 2 and unfriendly for
// a = 1/2.
SubordinatorPair counterexample_drift(double a);

// Deterministic parameter samplers: draw everything except the drifts, solve
// the drift balance, then inflate the drifts multiplicatively until all
// strict inequalities hold with a ten percent margin.
SpectrallyPositiveParams sample_spectrally_positive_params(std::uint64_t seed);
DoubleExpParams sample_double_exp_params(std::uint64_t seed);

// JSON mirrors of the parameter structs (used by the command line tool).
std::string to_json_text(const SpectrallyPositiveParams& p, int indent = 2);
std::string to_json_text(const DoubleExpParams& p, int indent = 2);
SpectrallyPositiveParams spectrally_positive_params_from_json_text(
    const std::string& text);
DoubleExpParams double_exp_params_from_json_text(const std::string& text);

}  // namespace mapwh
