#pragma once
// Exponential-polynomial measure algebra on a half-line.
//
// Working class: finite nonnegative measures
//     m(dx) = atom0 * delta_0(dx) + sum_k w_k x^{p_k} e^{-beta_k x} dx,  x > 0,
// together with their reflections onto the negative half-line. The class is
// closed under tails, convolutions, the cross-kernel integrals used by the
// ladder-factorisation formulas, and Laplace/Fourier transforms, so every
// quantity downstream stays in exact closed form.

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "mapwh/errors.hpp"

namespace mapwh {

// ----------------------------------------------------------------- types ---

// One density term w * x^p * exp(-beta x). Weights are nonnegative inside
// canonical measures and signed inside function objects.
struct ExpPolyTerm {
  double w = 0.0;
  int p = 0;
  double beta = 1.0;
};

enum class Side { pos, neg };

// Measure on a half-line: optional atom at the origin plus a term density.
// For side == neg the terms describe the density at -x, x > 0.
struct ExpPolyMeasure {
  double atom0 = 0.0;
  std::vector<ExpPolyTerm> terms;
  Side side = Side::pos;
};

// Signed function x -> c0 + sum_k w_k x^p_k e^{-beta_k x} on (0, inf).
struct ExpPolyFn {
  double c0 = 0.0;
  std::vector<ExpPolyTerm> terms;
};

// Piecewise function on R \ {0}: `pos` is evaluated at x for x > 0 and `neg`
// at |x| for x < 0. Used for signed densities, tails and distribution
// functions that live on both half-lines.
struct DensityFn {
  ExpPolyFn pos;
  ExpPolyFn neg;
};

// Probability-measure container for transitional jumps: atom at 0 plus term
// densities on each side (both sides in positive coordinates).
struct TwoSidedMeasure {
  double atom0 = 0.0;
  std::vector<ExpPolyTerm> pos;
  std::vector<ExpPolyTerm> neg;
};

// A point where a density or function violates nonnegativity.
struct Violation {
  std::string what;
  double x = 0.0;
  double value = 0.0;
};

// --------------------------------------------------------- canonical form ---

// Sort by (rate, power), merge duplicates (rates equal within 1e-12 relative),
// drop negligible weights. Deterministic regardless of input order.
std::vector<ExpPolyTerm> canon_terms(std::vector<ExpPolyTerm> ts);
ExpPolyMeasure canon(ExpPolyMeasure m);
ExpPolyFn canon(ExpPolyFn f);
TwoSidedMeasure canon(TwoSidedMeasure m);

// Tolerant comparison of canonical forms: rates within 1e-12 relative,
// weights within 1e-10 (absolute, relative for large weights).
bool terms_close(const std::vector<ExpPolyTerm>& a,
                 const std::vector<ExpPolyTerm>& b, double rate_rtol = 1e-12,
                 double w_tol = 1e-10);
bool measure_close(const ExpPolyMeasure& a, const ExpPolyMeasure& b,
                   double rate_rtol = 1e-12, double w_tol = 1e-10);
bool two_sided_close(const TwoSidedMeasure& a, const TwoSidedMeasure& b,
                     double rate_rtol = 1e-12, double w_tol = 1e-10);

// ------------------------------------------------------------- validation ---

// Nonnegativity of a signed exp-poly function on (0, inf). Exact when the
// term signs decide it; otherwise a sign scan over 1e4 log-spaced points on
// (1e-6, 1e3/min-rate) plus a dominant-term check at infinity. Returns the
// most negative witness if the function dips below -slack * max(1, scale).
std::optional<Violation> find_negative(const ExpPolyFn& f, double slack = 1e-12);

// Structural + sign validation; throws ValidationError on failure.
ExpPolyMeasure make_measure(double atom0, std::vector<ExpPolyTerm> terms,
                            Side side = Side::pos);
TwoSidedMeasure make_two_sided(double atom0, std::vector<ExpPolyTerm> pos,
                               std::vector<ExpPolyTerm> neg);
void validate_measure(const ExpPolyMeasure& m);
void validate_two_sided(const TwoSidedMeasure& m);

// ------------------------------------------------------------ evaluations ---

// Density sum w x^p e^{-beta x} at distance x >= 0 from the origin.
double eval_terms(const std::vector<ExpPolyTerm>& ts, double x);
double density(const ExpPolyMeasure& m, double x);
double eval(const ExpPolyFn& f, double x);
double eval(const DensityFn& f, double x);  // x != 0, sign picks the branch

// Open tail m((x, inf)) in half-line coordinates; the atom never counts.
double tail(const ExpPolyMeasure& m, double x);
ExpPolyFn tail_fn(const ExpPolyMeasure& m);
std::vector<ExpPolyTerm> tail_terms(const std::vector<ExpPolyTerm>& ts);

double mass(const ExpPolyMeasure& m);
double mass(const TwoSidedMeasure& m);

// First moment of the measure placed on its side of the origin (signed).
double mean(const ExpPolyMeasure& m);
double mean(const TwoSidedMeasure& m);

// Truncated first moment: integral of x over [-1, 1] (signed by side).
double mean_trunc(const ExpPolyMeasure& m);

// -------------------------------------------------------------- transforms ---

// Laplace transform in half-line coordinates: atom0 + sum w p!/(z+beta)^{p+1}.
std::complex<double> laplace(const ExpPolyMeasure& m, std::complex<double> z);
std::complex<double> laplace(const TwoSidedMeasure& m, std::complex<double> z);

// Characteristic function respecting the measure's side.
std::complex<double> cf(const ExpPolyMeasure& m, double theta);
std::complex<double> cf(const TwoSidedMeasure& m, double theta);

// ----------------------------------------------------------------- algebra ---

ExpPolyMeasure reflect(const ExpPolyMeasure& m);
TwoSidedMeasure reflect(const TwoSidedMeasure& m);

// Convolution of two same-side measures; atoms act as scaled shifts by 0.
// Equal rates (within 1e-12 relative) route through the merged higher-power
// branch to avoid cancellation in the partial-fraction path.
ExpPolyMeasure convolve(const ExpPolyMeasure& a, const ExpPolyMeasure& b);

// int_0^inf f(u) g(u + s) du as a function of s >= 0 for term lists; the
// rates of g survive. (f's optional constant is handled by callers.)
std::vector<ExpPolyTerm> cross_kernel_terms(const std::vector<ExpPolyTerm>& f,
                                            const std::vector<ExpPolyTerm>& g);

// Closed form of x -> integral over y in ((x v 0), inf) of tail_b(y-x) a(dy)
// for positive-side measures a, b; `pos` is the branch for x > 0, `neg` the
// branch for x < 0 evaluated at |x|. Atoms never contribute (open sets).
DensityFn cross_tail_fn(const ExpPolyMeasure& a, const ExpPolyMeasure& b);
double cross_convolve_tail(const ExpPolyMeasure& a, const ExpPolyMeasure& b,
                           double x);

// ------------------------------------------------------------ function ops ---

ExpPolyFn fn_add(const ExpPolyFn& a, const ExpPolyFn& b);
ExpPolyFn fn_scale(const ExpPolyFn& a, double c);
ExpPolyFn fn_derivative(const ExpPolyFn& a);  // derivative of the term sum
DensityFn fn_add(const DensityFn& a, const DensityFn& b);
DensityFn fn_scale(const DensityFn& a, double c);

// ----------------------------------------------------------------- helpers ---

double factorial(int n);
double binom(int n, int k);

// Lower incomplete gamma at integer order: int_0^y t^{n-1} e^{-t} dt.
double lower_gamma(int n, double y);

}  // namespace mapwh
