#pragma once
// Numerical verification around the factorisation identity
//   Psi_bond(theta) = -diag(pi)^{-1} Psi_minus(-theta)^T diag(pi) Psi_plus(theta):
// residual scans over frequency grids, invertibility of the matrix exponent
// away from the origin, structural classification for the uniqueness
// preconditions on factor pairs, and a renewal-limit probe of the inverted
// Laplace exponent.

#include <string>
#include <vector>

#include "mapwh/cxmat.hpp"
#include "mapwh/map_spec.hpp"

namespace mapwh {

// -------------------------------------------------------------- grids ------

// `count` equally spaced points from lo to hi inclusive (count >= 2).
std::vector<double> uniform_grid(double lo, double hi, int count);

// Symmetric grid for origin studies: `log_per_side` log-spaced magnitudes
// from min_abs up to half_width on each side of zero (zero itself excluded),
// merged with a `uniform_count`-point uniform grid on [-half_width,
// half_width] with the origin removed. Sorted ascending.
std::vector<double> refined_grid(double half_width, int uniform_count,
                                 int log_per_side, double min_abs);

// ---------------------------------------------------- residual scan --------

struct WhSample {
  double theta = 0.0;
  double residual_frobenius = 0.0;  // ||Psi_bond(theta) - product(theta)||_F
  double det_abs = 0.0;             // |det Psi_bond(theta)|
};

struct WhScan {
  double max_residual = 0.0;        // over the whole grid
  double min_det_abs = 0.0;         // over grid points with theta != 0
  double theta_at_max = 0.0;
  std::vector<WhSample> samples;    // one per grid point, grid order
};

// Evaluates the factorisation residual of a candidate bond against the
// product of the two one-sided exponents on every grid point. The reduction
// is order-independent, so the grid may be evaluated in any order.
WhScan wh_residual(const MapSpec& bond, const MapSubordinatorSpec& plus,
                   const MapSubordinatorSpec& minus,
                   const std::vector<double>& pi,
                   const std::vector<double>& theta_grid);

// One CSV row per sample: `theta, residual_frobenius, det_abs` with a header
// line, full round-trip precision.
std::string to_csv(const WhScan& scan);

// ---------------------------------------------------- invertibility --------

struct InvertibilityScan {
  double min_det_abs = 0.0;
  double theta_at_min = 0.0;
  int condition_warnings = 0;       // grid points with cond_F > 1e12
  std::vector<WhSample> samples;    // residual_frobenius stays 0 here
};

// min |det Psi(theta)| over the grid; grid points at theta = 0 are rejected
// (the unkilled exponent is singular there by construction).
InvertibilityScan invertibility_scan(const MapSpec& s,
                                     const std::vector<double>& theta_grid);

// Least-squares slope of log|y| against log|x|; used to confirm the
// single-zero behaviour |det Psi(theta)| ~ |theta| near the origin.
double log_log_slope(const std::vector<double>& x,
                     const std::vector<double>& y);

// ------------------------------------------------- class structure ---------

// Structural membership flags for a factor pair of subordinator exponents.
// All "both sides" flags require the property on the plus and the minus
// exponent simultaneously.
//   A0          finite mean, no degenerate phase component, irreducible
//               modulators (both sides)
//   A1          every phase either has a transform diverging along Re z >= 0
//               or is compound Poisson with absolutely continuous switch
//               laws (both sides)
//   A_inf       every phase transform diverges at infinity (both sides);
//               in this measure class that is exactly "all drifts positive"
//   A_ll        all jump and switch measures are absolutely continuous, i.e.
//               no switching atoms anywhere (both sides)
//   killed      some phase of either side carries a positive killing rate
//   irreducible both modulators are strongly connected
struct UniquenessClass {
  bool A0 = false;
  bool A1 = false;
  bool A_inf = false;
  bool A_ll = false;
  bool killed = false;
  bool irreducible = false;
  std::vector<std::string> reasons;  // one line per determination
};

UniquenessClass classify_uniqueness(const MapSubordinatorSpec& plus,
                                    const MapSubordinatorSpec& minus);

// JSON object with the six flags and the reason list.
std::string to_json_text(const UniquenessClass& c, int indent = 2);

// ------------------------------------------------- renewal probe -----------

struct RenewalProbe {
  std::vector<double> limit;    // n*n row-major extrapolation of z Phi(z)^{-1}
  std::vector<double> target;   // row-constant pi(j) / (pi^T mean)
  double max_abs_error = 0.0;   // entrywise |limit - target|
  std::vector<double> z_used;
};

// Evaluates z Phi(z)^{-1} along the probe sequence (default 1e-1 .. 1e-6,
// decades) and extrapolates the linear-in-z drift away to recover the limit
// matrix, whose rows must all equal the stationary phase law divided by the
// stationary mean drift. Requires an unkilled irreducible subordinator spec;
// throws Error if Phi(z) degenerates at a probe point.
RenewalProbe markov_renewal_probe(const MapSubordinatorSpec& s,
                                  const std::vector<double>& z_seq = {
                                      1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6});

}  // namespace mapwh
