#include "mapwh/wh_verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "json.hpp"
#include "mapwh/errors.hpp"
#include "mapwh/exponent.hpp"
#include "mapwh/friendship.hpp"

namespace mapwh {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

constexpr double kCondWarn = 1e12;

}  // namespace

// -------------------------------------------------------------- grids ------

std::vector<double> uniform_grid(double lo, double hi, int count) {
  if (count < 2 || !(hi > lo))
    throw ValidationError("grid needs at least two points and lo < hi");
  std::vector<double> g(static_cast<size_t>(count));
  for (int k = 0; k < count; ++k)
    g[size_t(k)] = lo + (hi - lo) * double(k) / double(count - 1);
  return g;
}

std::vector<double> refined_grid(double half_width, int uniform_count,
                                 int log_per_side, double min_abs) {
  if (!(half_width > 0.0) || !(min_abs > 0.0) || !(min_abs < half_width))
    throw ValidationError("refined grid needs 0 < min_abs < half_width");
  if (uniform_count < 2 || log_per_side < 2)
    throw ValidationError("refined grid needs at least two points per part");
  std::vector<double> g;
  const double lratio = std::log(half_width / min_abs);
  for (int k = 0; k < log_per_side; ++k) {
    const double mag =
        min_abs * std::exp(lratio * double(k) / double(log_per_side - 1));
    g.push_back(mag);
    g.push_back(-mag);
  }
  for (double t : uniform_grid(-half_width, half_width, uniform_count))
    if (t != 0.0) g.push_back(t);
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

// ---------------------------------------------------- residual scan --------

WhScan wh_residual(const MapSpec& bond, const MapSubordinatorSpec& plus,
                   const MapSubordinatorSpec& minus,
                   const std::vector<double>& pi,
                   const std::vector<double>& theta_grid) {
  const int n = bond.n;
  if (plus.n() != n || minus.n() != n || int(pi.size()) != n)
    throw ValidationError("residual scan: phase counts must agree");
  for (double p : pi)
    if (!(p > 0.0))
      throw ValidationError("residual scan: pi must be strictly positive");
  if (theta_grid.empty())
    throw ValidationError("residual scan: the grid is empty");

  WhScan scan;
  scan.min_det_abs = std::numeric_limits<double>::infinity();
  scan.samples.reserve(theta_grid.size());
  for (double theta : theta_grid) {
    const CxMat own = psi_matrix(bond, theta);
    const CxMat diff = own - wh_product(plus, minus, pi, theta);
    WhSample s;
    s.theta = theta;
    s.residual_frobenius = diff.frobenius();
    s.det_abs = std::abs(det(own));
    if (s.residual_frobenius > scan.max_residual) {
      scan.max_residual = s.residual_frobenius;
      scan.theta_at_max = theta;
    }
    if (theta != 0.0) scan.min_det_abs = std::min(scan.min_det_abs, s.det_abs);
    scan.samples.push_back(s);
  }
  return scan;
}

std::string to_csv(const WhScan& scan) {
  std::string out = "theta,residual_frobenius,det_abs\n";
  for (const WhSample& s : scan.samples)
    out += fmt17(s.theta) + "," + fmt17(s.residual_frobenius) + "," +
           fmt17(s.det_abs) + "\n";
  return out;
}

// ---------------------------------------------------- invertibility --------

InvertibilityScan invertibility_scan(const MapSpec& s,
                                     const std::vector<double>& theta_grid) {
  if (theta_grid.empty())
    throw ValidationError("invertibility scan: the grid is empty");
  InvertibilityScan out;
  out.min_det_abs = std::numeric_limits<double>::infinity();
  out.samples.reserve(theta_grid.size());
  for (double theta : theta_grid) {
    if (theta == 0.0)
      throw ValidationError(
          "invertibility scan: the grid must exclude theta = 0 (the "
          "zero-exponent of an unkilled process is singular)");
    const CxMat m = psi_matrix(s, theta);
    WhSample smp;
    smp.theta = theta;
    smp.det_abs = std::abs(det(m));
    if (cond_frobenius(m) > kCondWarn) ++out.condition_warnings;
    if (smp.det_abs < out.min_det_abs) {
      out.min_det_abs = smp.det_abs;
      out.theta_at_min = theta;
    }
    out.samples.push_back(smp);
  }
  return out;
}

double log_log_slope(const std::vector<double>& x,
                     const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw ValidationError("slope fit needs two matched samples at least");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (size_t k = 0; k < x.size(); ++k) {
    if (!(std::fabs(x[k]) > 0.0) || !(std::fabs(y[k]) > 0.0))
      throw ValidationError("slope fit needs nonzero samples");
    const double lx = std::log(std::fabs(x[k]));
    const double ly = std::log(std::fabs(y[k]));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double nn = double(x.size());
  const double den = nn * sxx - sx * sx;
  if (!(std::fabs(den) > 0.0))
    throw ValidationError("slope fit is degenerate (all abscissae equal)");
  return (nn * sxy - sx * sy) / den;
}

// ------------------------------------------------- class structure ---------

namespace {

struct SideClass {
  bool killed = false;
  bool irreducible = false;
  bool nontrivial = false;
  bool all_drifts = false;   // every phase has a positive linear drift
  bool all_ac = false;       // no switching atoms in any off-diagonal law
  bool a1 = false;           // per-phase drift or absolutely continuous row
};

SideClass classify_side(const MapSubordinatorSpec& h, const char* label,
                        std::vector<std::string>* reasons) {
  const int n = h.n();
  SideClass c;
  c.irreducible = irreducible(h.spec().Q, n);
  c.nontrivial = true;
  c.all_drifts = true;
  c.all_ac = true;
  c.a1 = true;
  for (int i = 0; i < n; ++i) {
    if (h.kill(i) > 0.0) c.killed = true;
    double mass = 0.0;
    for (const ExpPolyTerm& t : h.Pi(i).terms) mass += std::fabs(t.w);
    if (!(h.d(i) > 0.0) && !(mass > 0.0)) {
      c.nontrivial = false;
      reasons->push_back(std::string(label) + ": phase " + std::to_string(i) +
                         " has neither drift nor jumps (degenerate)");
    }
    bool row_ac = h.Pi(i).atom0 == 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      if (h.F_atom(i, j) != 0.0) row_ac = false;
    }
    if (!row_ac) c.all_ac = false;
    if (h.d(i) > 0.0) continue;  // transform diverges along Re z >= 0
    c.all_drifts = false;
    // driftless phases are compound Poisson in this measure class (all jump
    // densities have finite mass), so membership falls on the switch laws
    if (!row_ac) {
      c.a1 = false;
      reasons->push_back(std::string(label) + ": phase " + std::to_string(i) +
                         " is driftless compound Poisson with a switching "
                         "atom, so its row is not absolutely continuous");
    }
  }
  reasons->push_back(std::string(label) +
                     ": mean drift is finite (every measure in this class has "
                     "exponentially decaying tails)");
  if (c.all_drifts)
    reasons->push_back(std::string(label) +
                       ": all phase drifts are positive, so every phase "
                       "transform diverges along Re z >= 0");
  reasons->push_back(std::string(label) + ": modulator is " +
                     (c.irreducible ? "strongly connected"
                                    : "not strongly connected"));
  if (c.killed)
    reasons->push_back(std::string(label) +
                       ": at least one phase carries a killing rate");
  return c;
}

}  // namespace

UniquenessClass classify_uniqueness(const MapSubordinatorSpec& plus,
                                    const MapSubordinatorSpec& minus) {
  UniquenessClass out;
  const SideClass p = classify_side(plus, "plus", &out.reasons);
  const SideClass m = classify_side(minus, "minus", &out.reasons);
  out.killed = p.killed || m.killed;
  out.irreducible = p.irreducible && m.irreducible;
  out.A0 = out.irreducible && p.nontrivial && m.nontrivial;
  out.A1 = p.a1 && m.a1;
  out.A_inf = p.all_drifts && m.all_drifts;
  out.A_ll = p.all_ac && m.all_ac;
  return out;
}

std::string to_json_text(const UniquenessClass& c, int indent) {
  nlohmann::json j;
  j["A0"] = c.A0;
  j["A1"] = c.A1;
  j["A_inf"] = c.A_inf;
  j["A_ll"] = c.A_ll;
  j["killed"] = c.killed;
  j["irreducible"] = c.irreducible;
  j["reasons"] = c.reasons;
  return indent < 0 ? j.dump() : j.dump(indent);
}

// ------------------------------------------------- renewal probe -----------

RenewalProbe markov_renewal_probe(const MapSubordinatorSpec& s,
                                  const std::vector<double>& z_seq) {
  const int n = s.n();
  if (z_seq.size() < 2)
    throw ValidationError("renewal probe: need at least two probe points");
  for (double z : z_seq)
    if (!(z > 0.0))
      throw ValidationError("renewal probe: probe points must be positive");
  for (int i = 0; i < n; ++i)
    if (s.kill(i) > 0.0)
      throw ValidationError("renewal probe: phase " + std::to_string(i) +
                            " is killed; the limit needs an unkilled process");
  if (!irreducible(s.spec().Q, n))
    throw ValidationError(
        "renewal probe: the modulator must be irreducible for the limit to "
        "have constant rows");

  const std::vector<double> pis = stationary_law(s.spec().Q, n);
  const std::vector<double> means = mean_vector(s.spec());
  double mean_drift = 0.0;
  for (int i = 0; i < n; ++i) mean_drift += pis[size_t(i)] * means[size_t(i)];
  if (!(mean_drift > 0.0))
    throw ValidationError("renewal probe: the stationary mean drift vanishes");

  RenewalProbe probe;
  probe.z_used = z_seq;
  probe.target.resize(size_t(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      probe.target[size_t(i) * n + j] = pis[size_t(j)] / mean_drift;

  // evaluate z Phi(z)^{-1} along the sequence and kill the linear-in-z error
  // with one Richardson step on the final (smallest) pair
  std::vector<std::vector<double>> vals;
  for (double z : z_seq) {
    CxMat inv;
    try {
      inv = inverse(phi_matrix(s.spec(), cxd(z, 0.0)));
    } catch (const Error&) {
      throw Error("renewal probe: Phi(z) is singular at z = " + fmt(z));
    }
    vals.push_back(real_part(inv * cxd(z, 0.0)));
  }
  const size_t last = z_seq.size() - 1;
  const double ratio = z_seq[last - 1] / z_seq[last];
  if (!(ratio > 1.0))
    throw ValidationError("renewal probe: probe points must decrease");
  probe.limit.resize(size_t(n) * n);
  for (size_t k = 0; k < probe.limit.size(); ++k)
    probe.limit[k] =
        (ratio * vals[last][k] - vals[last - 1][k]) / (ratio - 1.0);

  for (size_t k = 0; k < probe.limit.size(); ++k)
    probe.max_abs_error = std::max(probe.max_abs_error,
                                   std::fabs(probe.limit[k] - probe.target[k]));
  return probe;
}

}  // namespace mapwh
