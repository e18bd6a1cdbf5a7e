// Random pair construction shared by the unit and acceptance suites: one-phase
// pairs with decreasing mixed-exponential densities, and two-phase pairs whose
// downward transition atoms are solved so the drift-atom balance holds.
#pragma once

#include <random>
#include <utility>
#include <vector>

#include "mapwh/friendship.hpp"
#include "mapwh/map_spec.hpp"
#include "oracle_quadrature.hpp"

namespace pair_samplers {

using namespace mapwh;

struct Pair {
  MapSubordinatorSpec plus;
  MapSubordinatorSpec minus;
  std::vector<double> pi;
};

inline double uni(std::mt19937& g, double a, double b) {
  return std::uniform_real_distribution<double>(a, b)(g);
}

// Mixture of pure exponentials: always a decreasing density on (0, inf).
inline std::vector<ExpPolyTerm> exp_mixture_terms(std::mt19937& g,
                                                  int max_terms = 3) {
  const int k = std::uniform_int_distribution<int>(1, max_terms)(g);
  std::vector<ExpPolyTerm> ts;
  for (int t = 0; t < k; ++t)
    ts.push_back({uni(g, 0.1, 1.2), 0, uni(g, 0.4, 3.0)});
  return ts;
}

// Mixture of higher-order gamma shapes: the density vanishes at the origin,
// which keeps the transfer-candidate atom nonpositive and hence the bonded
// switching atom nonnegative.
inline std::vector<ExpPolyTerm> erlang_mixture_terms(std::mt19937& g,
                                                     int max_terms = 2) {
  const int k = std::uniform_int_distribution<int>(1, max_terms)(g);
  std::vector<ExpPolyTerm> ts;
  for (int t = 0; t < k; ++t)
    ts.push_back({uni(g, 0.1, 1.2), std::uniform_int_distribution<int>(1, 2)(g),
                  uni(g, 0.4, 3.0)});
  return ts;
}

// Rescales the term weights so the total mass hits `target`.
inline std::vector<ExpPolyTerm> terms_with_mass(std::vector<ExpPolyTerm> ts,
                                                double target) {
  double cur = 0.0;
  for (const ExpPolyTerm& t : ts)
    cur += t.w * factorial(t.p) / std::pow(t.beta, t.p + 1);
  for (ExpPolyTerm& t : ts) t.w *= target / cur;
  return ts;
}

inline Pair one_phase_pair(std::mt19937& g) {
  const auto make = [&g] {
    MapSpec s;
    s.n = 1;
    s.kind = SpecKind::subordinator;
    s.pi = {1.0};
    s.Q = {0.0};
    PhaseComponent c;
    c.center = uni(g, 0.05, 2.0);
    c.kill = uni(g, 0.0, 1.0) < 0.5 ? 0.0 : uni(g, 0.05, 0.6);
    c.jumps_pos = make_measure(0.0, exp_mixture_terms(g));
    s.components = {c};
    s.trans = default_trans(1);
    return MapSubordinatorSpec(std::move(s));
  };
  return {make(), make(), {1.0}};
}

// Two-phase pair with everything drawn at random except the downward
// transition atoms, which are solved from the drift-atom balance. When a
// solved atom would exceed the unit mass budget, the upward atom is shrunk
// first and the solve repeated.
inline Pair two_phase_balanced(std::mt19937& g) {
  const double p0 = uni(g, 0.3, 0.7);
  const std::vector<double> pi = {p0, 1.0 - p0};
  const double qp01 = uni(g, 0.5, 1.5), qp10 = uni(g, 0.5, 1.5);
  const double qm01 = uni(g, 0.5, 1.5), qm10 = uni(g, 0.5, 1.5);
  const std::vector<double> dp = {uni(g, 0.5, 1.0), uni(g, 0.5, 1.0)};
  const std::vector<double> dm = {uni(g, 0.5, 1.0), uni(g, 0.5, 1.0)};
  double ap01 = uni(g, 0.05, 0.25), ap10 = uni(g, 0.05, 0.25);
  double am10 = pi[0] * qp01 * dm[0] * ap01 / (pi[1] * qm10 * dp[1]);
  if (am10 > 0.9) {
    ap01 *= 0.9 / am10;
    am10 = 0.9;
  }
  double am01 = pi[1] * qp10 * dm[1] * ap10 / (pi[0] * qm01 * dp[0]);
  if (am01 > 0.9) {
    ap10 *= 0.9 / am01;
    am01 = 0.9;
  }

  const auto build = [&](double q01, double q10, const std::vector<double>& d,
                         double a01, double a10) {
    MapSpec s;
    s.n = 2;
    s.kind = SpecKind::subordinator;
    s.pi = pi;
    s.Q = {-q01, q01, q10, -q10};
    for (int i = 0; i < 2; ++i) {
      PhaseComponent c;
      c.center = d[size_t(i)];
      c.jumps_pos = make_measure(0.0, exp_mixture_terms(g));
      s.components.push_back(c);
    }
    s.trans = default_trans(2);
    s.trans[1] = make_two_sided(
        a01, terms_with_mass(erlang_mixture_terms(g), 1.0 - a01), {});
    s.trans[2] = make_two_sided(
        a10, terms_with_mass(erlang_mixture_terms(g), 1.0 - a10), {});
    return MapSubordinatorSpec(std::move(s));
  };
  MapSubordinatorSpec plus = build(qp01, qp10, dp, ap01, ap10);
  MapSubordinatorSpec minus = build(qm01, qm10, dm, am01, am10);
  return {std::move(plus), std::move(minus), pi};
}

// Draws two-phase balanced pairs until the full compatibility block passes.
inline Pair compatible_two_phase(std::mt19937& g, int max_tries = 200) {
  for (int t = 0; t < max_tries; ++t) {
    Pair p = two_phase_balanced(g);
    if (check_compatibility(p.plus, p.minus, p.pi).all_pass()) return p;
  }
  throw Error("no compatible pair found within the try budget");
}

// Bridge into the quadrature oracle's plain-struct description.
inline oracle::SubChar to_subchar(const MapSubordinatorSpec& s) {
  oracle::SubChar c;
  c.n = s.n();
  for (int i = 0; i < c.n; ++i) {
    c.d.push_back(s.d(i));
    c.kill.push_back(s.kill(i));
    oracle::Measure m;
    m.atom0 = 0.0;
    for (const ExpPolyTerm& t : s.Pi(i).terms)
      m.terms.push_back({t.w, t.p, t.beta});
    c.diag.push_back(std::move(m));
  }
  c.Q.resize(size_t(c.n) * c.n);
  c.off.resize(size_t(c.n) * c.n);
  for (int i = 0; i < c.n; ++i)
    for (int j = 0; j < c.n; ++j) {
      c.Q[size_t(i) * c.n + j] = s.q(i, j);
      if (i == j) continue;
      const ExpPolyMeasure f = s.F(i, j);
      oracle::Measure m;
      m.atom0 = f.atom0;
      for (const ExpPolyTerm& t : f.terms)
        m.terms.push_back({t.w, t.p, t.beta});
      c.off[size_t(i) * c.n + j] = std::move(m);
    }
  return c;
}

}  // namespace pair_samplers
