#include "mapwh/examples.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "json.hpp"
#include "mapwh/errors.hpp"
#include "mapwh/expoly.hpp"

namespace mapwh {

namespace {

constexpr double kBalanceTol = 1e-10;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

[[noreturn]] void reject(const std::string& family, const std::string& what) {
  throw ValidationError(family + ": " + what);
}

void check_two_phase_frame(const std::string& family,
                           const std::vector<double>& qp,
                           const std::vector<double>& qm,
                           const std::vector<double>& pi) {
  const auto check_gen = [&](const std::vector<double>& q, const char* name) {
    if (q.size() != 4) reject(family, std::string(name) + " must be 2x2");
    const double scale = std::max({1.0, std::fabs(q[0]), std::fabs(q[3])});
    for (int i = 0; i < 2; ++i)
      if (std::fabs(q[size_t(i) * 2] + q[size_t(i) * 2 + 1]) > 1e-10 * scale)
        reject(family, std::string(name) + " rows must sum to zero");
    if (!(q[1] > 0.0) || !(q[2] > 0.0))
      reject(family,
             std::string(name) + " must be irreducible (positive switch rates)");
  };
  check_gen(qp, "upward generator");
  check_gen(qm, "downward generator");
  if (pi.size() != 2 || !(pi[0] > 0.0) || !(pi[1] > 0.0) ||
      std::fabs(pi[0] + pi[1] - 1.0) > 1e-10)
    reject(family, "pi must be a positive two-phase law summing to one");
}

void check_positive_pair(const std::string& family,
                         const std::vector<double>& v, const char* name) {
  if (v.size() != 2 || !(v[0] > 0.0) || !(v[1] > 0.0))
    reject(family, std::string(name) + " must be a positive 2-vector");
}

// ------------------------------------------------------------- double exp ---

// Side-indexed access into the double exponential parameters: side 0 is the
// upward part, side 1 the downward part.
struct DeView {
  const std::vector<double>* Q[2];
  const std::vector<double>* g[2];
  const std::vector<double>* b[2];
  const std::vector<double>* d[2];
  const std::vector<double>* pi;

  explicit DeView(const DoubleExpParams& p)
      : Q{&p.Qp, &p.Qm}, g{&p.gp, &p.gm}, b{&p.bp, &p.bm}, d{&p.dp, &p.dm},
        pi(&p.pi) {}

  double q(int s, int i, int j) const { return (*Q[s])[size_t(i) * 2 + j]; }
  double gam(int s, int i) const { return (*g[s])[size_t(i)]; }
  double beta(int s, int i) const { return (*b[s])[size_t(i)]; }
  double drift(int s, int i) const { return (*d[s])[size_t(i)]; }
  double r(int i, int j) const { return (*pi)[size_t(j)] / (*pi)[size_t(i)]; }
};

// Balance residual for the ordered phase pair (i, j):
// (pi_i/pi_j) q-_{ij} (d+_i + gamma+_i/beta+_i^2)
//   - q+_{ji} (d-_j + gamma-_j/beta-_j^2).
double de_balance_gap(const DeView& v, int i, int j) {
  const double lhs = v.r(j, i) * v.q(1, i, j) *
                     (v.drift(0, i) + v.gam(0, i) / (v.beta(0, i) * v.beta(0, i)));
  const double rhs =
      v.q(0, j, i) *
      (v.drift(1, j) + v.gam(1, j) / (v.beta(1, j) * v.beta(1, j)));
  return lhs - rhs;
}

// Strict lower bound on the upward drift of phase i (j is the other phase).
double de_drift_bound(const DeView& v, int i, int j) {
  return v.r(i, j) * v.q(0, j, i) / v.q(1, i, j) * v.gam(1, j) /
         (v.beta(1, j) * v.beta(1, j));
}

// Bonded diagonal density coefficient for side s and ordered pair (i, j);
// must be positive. `den` receives the shared denominator, which must also be
// positive for the switching atoms to be well posed.
double de_density_coeff(const DeView& v, int s, int i, int j, double* den) {
  const int t = 1 - s;
  const double d2 = v.drift(s, i) * v.drift(t, j) * v.beta(s, i) *
                        v.beta(s, i) * v.beta(t, j) * v.beta(t, j) -
                    v.gam(t, j) * v.gam(s, i);
  if (den != nullptr) *den = d2;
  const double num = v.drift(s, i) * v.beta(t, j) * v.beta(t, j) -
                     v.r(i, j) * v.q(s, j, i) / v.q(t, i, j) * v.gam(t, j);
  return 1.0 + v.beta(s, i) * v.drift(t, i) / v.q(t, i, j) -
         v.q(t, j, i) * v.beta(s, i) * num / d2;
}

// Solved switching atom for side s and ordered pair (i, j).
double de_atom(const DeView& v, int s, int i, int j) {
  const int t = 1 - s;
  const double bj2 = v.beta(s, j) * v.beta(s, j);
  const double bi2 = v.beta(t, i) * v.beta(t, i);
  const double num =
      v.drift(s, j) * v.drift(t, i) -
      v.drift(s, j) * v.r(i, j) * v.q(t, j, i) / v.q(s, i, j) * v.gam(s, j) / bj2;
  const double den = v.drift(s, j) * v.drift(t, i) -
                     v.gam(s, j) * v.gam(t, i) / (bj2 * bi2);
  return num / den;
}

// Switching density weight for side s and pair (i, j): the density is
// weight * exp(-beta_j x) with the destination phase rate.
double de_weight(const DeView& v, int s, int i, int j) {
  const int t = 1 - s;
  return v.r(i, j) * v.q(t, j, i) / (v.q(s, i, j) * v.drift(t, i)) *
         de_atom(v, t, j, i) * v.gam(s, j) / v.beta(s, j);
}

MapSubordinatorSpec de_build_side(const DoubleExpParams& p, int s) {
  const DeView v(p);
  MapSpec spec;
  spec.n = 2;
  spec.kind = SpecKind::subordinator;
  spec.pi = p.pi;
  spec.Q = *v.Q[s];
  for (int i = 0; i < 2; ++i) {
    PhaseComponent c;
    c.center = v.drift(s, i);
    c.jumps_pos = make_measure(0.0, {{v.gam(s, i), 0, v.beta(s, i)}});
    spec.components.push_back(c);
  }
  spec.trans = default_trans(2);
  for (int i = 0; i < 2; ++i) {
    const int j = 1 - i;
    const double atom = de_atom(v, s, i, j);
    const double w = de_weight(v, s, i, j);
    spec.trans[size_t(i) * 2 + j] =
        make_two_sided(atom, {{w, 0, v.beta(s, j)}}, {});
  }
  return MapSubordinatorSpec(std::move(spec));
}

// ---------------------------------------------------- spectrally positive ---

double sp_tail_integral(const std::vector<RepresentingAtom>& mu) {
  double s = 0.0;
  for (const RepresentingAtom& a : mu) s += a.mass / (a.rate * a.rate);
  return s;
}

// Balance residual for phase i (j the other phase):
// d+_i + integral of the upward tail - (pi_j/pi_i) q+_{ji} d-_j / q-_{ij}.
double sp_balance_gap(const SpectrallyPositiveParams& p, int i, int j) {
  const double lhs = p.dp[size_t(i)] + sp_tail_integral(p.mu[size_t(i)]);
  const double rhs = p.pi[size_t(j)] / p.pi[size_t(i)] *
                     p.Qp[size_t(j) * 2 + i] * p.dm[size_t(j)] /
                     p.Qm[size_t(i) * 2 + j];
  return lhs - rhs;
}

}  // namespace

// ------------------------------------------------------------ validation ---

void validate_params(const SpectrallyPositiveParams& p) {
  const std::string fam = "spectrally positive family";
  check_two_phase_frame(fam, p.Qp, p.Qm, p.pi);
  check_positive_pair(fam, p.dp, "upward drifts");
  check_positive_pair(fam, p.dm, "downward drifts");
  if (p.mu.size() != 2) reject(fam, "need one representing measure per phase");
  for (int i = 0; i < 2; ++i) {
    if (p.mu[size_t(i)].empty())
      reject(fam, "representing measure of phase " + std::to_string(i) +
                      " must have at least one atom");
    for (const RepresentingAtom& a : p.mu[size_t(i)])
      if (!(a.mass > 0.0) || !(a.rate > 0.0))
        reject(fam, "representing atoms need positive mass and rate");
  }
  for (int i = 0; i < 2; ++i) {
    const int j = 1 - i;
    const double gap = sp_balance_gap(p, i, j);
    const double scale =
        std::max(1.0, p.dp[size_t(i)] + sp_tail_integral(p.mu[size_t(i)]));
    if (std::fabs(gap) > kBalanceTol * scale)
      reject(fam, "drift balance violated for phase " + std::to_string(i) +
                      " (gap " + fmt(gap) + ")");
    // sufficient condition for nonnegative bonded densities, applied at the
    // smallest representing rate (the bound is monotone in the rate)
    double amin = p.mu[size_t(i)].front().rate;
    for (const RepresentingAtom& a : p.mu[size_t(i)])
      amin = std::min(amin, a.rate);
    const double qmij = p.Qm[size_t(i) * 2 + j];
    const double qmji = p.Qm[size_t(j) * 2 + i];
    if (!(amin * (1.0 + p.dm[size_t(i)] / qmij * amin) >
          qmji / p.dm[size_t(j)]))
      reject(fam, "bonded density coefficient bound fails in phase " +
                      std::to_string(i) +
                      " (smallest representing rate too small)");
    const double atom = p.pi[size_t(j)] / p.pi[size_t(i)] *
                        qmji * p.dp[size_t(j)] /
                        (p.Qp[size_t(i) * 2 + j] * p.dm[size_t(i)]);
    if (!(atom > 0.0) || !(atom < 1.0))
      reject(fam, "switching atom out of (0, 1) for phase pair " +
                      std::to_string(i) + " -> " + std::to_string(j) + " (" +
                      fmt(atom) + ")");
  }
}

void validate_params(const DoubleExpParams& p) {
  const std::string fam = "double exponential family";
  check_two_phase_frame(fam, p.Qp, p.Qm, p.pi);
  check_positive_pair(fam, p.gp, "upward density coefficients");
  check_positive_pair(fam, p.gm, "downward density coefficients");
  check_positive_pair(fam, p.bp, "upward density rates");
  check_positive_pair(fam, p.bm, "downward density rates");
  check_positive_pair(fam, p.dp, "upward drifts");
  check_positive_pair(fam, p.dm, "downward drifts");
  const DeView v(p);
  for (int i = 0; i < 2; ++i) {
    const int j = 1 - i;
    const double gap = de_balance_gap(v, i, j);
    if (std::fabs(gap) > kBalanceTol * std::max(1.0, std::fabs(v.drift(0, i))))
      reject(fam, "drift balance violated for phase pair " + std::to_string(i) +
                      " -> " + std::to_string(j) + " (gap " + fmt(gap) + ")");
    if (!(v.drift(0, i) > de_drift_bound(v, i, j)))
      reject(fam, "upward drift lower bound fails in phase " +
                      std::to_string(i));
    for (int s = 0; s < 2; ++s) {
      double den = 0.0;
      const double coeff = de_density_coeff(v, s, i, j, &den);
      if (!(den > 0.0))
        reject(fam, "switching-atom denominator must be positive (side " +
                        std::to_string(s) + ", pair " + std::to_string(i) +
                        " -> " + std::to_string(j) + ")");
      if (!(coeff > 0.0))
        reject(fam, "bonded density coefficient must be positive (side " +
                        std::to_string(s) + ", pair " + std::to_string(i) +
                        " -> " + std::to_string(j) + ", value " + fmt(coeff) +
                        ")");
    }
  }
}

// ------------------------------------------------------------ generators ---

SubordinatorPair gen_spectrally_positive(const SpectrallyPositiveParams& p) {
  validate_params(p);
  MapSpec up;
  up.n = 2;
  up.kind = SpecKind::subordinator;
  up.pi = p.pi;
  up.Q = p.Qp;
  for (int i = 0; i < 2; ++i) {
    PhaseComponent c;
    c.center = p.dp[size_t(i)];
    std::vector<ExpPolyTerm> ts;
    for (const RepresentingAtom& a : p.mu[size_t(i)])
      ts.push_back({a.mass, 0, a.rate});
    c.jumps_pos = make_measure(0.0, std::move(ts));
    up.components.push_back(c);
  }
  up.trans = default_trans(2);
  for (int i = 0; i < 2; ++i) {
    const int j = 1 - i;
    const double ratio = p.pi[size_t(j)] / p.pi[size_t(i)];
    const double atom = ratio * p.Qm[size_t(j) * 2 + i] * p.dp[size_t(j)] /
                        (p.Qp[size_t(i) * 2 + j] * p.dm[size_t(i)]);
    const double coef = ratio * p.Qm[size_t(j) * 2 + i] /
                        (p.Qp[size_t(i) * 2 + j] * p.dm[size_t(i)]);
    std::vector<ExpPolyTerm> ts;
    for (const RepresentingAtom& a : p.mu[size_t(j)])
      ts.push_back({coef * a.mass / a.rate, 0, a.rate});
    up.trans[size_t(i) * 2 + j] = make_two_sided(atom, std::move(ts), {});
  }

  MapSpec down;
  down.n = 2;
  down.kind = SpecKind::subordinator;
  down.pi = p.pi;
  down.Q = p.Qm;
  for (int i = 0; i < 2; ++i) {
    PhaseComponent c;
    c.center = p.dm[size_t(i)];
    down.components.push_back(c);
  }
  down.trans = default_trans(2);

  return {MapSubordinatorSpec(std::move(up)),
          MapSubordinatorSpec(std::move(down)), p.pi};
}

SubordinatorPair gen_double_exp(const DoubleExpParams& p) {
  validate_params(p);
  const DeView v(p);
  for (int s = 0; s < 2; ++s)
    for (int i = 0; i < 2; ++i) {
      const int j = 1 - i;
      const double atom = de_atom(v, s, i, j);
      if (!(atom > 0.0) || !(atom < 1.0))
        reject("double exponential family",
               "switching atom out of (0, 1) (side " + std::to_string(s) +
                   ", pair " + std::to_string(i) + " -> " + std::to_string(j) +
                   ", value " + fmt(atom) + ")");
      const double mass = atom + de_weight(v, s, i, j) / v.beta(s, j);
      if (std::fabs(mass - 1.0) > 1e-10)
        reject("double exponential family",
               "switching law mass drifts from one (" + fmt(mass) + ")");
    }
  return {de_build_side(p, 0), de_build_side(p, 1), p.pi};
}

SubordinatorPair counterexample_drift(double a) {
  if (!(a > 0.0))
    throw ValidationError("drift gate: the downward drift must be positive");
  MapSpec up;
  up.n = 2;
  up.kind = SpecKind::subordinator;
  up.pi = {0.5, 0.5};
  up.Q = {-1.0, 1.0, 1.0, -1.0};
  for (int i = 0; i < 2; ++i) {
    PhaseComponent c;
    c.center = 1.0;
    c.jumps_pos = make_measure(0.0, {{1.0, 0, 1.0}});
    up.components.push_back(c);
  }
  up.trans = default_trans(2);
  up.trans[1] = make_two_sided(0.5, {{0.5, 0, 1.0}}, {});
  up.trans[2] = make_two_sided(0.5, {{0.5, 0, 1.0}}, {});

  MapSpec down;
  down.n = 2;
  down.kind = SpecKind::subordinator;
  down.pi = {0.5, 0.5};
  down.Q = {-1.0, 1.0, 1.0, -1.0};
  for (int i = 0; i < 2; ++i) {
    PhaseComponent c;
    c.center = a;
    down.components.push_back(c);
  }
  down.trans = default_trans(2);

  return {MapSubordinatorSpec(std::move(up)),
          MapSubordinatorSpec(std::move(down)),
          {0.5, 0.5}};
}

// -------------------------------------------------------------- samplers ---

namespace {

double uni(std::mt19937_64& g, double a, double b) {
  return std::uniform_real_distribution<double>(a, b)(g);
}

}  // namespace

SpectrallyPositiveParams sample_spectrally_positive_params(
    std::uint64_t seed) {
  std::mt19937_64 g(seed);
  SpectrallyPositiveParams p;
  const double qp01 = uni(g, 0.5, 1.5), qp10 = uni(g, 0.5, 1.5);
  const double qm01 = uni(g, 0.5, 1.5), qm10 = uni(g, 0.5, 1.5);
  p.Qp = {-qp01, qp01, qp10, -qp10};
  p.Qm = {-qm01, qm01, qm10, -qm10};
  const double p0 = uni(g, 0.35, 0.65);
  p.pi = {p0, 1.0 - p0};
  p.mu.resize(2);
  for (int i = 0; i < 2; ++i) {
    const int atoms = 1 + int(uni(g, 0.0, 1.0) * 2.999);
    for (int t = 0; t < atoms; ++t)
      p.mu[size_t(i)].push_back({uni(g, 0.3, 1.0), uni(g, 0.9, 2.5)});
  }
  p.dm = {uni(g, 1.0, 2.0), uni(g, 1.0, 2.0)};
  p.dp = {0.0, 0.0};
  for (int round = 0; round < 64; ++round) {
    bool ok = true;
    for (int i = 0; i < 2; ++i) {
      const int j = 1 - i;
      p.dp[size_t(i)] = p.pi[size_t(j)] / p.pi[size_t(i)] *
                            p.Qp[size_t(j) * 2 + i] * p.dm[size_t(j)] /
                            p.Qm[size_t(i) * 2 + j] -
                        sp_tail_integral(p.mu[size_t(i)]);
      if (!(p.dp[size_t(i)] > 0.1)) ok = false;
      double amin = p.mu[size_t(i)].front().rate;
      for (const RepresentingAtom& a : p.mu[size_t(i)])
        amin = std::min(amin, a.rate);
      const double qmij = p.Qm[size_t(i) * 2 + j];
      const double qmji = p.Qm[size_t(j) * 2 + i];
      if (!(amin * (1.0 + p.dm[size_t(i)] / qmij * amin) >=
            1.1 * qmji / p.dm[size_t(j)]))
        ok = false;
    }
    if (ok) break;
    p.dm[0] *= 1.25;
    p.dm[1] *= 1.25;
  }
  return p;
}

DoubleExpParams sample_double_exp_params(std::uint64_t seed) {
  std::mt19937_64 g(seed);
  DoubleExpParams p;
  // A fresh draw of the non-drift parameters is accepted only if the drifts
  // solved from the balance equalities admit 10% margins on every strict
  // inequality, including the decreasing-compensation conditions that keep
  // the pair inside the constructive sufficiency class; otherwise redraw.
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const double qp01 = uni(g, 0.5, 1.5), qp10 = uni(g, 0.5, 1.5);
    const double qm01 = uni(g, 0.5, 1.5), qm10 = uni(g, 0.5, 1.5);
    p.Qp = {-qp01, qp01, qp10, -qp10};
    p.Qm = {-qm01, qm01, qm10, -qm10};
    const double p0 = uni(g, 0.35, 0.65);
    p.pi = {p0, 1.0 - p0};
    p.gp = {uni(g, 0.5, 1.2), uni(g, 0.5, 1.2)};
    p.gm = {uni(g, 0.5, 1.2), uni(g, 0.5, 1.2)};
    p.bp = {uni(g, 0.9, 2.2), uni(g, 0.9, 2.2)};
    p.bm = {uni(g, 0.9, 2.2), uni(g, 0.9, 2.2)};
    p.dm = {uni(g, 1.0, 2.0), uni(g, 1.0, 2.0)};
    p.dp = {0.0, 0.0};
    // Drift inflation helps the drift bound and density coefficients but
    // erodes the compensation margin, so each draw gets a short budget.
    for (int round = 0; round < 24; ++round) {
      DeView v(p);
      for (int i = 0; i < 2; ++i) {
        const int j = 1 - i;
        p.dp[size_t(i)] =
            v.r(i, j) * v.q(0, j, i) / v.q(1, i, j) *
                (v.drift(1, j) + v.gam(1, j) / (v.beta(1, j) * v.beta(1, j))) -
            v.gam(0, i) / (v.beta(0, i) * v.beta(0, i));
      }
      const DeView w(p);
      bool ok = true;
      for (int i = 0; i < 2 && ok; ++i) {
        const int j = 1 - i;
        if (!(w.drift(0, i) >= 1.1 * de_drift_bound(w, i, j))) ok = false;
        for (int s = 0; s < 2 && ok; ++s) {
          double den = 0.0;
          const double coeff = de_density_coeff(w, s, i, j, &den);
          if (!(den > 0.0) || !(coeff >= 0.1)) ok = false;
          // decreasing off-diagonal compensation with 10% margin:
          // W_ij (q^t_ij + d^t_i b^s_j) >= 1.1 r q^t_ji g^s_j
          const int t = 1 - s;
          const double W = w.q(s, i, j) * de_weight(w, s, i, j);
          const double lhs =
              W * (w.q(t, i, j) + w.drift(t, i) * w.beta(s, j));
          const double rhs = w.r(i, j) * w.q(t, j, i) * w.gam(s, j);
          if (!(lhs >= 1.1 * rhs)) ok = false;
        }
      }
      if (ok) return p;
      p.dm[0] *= 1.25;
      p.dm[1] *= 1.25;
    }
  }
  return p;
}

// ------------------------------------------------------------------- json ---

namespace {

using nlohmann::json;

[[noreturn]] void jfail(const std::string& path, const std::string& msg) {
  throw SchemaError(path, msg);
}

const json& jneed(const json& j, const std::string& path, const char* k) {
  if (!j.is_object()) jfail(path, "expected an object");
  const auto it = j.find(k);
  if (it == j.end()) jfail(path + (path.empty() ? "" : ".") + k,
                           "missing required field");
  return *it;
}

std::vector<double> jvec(const json& j, const std::string& path, size_t len) {
  if (!j.is_array() || j.size() != len)
    jfail(path, "expected an array of " + std::to_string(len) + " numbers");
  std::vector<double> v;
  for (size_t k = 0; k < len; ++k) {
    if (!j[k].is_number())
      jfail(path + "[" + std::to_string(k) + "]", "expected a number");
    v.push_back(j[k].get<double>());
    if (!std::isfinite(v.back()))
      jfail(path + "[" + std::to_string(k) + "]", "value must be finite");
  }
  return v;
}

json parse_root(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) jfail("", "malformed JSON");
  return j;
}

}  // namespace

std::string to_json_text(const SpectrallyPositiveParams& p, int indent) {
  json j;
  j["Q_plus"] = p.Qp;
  j["Q_minus"] = p.Qm;
  j["pi"] = p.pi;
  j["mu_plus"] = json::array();
  for (const auto& phase : p.mu) {
    json ja = json::array();
    for (const RepresentingAtom& a : phase)
      ja.push_back({{"mass", a.mass}, {"rate", a.rate}});
    j["mu_plus"].push_back(std::move(ja));
  }
  j["d_plus"] = p.dp;
  j["d_minus"] = p.dm;
  return indent < 0 ? j.dump() : j.dump(indent);
}

std::string to_json_text(const DoubleExpParams& p, int indent) {
  json j;
  j["Q_plus"] = p.Qp;
  j["Q_minus"] = p.Qm;
  j["pi"] = p.pi;
  j["gamma_plus"] = p.gp;
  j["gamma_minus"] = p.gm;
  j["beta_plus"] = p.bp;
  j["beta_minus"] = p.bm;
  j["d_plus"] = p.dp;
  j["d_minus"] = p.dm;
  return indent < 0 ? j.dump() : j.dump(indent);
}

SpectrallyPositiveParams spectrally_positive_params_from_json_text(
    const std::string& text) {
  const json j = parse_root(text);
  SpectrallyPositiveParams p;
  p.Qp = jvec(jneed(j, "", "Q_plus"), "Q_plus", 4);
  p.Qm = jvec(jneed(j, "", "Q_minus"), "Q_minus", 4);
  p.pi = jvec(jneed(j, "", "pi"), "pi", 2);
  const json& mu = jneed(j, "", "mu_plus");
  if (!mu.is_array() || mu.size() != 2)
    jfail("mu_plus", "expected one atom list per phase");
  p.mu.resize(2);
  for (size_t i = 0; i < 2; ++i) {
    const std::string base = "mu_plus[" + std::to_string(i) + "]";
    if (!mu[i].is_array() || mu[i].empty())
      jfail(base, "expected a non-empty array of atoms");
    for (size_t t = 0; t < mu[i].size(); ++t) {
      const std::string ap = base + "[" + std::to_string(t) + "]";
      const json& a = mu[i][t];
      RepresentingAtom atom;
      atom.mass = jvec(json::array({jneed(a, ap, "mass")}), ap + ".mass", 1)[0];
      atom.rate = jvec(json::array({jneed(a, ap, "rate")}), ap + ".rate", 1)[0];
      p.mu[i].push_back(atom);
    }
  }
  p.dp = jvec(jneed(j, "", "d_plus"), "d_plus", 2);
  p.dm = jvec(jneed(j, "", "d_minus"), "d_minus", 2);
  return p;
}

DoubleExpParams double_exp_params_from_json_text(const std::string& text) {
  const json j = parse_root(text);
  DoubleExpParams p;
  p.Qp = jvec(jneed(j, "", "Q_plus"), "Q_plus", 4);
  p.Qm = jvec(jneed(j, "", "Q_minus"), "Q_minus", 4);
  p.pi = jvec(jneed(j, "", "pi"), "pi", 2);
  p.gp = jvec(jneed(j, "", "gamma_plus"), "gamma_plus", 2);
  p.gm = jvec(jneed(j, "", "gamma_minus"), "gamma_minus", 2);
  p.bp = jvec(jneed(j, "", "beta_plus"), "beta_plus", 2);
  p.bm = jvec(jneed(j, "", "beta_minus"), "beta_minus", 2);
  p.dp = jvec(jneed(j, "", "d_plus"), "d_plus", 2);
  p.dm = jvec(jneed(j, "", "d_minus"), "d_minus", 2);
  return p;
}

}  // namespace mapwh
