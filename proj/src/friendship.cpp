#include "mapwh/friendship.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include "json.hpp"
#include "mapwh/exponent.hpp"
#include "mapwh/json_io.hpp"

namespace mapwh {

namespace {

constexpr double kIdentityTol = 1e-10;  // scalar identities
constexpr double kSignSlack = 1e-12;    // sign and monotonicity slack
constexpr double kGridTol = 1e-9;       // exponent identity on the theta grid

std::string key(const char* base, int i) {
  std::ostringstream os;
  os << base << "." << i;
  return os.str();
}

std::string key(const char* base, int i, int j) {
  std::ostringstream os;
  os << base << "." << i << "." << j;
  return os.str();
}

std::string entry_label(const char* what, int i, int j) {
  std::ostringstream os;
  os << what << "[" << i << "][" << j << "]";
  return os.str();
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

void check_pair(const MapSubordinatorSpec& plus, const MapSubordinatorSpec& minus,
                const std::vector<double>& pi) {
  if (plus.n() != minus.n())
    throw ValidationError("the two descriptions have different phase counts");
  if (int(pi.size()) != plus.n())
    throw ValidationError("pi has wrong length for this pair");
  double sum = 0.0;
  for (double p : pi) {
    if (!(p > 0.0) || !std::isfinite(p))
      throw ValidationError("pi entries must be positive");
    sum += p;
  }
  if (std::fabs(sum - 1.0) > 1e-10)
    throw ValidationError("pi must sum to one");
}

ExpPolyFn dens_fn(const ExpPolyMeasure& m) {
  return ExpPolyFn{0.0, m.terms};
}

// -Psi(0)_{ki} of one description, exact because transition laws have unit
// mass: kill_i - q_{ii} on the diagonal and -q_{ki} off it.
double zero_coeff(const MapSubordinatorSpec& s, int k, int i) {
  return k == i ? s.kill(i) - s.q(i, i) : -s.q(k, i);
}

double levy_atom(const MapSubordinatorSpec& s, int k, int l) {
  return k == l ? 0.0 : s.q(k, l) * s.F_atom(k, l);
}

// Integral of a signed term density over (0, inf).
double signed_mass(const std::vector<ExpPolyTerm>& ts) {
  double s = 0.0;
  for (const ExpPolyTerm& t : ts)
    s += t.w * factorial(t.p) / std::pow(t.beta, t.p + 1);
  return s;
}

std::vector<ExpPolyTerm> scale_terms(std::vector<ExpPolyTerm> ts, double c) {
  for (ExpPolyTerm& t : ts) t.w *= c;
  return ts;
}

// diag(pi)^{-1} Psi-(0)^T diag(pi) Psi+(0), real and row-major. The bonded
// zero-exponent is the negative of this matrix.
std::vector<double> zero_product(const MapSubordinatorSpec& plus,
                                 const MapSubordinatorSpec& minus,
                                 const std::vector<double>& pi) {
  const int n = plus.n();
  const CxMat pm = psi_matrix(minus.spec(), 0.0);
  const CxMat pp = psi_matrix(plus.spec(), 0.0);
  std::vector<double> m(size_t(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k)
        s += pi[k] / pi[i] * pm(k, i).real() * pp(k, j).real();
      m[size_t(i) * n + j] = s;
    }
  return m;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

ConditionResult make_pass(std::string id, std::string detail) {
  ConditionResult c;
  c.id = std::move(id);
  c.pass = true;
  c.detail = std::move(detail);
  return c;
}

ConditionResult make_fail(std::string id, std::string detail, Violation w) {
  ConditionResult c;
  c.id = std::move(id);
  c.pass = false;
  c.detail = std::move(detail);
  c.witness = std::move(w);
  return c;
}

// Worst rise of f on (0, inf) when f should be nonincreasing: runs the shared
// sign scan on -f' and reports the derivative value at the offending point.
std::optional<Violation> rising_point(const ExpPolyFn& f, std::string label) {
  const ExpPolyFn neg_deriv = canon(fn_scale(fn_derivative(f), -1.0));
  if (auto v = find_negative(neg_deriv, kSignSlack)) {
    Violation w;
    w.what = std::move(label);
    w.x = v->x;
    w.value = -v->value;  // the derivative itself (positive = rising)
    return w;
  }
  return std::nullopt;
}

// Keeps the violation whose derivative magnitude is largest.
void keep_worst(std::optional<Violation>& worst, std::optional<Violation> v) {
  if (!v) return;
  if (!worst || std::fabs(v->value) > std::fabs(worst->value))
    worst = std::move(v);
}

void merge_metrics(std::map<std::string, double>& into,
                   const std::map<std::string, double>& from) {
  for (const auto& [k, v] : from) into[k] = v;
}

}  // namespace

// ---------------------------------------------------------------- reports ---

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::friends: return "friends";
    case Verdict::not_friends: return "not-friends";
    default: return "undecidable";
  }
}

bool CheckOutcome::all_pass() const {
  for (const ConditionResult& c : conditions)
    if (!c.pass) return false;
  return true;
}

bool FriendshipReport::passed(const std::string& id) const {
  const ConditionResult* c = find(id);
  return c != nullptr && c->pass;
}

const ConditionResult* FriendshipReport::find(const std::string& id) const {
  for (const ConditionResult& c : conditions)
    if (c.id == id) return &c;
  return nullptr;
}

std::string FriendshipReport::to_json(int indent) const {
  nlohmann::json o;
  o["verdict"] = mapwh::to_string(verdict);
  o["conditions"] = nlohmann::json::array();
  for (const ConditionResult& c : conditions) {
    nlohmann::json jc;
    jc["id"] = c.id;
    jc["pass"] = c.pass;
    jc["detail"] = c.detail;
    if (c.witness) {
      jc["witness"] = {{"what", c.witness->what},
                       {"x", c.witness->x},
                       {"value", c.witness->value}};
    }
    o["conditions"].push_back(std::move(jc));
  }
  o["metrics"] = nlohmann::json::object();
  for (const auto& [k, v] : metrics) o["metrics"][k] = v;
  if (bonding)
    o["bonding"] = nlohmann::json::parse(spec_to_json_text(*bonding, -1));
  return indent < 0 ? o.dump() : o.dump(indent);
}

NotFriendsError::NotFriendsError(FriendshipReport r)
    : Error([&r] {
        std::string msg = "bonding requires a friendly pair; failed:";
        for (const ConditionResult& c : r.conditions)
          if (!c.pass) msg += " " + c.id;
        return msg;
      }()),
      report(std::move(r)) {}

// ------------------------------------------------------------ ingredients ---

ExpPolyMeasure chi(const MapSubordinatorSpec& s, int i, Side sign) {
  ExpPolyMeasure m;
  m.atom0 = s.d(i);
  m.terms = tail_terms(s.Pi(i).terms);
  m.side = sign;
  return canon(m);
}

ExpPolyMeasure levy_entry(const MapSubordinatorSpec& s, int k, int l) {
  if (k == l) return s.Pi(k);
  ExpPolyMeasure m = s.F(k, l);
  const double q = s.q(k, l);
  m.atom0 *= q;
  m.terms = scale_terms(std::move(m.terms), q);
  return m;
}

double UpsilonMatrix::eval(int i, int j, double x) const {
  return mapwh::eval(at(i, j), x);
}

UpsilonMatrix upsilon(const MapSubordinatorSpec& plus,
                      const MapSubordinatorSpec& minus,
                      const std::vector<double>& pi) {
  check_pair(plus, minus, pi);
  const int n = plus.n();
  std::vector<ExpPolyMeasure> lp(size_t(n) * n), lm(size_t(n) * n);
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l) {
      lp[size_t(k) * n + l] = levy_entry(plus, k, l);
      lm[size_t(k) * n + l] = levy_entry(minus, k, l);
    }

  UpsilonMatrix u;
  u.n = n;
  u.entries.resize(size_t(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      ExpPolyFn up, dn;
      for (int k = 0; k < n; ++k) {
        const double w = pi[k] / pi[i];
        const ExpPolyMeasure& pkj = lp[size_t(k) * n + j];
        const ExpPolyMeasure& mki = lm[size_t(k) * n + i];
        // upward branch: minus tails swept across the plus measure, plus the
        // zero-exponent coefficient times the plus tail
        up = fn_add(up, fn_scale(cross_tail_fn(pkj, mki).pos, w));
        up = fn_add(up,
                    fn_scale(tail_fn(pkj), w * zero_coeff(minus, k, i)));
        // downward branch: mirrored roles
        dn = fn_add(dn, fn_scale(cross_tail_fn(mki, pkj).pos, w));
        dn = fn_add(dn, fn_scale(tail_fn(mki), w * zero_coeff(plus, k, j)));
      }
      up = fn_add(up, fn_scale(dens_fn(lp[size_t(i) * n + j]), minus.d(i)));
      dn = fn_add(dn, fn_scale(dens_fn(lm[size_t(j) * n + i]),
                               pi[j] / pi[i] * plus.d(j)));
      u.entries[size_t(i) * n + j] = DensityFn{canon(up), canon(dn)};
    }
  return u;
}

NuMeasure nu_candidate(const MapSubordinatorSpec& plus,
                       const MapSubordinatorSpec& minus,
                       const std::vector<double>& pi) {
  check_pair(plus, minus, pi);
  const int n = plus.n();
  NuMeasure nu;
  nu.n = n;
  nu.entries.resize(size_t(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double qp = plus.q(i, j);
      const double qm = minus.q(j, i);
      const double r = pi[j] / pi[i];
      const ExpPolyMeasure fp = plus.F(i, j);
      const ExpPolyMeasure fm = minus.F(j, i);
      const ExpPolyMeasure& pp_j = plus.Pi(j);
      const ExpPolyMeasure& pm_i = minus.Pi(i);
      const DensityFn cp = cross_tail_fn(fp, pm_i);  // upward law, minus tails
      const DensityFn cm = cross_tail_fn(fm, pp_j);  // downward law, plus tails

      ExpPolyFn up = fn_scale(
          fn_add(cp.pos, fn_scale(dens_fn(fp), minus.d(i))), qp);
      up = fn_add(up, fn_scale(fn_add(cm.neg, fn_scale(tail_fn(pp_j), fm.atom0)),
                               -r * qm));
      ExpPolyFn dn = fn_scale(
          fn_add(cp.neg, fn_scale(tail_fn(pm_i), fp.atom0)), qp);
      dn = fn_add(dn, fn_scale(fn_add(cm.pos, fn_scale(dens_fn(fm), plus.d(j))),
                               -r * qm));

      NuEntry e;
      e.dist = DensityFn{canon(up), canon(dn)};
      e.atom0 = eval(e.dist.pos, 0.0) - eval(e.dist.neg, 0.0);
      e.pos = canon_terms(fn_derivative(e.dist.pos).terms);
      e.neg = canon_terms(fn_scale(fn_derivative(e.dist.neg), -1.0).terms);
      e.total = e.atom0 + signed_mass(e.pos) + signed_mass(e.neg);
      nu.entries[size_t(i) * n + j] = std::move(e);
    }
  return nu;
}

// ------------------------------------------------------------ the checks ---

CheckOutcome check_monotone(const UpsilonMatrix& u) {
  CheckOutcome out;
  std::optional<Violation> worst_pos, worst_neg;
  for (int i = 0; i < u.n; ++i)
    for (int j = 0; j < u.n; ++j) {
      keep_worst(worst_pos, rising_point(u.at(i, j).pos,
                                         entry_label("upsilon", i, j)));
      keep_worst(worst_neg, rising_point(u.at(i, j).neg,
                                         entry_label("upsilon", i, j)));
    }
  if (worst_pos) {
    out.conditions.push_back(make_fail(
        "upsilon.monotone.pos",
        worst_pos->what + " rises on the upward side at x = " +
            fmt(worst_pos->x) + " (derivative " + fmt(worst_pos->value) + ")",
        *worst_pos));
  } else {
    out.conditions.push_back(make_pass(
        "upsilon.monotone.pos", "all candidate tails decrease on (0, inf)"));
  }
  if (worst_neg) {
    Violation w = *worst_neg;
    w.x = -w.x;  // report the location on the negative axis
    out.conditions.push_back(make_fail(
        "upsilon.monotone.neg",
        worst_neg->what + " falls on the downward side at x = " + fmt(w.x) +
            " (derivative in depth " + fmt(w.value) + ")",
        w));
  } else {
    out.conditions.push_back(make_pass(
        "upsilon.monotone.neg", "all candidate tails increase on (-inf, 0)"));
  }
  return out;
}

CheckOutcome check_compatibility(const MapSubordinatorSpec& plus,
                                 const MapSubordinatorSpec& minus,
                                 const std::vector<double>& pi) {
  check_pair(plus, minus, pi);
  const int n = plus.n();
  CheckOutcome out;

  // (i) density structure: exp-poly measures always have smooth densities
  // away from their single possible atom at zero, and those densities have
  // one-sided limits everywhere, so the structural requirement holds.
  out.conditions.push_back(make_pass(
      "compat.i",
      "exp-poly measures carry smooth densities away from the origin"));

  const NuMeasure nu = nu_candidate(plus, minus, pi);

  // (ii.a) drift-atom balance per switching pair. The verdict contracts the
  // downward drift with the arrival phase (d+_j); the variant contracting
  // with the departure phase (d+_i) is reported alongside.
  {
    std::optional<Violation> worst;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        const double r = pi[j] / pi[i];
        const double lhs = plus.q(i, j) * minus.d(i) * plus.F_atom(i, j);
        const double rhs = r * minus.q(j, i) * plus.d(j) * minus.F_atom(j, i);
        const double alt = r * minus.q(j, i) * plus.d(i) * minus.F_atom(j, i);
        out.metrics[key("balance", i, j)] = lhs - rhs;
        out.metrics[key("balance_alt", i, j)] = lhs - alt;
        const double scale = std::max({1.0, std::fabs(lhs), std::fabs(rhs)});
        if (std::fabs(lhs - rhs) > kIdentityTol * scale) {
          Violation w;
          w.what = entry_label("drift-atom balance", i, j);
          w.x = 0.0;
          w.value = lhs - rhs;
          keep_worst(worst, w);
        }
      }
    if (worst) {
      out.conditions.push_back(make_fail(
          "compat.ii.a",
          worst->what + " off by " + fmt(worst->value), *worst));
    } else {
      out.conditions.push_back(make_pass(
          "compat.ii.a",
          "drift-atom balance holds for every switching pair (the "
          "departure-drift variant is in the metrics)"));
    }
  }

  // (ii.b) the signed transfer candidate must be a distribution function of a
  // finite signed measure: bounded variation is structural for exp-poly
  // functions with finite one-sided limits, the limits at +-inf must vanish
  // (no constant part), and the re-evaluated total mass must be zero.
  {
    std::optional<Violation> worst;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        const NuEntry& e = nu.at(i, j);
        out.metrics[key("nu.atom", i, j)] = e.atom0;
        out.metrics[key("nu.total", i, j)] = e.total;
        const double lim_scale =
            std::max({1.0, std::fabs(eval(e.dist.pos, 0.0)),
                      std::fabs(eval(e.dist.neg, 0.0))});
        if (std::fabs(e.dist.pos.c0) > kSignSlack * lim_scale ||
            std::fabs(e.dist.neg.c0) > kSignSlack * lim_scale) {
          Violation w;
          w.what = entry_label("transfer candidate limit at infinity", i, j);
          w.x = 0.0;
          w.value = std::fabs(e.dist.pos.c0) > std::fabs(e.dist.neg.c0)
                        ? e.dist.pos.c0
                        : e.dist.neg.c0;
          keep_worst(worst, w);
        }
        if (std::fabs(e.total) > kIdentityTol * lim_scale) {
          Violation w;
          w.what = entry_label("transfer measure total mass", i, j);
          w.x = 0.0;
          w.value = e.total;
          keep_worst(worst, w);
        }
      }
    if (worst) {
      out.conditions.push_back(make_fail(
          "compat.ii.b", worst->what + " = " + fmt(worst->value), *worst));
    } else {
      out.conditions.push_back(make_pass(
          "compat.ii.b",
          "transfer candidates are of bounded variation with vanishing "
          "limits; totals re-evaluate to zero"));
    }
  }

  // (ii.c) bonded switching atoms must be nonnegative.
  {
    std::optional<Violation> worst;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        const double r = pi[j] / pi[i];
        double v = zero_coeff(minus, i, i) * levy_atom(plus, i, j) +
                   zero_coeff(plus, j, j) * r * levy_atom(minus, j, i) -
                   nu.at(i, j).atom0;
        for (int k = 0; k < n; ++k) {
          if (k == i || k == j) continue;
          v -= pi[k] / pi[i] * levy_atom(minus, k, i) * levy_atom(plus, k, j);
        }
        out.metrics[key("bond.atom", i, j)] = v;
        if (v < -kSignSlack * std::max(1.0, std::fabs(v))) {
          Violation w;
          w.what = entry_label("bonded switching atom", i, j);
          w.x = 0.0;
          w.value = v;
          keep_worst(worst, w);
        }
      }
    if (worst) {
      out.conditions.push_back(make_fail(
          "compat.ii.c", worst->what + " = " + fmt(worst->value) + " < 0",
          *worst));
    } else {
      out.conditions.push_back(
          make_pass("compat.ii.c", "bonded switching atoms are nonnegative"));
    }
  }

  // (iii) / (iv) vector conditions on the bonded zero-exponent.
  const std::vector<double> m = zero_product(plus, minus, pi);
  const double mscale = std::max(1.0, max_abs(m));
  {
    std::optional<Violation> worst;
    for (int i = 0; i < n; ++i) {
      double dag = 0.0;
      for (int j = 0; j < n; ++j) dag += m[size_t(i) * n + j];
      out.metrics[key("dagger", i)] = dag;
      if (dag < -kSignSlack * mscale) {
        Violation w;
        w.what = "bonded killing rate (phase " + std::to_string(i) + ")";
        w.x = 0.0;
        w.value = dag;
        keep_worst(worst, w);
      }
    }
    if (worst) {
      out.conditions.push_back(make_fail(
          "compat.iii", worst->what + " = " + fmt(worst->value) + " < 0",
          *worst));
    } else {
      out.conditions.push_back(
          make_pass("compat.iii", "bonded killing vector is nonnegative"));
    }
  }
  {
    std::optional<Violation> worst;
    for (int j = 0; j < n; ++j) {
      double col = 0.0;
      for (int i = 0; i < n; ++i) col += pi[i] * m[size_t(i) * n + j];
      out.metrics[key("colsum", j)] = col;
      if (col < -kSignSlack * mscale) {
        Violation w;
        w.what = "pi-weighted column (phase " + std::to_string(j) + ")";
        w.x = 0.0;
        w.value = col;
        keep_worst(worst, w);
      }
    }
    if (worst) {
      out.conditions.push_back(make_fail(
          "compat.iv", worst->what + " = " + fmt(worst->value) + " < 0",
          *worst));
    } else {
      out.conditions.push_back(make_pass(
          "compat.iv", "pi-weighted columns of the zero-exponent product are "
                       "nonnegative"));
    }
  }
  return out;
}

CheckOutcome check_quasicompatibility(const MapSubordinatorSpec& plus,
                                      const MapSubordinatorSpec& minus,
                                      const std::vector<double>& pi) {
  check_pair(plus, minus, pi);
  const int n = plus.n();
  CheckOutcome out;

  // precondition: both jump density matrices decrease on (0, inf)
  const auto dens_check = [&](const MapSubordinatorSpec& s, const char* id,
                              const char* label) {
    std::optional<Violation> worst;
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l)
        keep_worst(worst, rising_point(dens_fn(levy_entry(s, k, l)),
                                       entry_label(label, k, l)));
    if (worst) {
      out.conditions.push_back(make_fail(
          id, worst->what + " rises at x = " + fmt(worst->x), *worst));
    } else {
      out.conditions.push_back(make_pass(
          id, std::string(label) + " densities decrease on (0, inf)"));
    }
  };
  dens_check(plus, "quasi.dens.plus", "upward");
  dens_check(minus, "quasi.dens.minus", "downward");

  // drift/tail compensation functions, their one-sided limits at zero, and
  // the correction matrix A
  std::vector<double> a(size_t(n) * n, 0.0);
  double alpha_scale = 1.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double r = pi[j] / pi[i];
      const double qp = plus.q(i, j);
      const double qm = minus.q(j, i);
      ExpPolyFn up = fn_scale(dens_fn(plus.F(i, j)), minus.d(i) * qp);
      up = fn_add(up, fn_scale(tail_fn(plus.Pi(j)),
                               -r * qm * minus.F_atom(j, i)));
      ExpPolyFn dn = fn_scale(tail_fn(minus.Pi(i)), qp * plus.F_atom(i, j));
      dn = fn_add(dn, fn_scale(dens_fn(minus.F(j, i)),
                               -r * qm * plus.d(j)));
      const double ap = eval(canon(up), 0.0);
      const double am = eval(canon(dn), 0.0);
      out.metrics[key("alpha.pos", i, j)] = ap;
      out.metrics[key("alpha.neg", i, j)] = am;
      a[size_t(i) * n + j] = ap - am;
      alpha_scale = std::max({alpha_scale, std::fabs(ap), std::fabs(am)});
    }
  out.conditions.push_back(make_pass(
      "quasi.i.bv",
      "compensation functions are exp-poly, hence of bounded variation; "
      "one-sided limits at zero are finite (scale " + fmt(alpha_scale) +
          ")"));

  // ML test on the atom display corrected by A
  {
    std::optional<Violation> worst;
    double gscale = 1.0;
    std::vector<double> g(size_t(n) * n);
    const auto h = [&](const MapSubordinatorSpec& s, int k, int l) {
      return k == l ? s.q(k, k) - s.kill(k) : levy_atom(s, k, l);
    };
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double v = 0.0;
        for (int k = 0; k < n; ++k)
          v -= pi[k] / pi[i] * h(minus, k, i) * h(plus, k, j);
        v -= a[size_t(i) * n + j];
        g[size_t(i) * n + j] = v;
        gscale = std::max(gscale, std::fabs(v));
        if (i != j) out.metrics[key("ml", i, j)] = v;
      }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        const double v = g[size_t(i) * n + j];
        if (v < -kSignSlack * gscale) {
          Violation w;
          w.what = entry_label("atom display", i, j);
          w.x = 0.0;
          w.value = v;
          keep_worst(worst, w);
        }
      }
    if (worst) {
      out.conditions.push_back(make_fail(
          "quasi.i.ml",
          worst->what + " = " + fmt(worst->value) + " breaks the ML shape",
          *worst));
    } else {
      out.conditions.push_back(make_pass(
          "quasi.i.ml", "corrected atom display has nonnegative off-diagonal "
                        "entries"));
    }
  }

  // drift-atom matrix identity diag(d-) atoms+ = pi-transpose of
  // diag(d+) atoms-
  {
    std::optional<Violation> worst;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        const double lhs = minus.d(i) * levy_atom(plus, i, j);
        const double rhs = pi[j] / pi[i] * plus.d(j) * levy_atom(minus, j, i);
        out.metrics[key("quasi.balance", i, j)] = lhs - rhs;
        const double scale = std::max({1.0, std::fabs(lhs), std::fabs(rhs)});
        if (std::fabs(lhs - rhs) > kIdentityTol * scale) {
          Violation w;
          w.what = entry_label("drift-atom identity", i, j);
          w.x = 0.0;
          w.value = lhs - rhs;
          keep_worst(worst, w);
        }
      }
    if (worst) {
      out.conditions.push_back(make_fail(
          "quasi.ii", worst->what + " off by " + fmt(worst->value), *worst));
    } else {
      out.conditions.push_back(
          make_pass("quasi.ii", "drift-atom matrix identity holds"));
    }
  }

  // same vector conditions as compatibility, under quasi ids
  const std::vector<double> m = zero_product(plus, minus, pi);
  const double mscale = std::max(1.0, max_abs(m));
  {
    std::optional<Violation> worst;
    for (int i = 0; i < n; ++i) {
      double dag = 0.0;
      for (int j = 0; j < n; ++j) dag += m[size_t(i) * n + j];
      out.metrics[key("quasi.dagger", i)] = dag;
      if (dag < -kSignSlack * mscale) {
        Violation w;
        w.what = "bonded killing rate (phase " + std::to_string(i) + ")";
        w.x = 0.0;
        w.value = dag;
        keep_worst(worst, w);
      }
    }
    if (worst)
      out.conditions.push_back(make_fail(
          "quasi.iii", worst->what + " = " + fmt(worst->value), *worst));
    else
      out.conditions.push_back(
          make_pass("quasi.iii", "bonded killing vector is nonnegative"));
  }
  {
    std::optional<Violation> worst;
    for (int j = 0; j < n; ++j) {
      double col = 0.0;
      for (int i = 0; i < n; ++i) col += pi[i] * m[size_t(i) * n + j];
      out.metrics[key("quasi.colsum", j)] = col;
      if (col < -kSignSlack * mscale) {
        Violation w;
        w.what = "pi-weighted column (phase " + std::to_string(j) + ")";
        w.x = 0.0;
        w.value = col;
        keep_worst(worst, w);
      }
    }
    if (worst)
      out.conditions.push_back(make_fail(
          "quasi.iv", worst->what + " = " + fmt(worst->value), *worst));
    else
      out.conditions.push_back(make_pass(
          "quasi.iv", "pi-weighted columns of the zero-exponent product are "
                      "nonnegative"));
  }
  return out;
}

CheckOutcome check_fellowship(const MapSubordinatorSpec& plus,
                              const MapSubordinatorSpec& minus,
                              const std::vector<double>& pi) {
  check_pair(plus, minus, pi);
  const int n = plus.n();
  CheckOutcome out;

  // E_{ij} = sum_k (pi_k/pi_i) (-Psi_coeff(0))_{ki} tail_{kj} + d_coeff,i f_{ij}
  const auto compensation = [&](const MapSubordinatorSpec& tails,
                                const MapSubordinatorSpec& coeffs, int i,
                                int j) {
    ExpPolyFn e;
    for (int k = 0; k < n; ++k)
      e = fn_add(e, fn_scale(tail_fn(levy_entry(tails, k, j)),
                             pi[k] / pi[i] * zero_coeff(coeffs, k, i)));
    e = fn_add(e, fn_scale(dens_fn(levy_entry(tails, i, j)), coeffs.d(i)));
    return canon(e);
  };

  const auto side = [&](const MapSubordinatorSpec& tails,
                        const MapSubordinatorSpec& coeffs, const char* id,
                        const char* label) {
    std::optional<Violation> worst;
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l)
        keep_worst(worst, rising_point(dens_fn(levy_entry(tails, k, l)),
                                       entry_label(label, k, l)));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        keep_worst(worst,
                   rising_point(compensation(tails, coeffs, i, j),
                                entry_label("compensation", i, j)));
    if (worst) {
      out.conditions.push_back(make_fail(
          id,
          worst->what + " rises at x = " + fmt(worst->x) + " (derivative " +
              fmt(worst->value) + ")",
          *worst));
    } else {
      out.conditions.push_back(make_pass(
          id, std::string(label) +
                  " densities and compensation matrix decrease on (0, inf)"));
    }
  };
  side(plus, minus, "fellow.pos", "upward");
  side(minus, plus, "fellow.neg", "downward");
  return out;
}

CheckOutcome check_killing(const MapSubordinatorSpec& plus,
                           const MapSubordinatorSpec& minus,
                           const std::vector<double>& pi) {
  check_pair(plus, minus, pi);
  const int n = plus.n();
  CheckOutcome out;

  std::vector<double> v1(n, 0.0), v2(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      v1[i] += pi[k] / pi[i] * zero_coeff(minus, k, i) * plus.kill(k);
      v2[i] += pi[k] / pi[i] * zero_coeff(plus, k, i) * minus.kill(k);
    }
  const std::vector<double> m = zero_product(plus, minus, pi);
  const double mscale = std::max(1.0, max_abs(m));
  double agree = 0.0;
  for (int i = 0; i < n; ++i) {
    double dag = 0.0;
    for (int j = 0; j < n; ++j) dag += m[size_t(i) * n + j];
    agree = std::max(agree, std::fabs(dag - v1[i]));
    out.metrics[key("killing.v1", i)] = v1[i];
    out.metrics[key("killing.v2", i)] = v2[i];
  }
  const bool zero1 = max_abs(v1) <= kIdentityTol * mscale;
  const bool zero2 = max_abs(v2) <= kIdentityTol * mscale;
  const bool unkilled = zero1 || zero2;
  out.metrics["killing.unkilled"] = unkilled ? 1.0 : 0.0;

  std::string detail =
      unkilled
          ? std::string("bonded process is unkilled (") +
                (zero1 ? "first" : "mirrored") + " display vanishes)"
          : "bonded process is killed (neither display vanishes)";
  detail += "; recovered killing vector agrees to " + fmt(agree);
  if (agree > kIdentityTol * mscale) {
    Violation w;
    w.what = "bonded killing vector vs display";
    w.x = 0.0;
    w.value = agree;
    out.conditions.push_back(make_fail("killing", detail, w));
  } else {
    out.conditions.push_back(make_pass("killing", detail));
  }
  return out;
}

CheckOutcome check_pi_invariance(const MapSubordinatorSpec& plus,
                                 const MapSubordinatorSpec& minus,
                                 const std::vector<double>& pi) {
  check_pair(plus, minus, pi);
  const int n = plus.n();
  CheckOutcome out;

  // left side: pi^T Q_bond with Q_bond recovered from the zero-exponent
  const std::vector<double> m = zero_product(plus, minus, pi);
  const double mscale = std::max(1.0, max_abs(m));
  std::vector<double> dag(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) dag[i] += m[size_t(i) * n + j];
  double lhs_max = 0.0;
  for (int j = 0; j < n; ++j) {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      s += pi[i] * (-m[size_t(i) * n + j] + (i == j ? dag[i] : 0.0));
    out.metrics[key("invariance.lhs", j)] = s;
    lhs_max = std::max(lhs_max, std::fabs(s));
  }

  // right side: pi^T (diag(kill-) Psi+(0) - diag(kill+) Psi-(0))
  const CxMat pp = psi_matrix(plus.spec(), 0.0);
  const CxMat pm = psi_matrix(minus.spec(), 0.0);
  double rhs_max = 0.0, rhs_scale = 1.0;
  for (int j = 0; j < n; ++j) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      s += pi[i] * (minus.kill(i) * pp(i, j).real() -
                    plus.kill(i) * pm(i, j).real());
      rhs_scale = std::max({rhs_scale,
                            std::fabs(minus.kill(i) * pp(i, j).real()),
                            std::fabs(plus.kill(i) * pm(i, j).real())});
    }
    out.metrics[key("invariance.rhs", j)] = s;
    rhs_max = std::max(rhs_max, std::fabs(s));
  }

  const bool lhs_zero = lhs_max <= kIdentityTol * mscale;
  const bool rhs_zero = rhs_max <= kIdentityTol * rhs_scale;
  out.metrics["invariance.holds"] = lhs_zero ? 1.0 : 0.0;
  std::string detail = std::string("pi^T Q_bond ") +
                       (lhs_zero ? "vanishes" : "does not vanish") +
                       " (max " + fmt(lhs_max) + "); killing display " +
                       (rhs_zero ? "vanishes" : "does not vanish") + " (max " +
                       fmt(rhs_max) + ")";
  if (lhs_zero == rhs_zero) {
    out.conditions.push_back(make_pass("invariance", detail));
  } else {
    Violation w;
    w.what = "invariance displays disagree";
    w.x = 0.0;
    w.value = lhs_zero ? rhs_max : lhs_max;
    out.conditions.push_back(make_fail("invariance", detail, w));
  }
  return out;
}

FriendshipReport check_friendship(const MapSubordinatorSpec& plus,
                                  const MapSubordinatorSpec& minus,
                                  const std::vector<double>& pi) {
  FriendshipReport r;
  CheckOutcome compat = check_compatibility(plus, minus, pi);
  CheckOutcome mono = check_monotone(upsilon(plus, minus, pi));
  CheckOutcome kill = check_killing(plus, minus, pi);
  CheckOutcome inv = check_pi_invariance(plus, minus, pi);

  bool ok = true;
  for (CheckOutcome* o : {&compat, &mono, &kill, &inv}) {
    ok = ok && o->all_pass();
    for (ConditionResult& c : o->conditions)
      r.conditions.push_back(std::move(c));
    merge_metrics(r.metrics, o->metrics);
  }
  r.verdict = ok ? Verdict::friends : Verdict::not_friends;
  if (r.verdict == Verdict::friends) r.bonding = bond(plus, minus, pi);
  return r;
}

// ------------------------------------------------------------------- bond ---

CxMat wh_product(const MapSubordinatorSpec& plus,
                 const MapSubordinatorSpec& minus,
                 const std::vector<double>& pi, double theta) {
  const int n = plus.n();
  const CxMat pm = psi_matrix(minus.spec(), -theta).transpose();
  const CxMat pp = psi_matrix(plus.spec(), theta);
  CxMat out(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      cxd s{};
      for (int k = 0; k < n; ++k) s += pm(i, k) * pi[k] * pp(k, j);
      out(i, j) = -s / pi[i];
    }
  return out;
}

MapSpec bond(const MapSubordinatorSpec& plus, const MapSubordinatorSpec& minus,
             const std::vector<double>& pi) {
  check_pair(plus, minus, pi);
  CheckOutcome compat = check_compatibility(plus, minus, pi);
  const UpsilonMatrix u = upsilon(plus, minus, pi);
  CheckOutcome mono = check_monotone(u);
  if (!compat.all_pass() || !mono.all_pass()) {
    FriendshipReport r;
    r.verdict = Verdict::not_friends;
    for (CheckOutcome* o : {&compat, &mono}) {
      for (ConditionResult& c : o->conditions)
        r.conditions.push_back(std::move(c));
      merge_metrics(r.metrics, o->metrics);
    }
    throw NotFriendsError(std::move(r));
  }

  const int n = plus.n();
  const std::vector<double> m = zero_product(plus, minus, pi);
  const double mscale = std::max(1.0, max_abs(m));

  MapSpec b;
  b.n = n;
  b.kind = SpecKind::general;
  b.pi = pi;
  b.Q.assign(size_t(n) * n, 0.0);
  b.components.resize(n);
  b.trans = default_trans(n);

  // jump measures: differentiate the candidate tails in closed form; the
  // switching atoms come out of the compatibility metrics
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const DensityFn& tails = u.at(i, j);
      const ExpPolyFn dp = canon(fn_scale(fn_derivative(tails.pos), -1.0));
      const ExpPolyFn dn = canon(fn_scale(fn_derivative(tails.neg), -1.0));
      if (auto v = find_negative(dp, kSignSlack))
        throw Error("bonded upward density dips to " + fmt(v->value) +
                    " at x = " + fmt(v->x));
      if (auto v = find_negative(dn, kSignSlack))
        throw Error("bonded downward density dips to " + fmt(v->value) +
                    " at depth " + fmt(v->x));
      if (i == j) {
        b.components[i].jumps_pos =
            ExpPolyMeasure{0.0, dp.terms, Side::pos};
        b.components[i].jumps_neg =
            ExpPolyMeasure{0.0, dn.terms, Side::neg};
      } else {
        const double atom = compat.metrics.at(key("bond.atom", i, j));
        const double q =
            std::max(0.0, atom) + signed_mass(dp.terms) + signed_mass(dn.terms);
        if (q > 1e-12 * mscale) {
          b.Q[size_t(i) * n + j] = q;
          TwoSidedMeasure f;
          f.atom0 = std::max(0.0, atom) / q;
          f.pos = scale_terms(dp.terms, 1.0 / q);
          f.neg = scale_terms(dn.terms, 1.0 / q);
          b.trans[size_t(i) * n + j] = canon(f);
        }
      }
    }

  // killing and the diagonal of Q close the zero-exponent; row sums below
  // the identity tolerance are numerical zeros and snap to an unkilled phase
  for (int i = 0; i < n; ++i) {
    double dag = 0.0;
    for (int j = 0; j < n; ++j) dag += m[size_t(i) * n + j];
    b.components[i].kill =
        std::fabs(dag) <= kSignSlack * mscale ? 0.0 : std::max(0.0, dag);
    double row = 0.0;
    for (int j = 0; j < n; ++j)
      if (j != i) row += b.Q[size_t(i) * n + j];
    b.Q[size_t(i) * n + i] = -row;
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double cand = b.q(i, j) - (i == j ? b.components[i].kill : 0.0);
      if (std::fabs(cand + m[size_t(i) * n + j]) > kGridTol * mscale)
        throw Error("bonded zero-exponent mismatch at entry (" +
                    std::to_string(i) + ", " + std::to_string(j) + ")");
    }

  // Gaussian part and the fitted centering coefficient
  for (int i = 0; i < n; ++i)
    b.components[i].gauss = 2.0 * plus.d(i) * minus.d(i);
  {
    const double theta_fit = 1.0;
    const CxMat target = wh_product(plus, minus, pi, theta_fit);
    const CxMat cand = psi_matrix(b, theta_fit);
    for (int i = 0; i < n; ++i)
      b.components[i].center = (target(i, i) - cand(i, i)).imag() / theta_fit;
    double amax = 1.0;
    for (int i = 0; i < n; ++i)
      amax = std::max(amax, std::fabs(b.components[i].center));
    for (double theta :
         {0.25, 0.5, 2.0, 3.0, 5.0, 8.0, 13.0, 21.0, 29.0, 37.0}) {
      const CxMat t = wh_product(plus, minus, pi, theta);
      const CxMat c = psi_matrix(b, theta);
      for (int i = 0; i < n; ++i) {
        const double resid = (t(i, i) - c(i, i)).imag() / theta;
        if (std::fabs(resid) > kGridTol * amax)
          throw Error("centering fit drifts by " + fmt(resid) +
                      " at theta = " + fmt(theta));
      }
    }
  }

  // exponent identity on the frequency grid
  for (int k = 0; k <= 100; ++k) {
    const double theta = -40.0 + 0.8 * k;
    const CxMat diff = psi_matrix(b, theta) - wh_product(plus, minus, pi, theta);
    if (diff.frobenius() > kGridTol)
      throw Error("bonded exponent misses the factorised product by " +
                  fmt(diff.frobenius()) + " at theta = " + fmt(theta));
  }

  validate_spec(b);
  return b;
}

}  // namespace mapwh
