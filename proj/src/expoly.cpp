#include "mapwh/expoly.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>

namespace mapwh {

namespace {

constexpr double kRateMergeRtol = 1e-12;
// Weights this far below the largest one carry no information at the 1e-10
// comparison tolerance and are dropped during canonicalization.
constexpr double kWeightDropRtol = 1e-14;
constexpr int kMaxPower = 60;

double max_abs_weight(const std::vector<ExpPolyTerm>& ts) {
  double m = 0.0;
  for (const ExpPolyTerm& t : ts) m = std::max(m, std::fabs(t.w));
  return m;
}

bool rates_equal(double a, double b, double rtol = kRateMergeRtol) {
  return std::fabs(a - b) <= rtol * std::max(std::fabs(a), std::fabs(b));
}

double min_rate(const std::vector<ExpPolyTerm>& ts) {
  double b = std::numeric_limits<double>::infinity();
  for (const ExpPolyTerm& t : ts) b = std::min(b, t.beta);
  return b;
}

}  // namespace

// --------------------------------------------------------------- helpers ---

double factorial(int n) {
  static const auto table = [] {
    std::array<double, kMaxPower + 1> f{};
    f[0] = 1.0;
    for (int i = 1; i <= kMaxPower; ++i) f[i] = f[i - 1] * i;
    return f;
  }();
  if (n < 0 || n > kMaxPower) throw ValidationError("factorial: power out of range");
  return table[static_cast<size_t>(n)];
}

double binom(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  return factorial(n) / (factorial(k) * factorial(n - k));
}

double lower_gamma(int n, double y) {
  if (n <= 0) throw ValidationError("lower_gamma: order must be positive");
  if (y <= 0.0) return 0.0;
  if (y < 1.0) {
    // Series gamma(n,y) = y^n e^{-y} sum_k y^k / (n (n+1) ... (n+k)):
    // cancellation-free for small y.
    double term = 1.0 / n, sum = term;
    for (int k = 1; k < 200; ++k) {
      term *= y / (n + k);
      sum += term;
      if (term < 1e-18 * sum) break;
    }
    return std::pow(y, n) * std::exp(-y) * sum;
  }
  // Complement form: gamma(n,y) = (n-1)! (1 - e^{-y} sum_{m<n} y^m/m!).
  double s = 0.0, t = 1.0;
  for (int m = 0; m < n; ++m) {
    s += t;
    t *= y / (m + 1);
  }
  return factorial(n - 1) * (1.0 - std::exp(-y) * s);
}

// -------------------------------------------------------- canonical forms ---

std::vector<ExpPolyTerm> canon_terms(std::vector<ExpPolyTerm> ts) {
  std::erase_if(ts, [](const ExpPolyTerm& t) { return t.w == 0.0; });
  // Deterministic order also for equal keys so that merge sums do not depend
  // on the caller's term order (keeps commutativity tests exact).
  std::sort(ts.begin(), ts.end(), [](const ExpPolyTerm& a, const ExpPolyTerm& b) {
    if (a.beta != b.beta) return a.beta < b.beta;
    if (a.p != b.p) return a.p < b.p;
    return a.w < b.w;
  });
  std::vector<ExpPolyTerm> out;
  size_t i = 0;
  while (i < ts.size()) {
    // One rate group: chain-adjacent rates within the merge tolerance.
    size_t j = i + 1;
    while (j < ts.size() && rates_equal(ts[j - 1].beta, ts[j].beta)) ++j;
    const double rate = ts[i].beta;  // representative: smallest in group
    size_t k = i;
    while (k < j) {
      size_t l = k + 1;
      while (l < j && ts[l].p == ts[k].p) ++l;
      double w = 0.0;
      for (size_t m = k; m < l; ++m) w += ts[m].w;
      out.push_back({w, ts[k].p, rate});
      k = l;
    }
    i = j;
  }
  const double drop = kWeightDropRtol * max_abs_weight(out);
  std::erase_if(out, [&](const ExpPolyTerm& t) { return std::fabs(t.w) <= drop; });
  return out;
}

ExpPolyMeasure canon(ExpPolyMeasure m) {
  m.terms = canon_terms(std::move(m.terms));
  return m;
}

ExpPolyFn canon(ExpPolyFn f) {
  f.terms = canon_terms(std::move(f.terms));
  return f;
}

TwoSidedMeasure canon(TwoSidedMeasure m) {
  m.pos = canon_terms(std::move(m.pos));
  m.neg = canon_terms(std::move(m.neg));
  return m;
}

bool terms_close(const std::vector<ExpPolyTerm>& a,
                 const std::vector<ExpPolyTerm>& b, double rate_rtol,
                 double w_tol) {
  const std::vector<ExpPolyTerm> ca = canon_terms(a), cb = canon_terms(b);
  const auto negligible = [&](const ExpPolyTerm& t) {
    return std::fabs(t.w) <= w_tol;
  };
  size_t i = 0, j = 0;
  while (i < ca.size() || j < cb.size()) {
    if (i < ca.size() && j < cb.size()) {
      const ExpPolyTerm &x = ca[i], &y = cb[j];
      if (rates_equal(x.beta, y.beta, rate_rtol) && x.p == y.p) {
        if (std::fabs(x.w - y.w) >
            w_tol * std::max(1.0, std::max(std::fabs(x.w), std::fabs(y.w))))
          return false;
        ++i, ++j;
        continue;
      }
      // Keys differ: whichever sorts first must be negligible.
      const bool x_first = x.beta < y.beta || (rates_equal(x.beta, y.beta, rate_rtol) && x.p < y.p);
      if (x_first) {
        if (!negligible(x)) return false;
        ++i;
      } else {
        if (!negligible(y)) return false;
        ++j;
      }
    } else if (i < ca.size()) {
      if (!negligible(ca[i])) return false;
      ++i;
    } else {
      if (!negligible(cb[j])) return false;
      ++j;
    }
  }
  return true;
}

bool measure_close(const ExpPolyMeasure& a, const ExpPolyMeasure& b,
                   double rate_rtol, double w_tol) {
  const bool a_empty = a.terms.empty() && a.atom0 == 0.0;
  const bool b_empty = b.terms.empty() && b.atom0 == 0.0;
  if (!a_empty && !b_empty && a.side != b.side) return false;
  if (std::fabs(a.atom0 - b.atom0) >
      w_tol * std::max(1.0, std::max(a.atom0, b.atom0)))
    return false;
  return terms_close(a.terms, b.terms, rate_rtol, w_tol);
}

bool two_sided_close(const TwoSidedMeasure& a, const TwoSidedMeasure& b,
                     double rate_rtol, double w_tol) {
  if (std::fabs(a.atom0 - b.atom0) >
      w_tol * std::max(1.0, std::max(a.atom0, b.atom0)))
    return false;
  return terms_close(a.pos, b.pos, rate_rtol, w_tol) &&
         terms_close(a.neg, b.neg, rate_rtol, w_tol);
}

// ------------------------------------------------------------ validation ---

std::optional<Violation> find_negative(const ExpPolyFn& fin, double slack) {
  const ExpPolyFn f = canon(fin);
  const double scale = std::fabs(f.c0) + max_abs_weight(f.terms);
  if (scale == 0.0) return std::nullopt;
  const double thr = slack * std::max(1.0, scale);

  bool all_nonneg = f.c0 >= -thr, all_nonpos = f.c0 <= thr;
  for (const ExpPolyTerm& t : f.terms) {
    all_nonneg = all_nonneg && t.w >= -thr;
    all_nonpos = all_nonpos && t.w <= thr;
  }
  if (all_nonneg) return std::nullopt;
  if (all_nonpos) {
    // Definitely negative somewhere: report the most negative scan point.
    double wx = 1.0, wv = 0.0;
    const double bmin = f.terms.empty() ? 1.0 : min_rate(f.terms);
    for (int k = 0; k <= 100; ++k) {
      const double x = std::exp(std::log(1e-3) +
                                k * (std::log(30.0 / bmin) - std::log(1e-3)) / 100.0);
      const double v = eval(f, x);
      if (v < wv) wv = v, wx = x;
    }
    if (wv >= -thr && f.c0 < -thr) wx = 1e6, wv = f.c0;
    return Violation{"sign-definite negative", wx, wv};
  }

  // Mixed signs: log-spaced scan plus a dominant-term check at infinity.
  const double bmin = min_rate(f.terms);
  const double lo = 1e-6, hi = 1e3 / bmin;
  const int npts = 10000;
  double wx = 0.0, wv = 0.0;
  const double llo = std::log(lo), lhi = std::log(hi);
  for (int k = 0; k <= npts; ++k) {
    const double x = std::exp(llo + k * (lhi - llo) / npts);
    const double v = eval(f, x);
    if (v < wv) wv = v, wx = x;
  }
  if (wv < -thr) return Violation{"negative on scan grid", wx, wv};

  // At infinity the constant dominates; with no constant, the smallest-rate
  // largest-power term does.
  if (f.c0 < -thr) {
    double x = hi;
    for (int it = 0; it < 80 && eval(f, x) >= -thr; ++it) x *= 2.0;
    return Violation{"negative at infinity (constant term)", x, eval(f, x)};
  }
  if (std::fabs(f.c0) <= thr && !f.terms.empty()) {
    const ExpPolyTerm* dom = nullptr;
    for (const ExpPolyTerm& t : f.terms) {
      if (!dom || t.beta < dom->beta * (1.0 - kRateMergeRtol) ||
          (rates_equal(t.beta, dom->beta) && t.p > dom->p))
        dom = &t;
    }
    if (dom->w < -thr) {
      // Locate a witness using the e^{+bmin x}-scaled function, which does
      // not underflow where the plain values do.
      double x = hi;
      for (int it = 0; it < 400; ++it) {
        double g = f.c0 * std::exp(bmin * std::min(x, 600.0 / bmin));
        for (const ExpPolyTerm& t : f.terms)
          g += t.w * std::pow(x, t.p) * std::exp(-(t.beta - bmin) * x);
        if (g < 0.0) return Violation{"negative at infinity (dominant term)", x, eval(f, x)};
        x *= 1.25;
      }
      return Violation{"negative at infinity (dominant term)", x, 0.0};
    }
  }
  return std::nullopt;
}

void validate_measure(const ExpPolyMeasure& m) {
  if (!(m.atom0 >= 0.0)) throw ValidationError("measure: atom0 must be >= 0");
  for (const ExpPolyTerm& t : m.terms) {
    if (!(t.beta > 0.0)) throw ValidationError("measure: rate must be > 0");
    if (t.p < 0 || t.p > kMaxPower)
      throw ValidationError("measure: power out of range");
    if (!std::isfinite(t.w)) throw ValidationError("measure: weight not finite");
  }
  if (auto v = find_negative(ExpPolyFn{0.0, m.terms})) {
    throw ValidationError("measure: density negative near x=" +
                          std::to_string(v->x) + " (value " +
                          std::to_string(v->value) + ")");
  }
}

ExpPolyMeasure make_measure(double atom0, std::vector<ExpPolyTerm> terms,
                            Side side) {
  ExpPolyMeasure m{atom0, canon_terms(std::move(terms)), side};
  validate_measure(m);
  return m;
}

void validate_two_sided(const TwoSidedMeasure& m) {
  validate_measure(ExpPolyMeasure{m.atom0, m.pos, Side::pos});
  validate_measure(ExpPolyMeasure{0.0, m.neg, Side::neg});
}

TwoSidedMeasure make_two_sided(double atom0, std::vector<ExpPolyTerm> pos,
                               std::vector<ExpPolyTerm> neg) {
  TwoSidedMeasure m{atom0, canon_terms(std::move(pos)),
                    canon_terms(std::move(neg))};
  validate_two_sided(m);
  return m;
}

// ------------------------------------------------------------ evaluations ---

double eval_terms(const std::vector<ExpPolyTerm>& ts, double x) {
  double s = 0.0;
  for (const ExpPolyTerm& t : ts)
    s += t.w * std::pow(x, t.p) * std::exp(-t.beta * x);
  return s;
}

double density(const ExpPolyMeasure& m, double x) { return eval_terms(m.terms, x); }

double eval(const ExpPolyFn& f, double x) { return f.c0 + eval_terms(f.terms, x); }

double eval(const DensityFn& f, double x) {
  return x >= 0.0 ? eval(f.pos, x) : eval(f.neg, -x);
}

std::vector<ExpPolyTerm> tail_terms(const std::vector<ExpPolyTerm>& ts) {
  // int_x^inf w y^p e^{-by} dy = w e^{-bx} sum_{m=0}^{p} (p!/m!) x^m / b^{p-m+1}
  std::vector<ExpPolyTerm> out;
  for (const ExpPolyTerm& t : ts)
    for (int m = 0; m <= t.p; ++m)
      out.push_back({t.w * factorial(t.p) / factorial(m) /
                         std::pow(t.beta, t.p - m + 1),
                     m, t.beta});
  return canon_terms(std::move(out));
}

ExpPolyFn tail_fn(const ExpPolyMeasure& m) { return {0.0, tail_terms(m.terms)}; }

double tail(const ExpPolyMeasure& m, double x) {
  return eval_terms(tail_terms(m.terms), x);
}

double mass(const ExpPolyMeasure& m) {
  double s = m.atom0;
  for (const ExpPolyTerm& t : m.terms)
    s += t.w * factorial(t.p) / std::pow(t.beta, t.p + 1);
  return s;
}

double mass(const TwoSidedMeasure& m) {
  return mass(ExpPolyMeasure{m.atom0, m.pos, Side::pos}) +
         mass(ExpPolyMeasure{0.0, m.neg, Side::neg});
}

double mean(const ExpPolyMeasure& m) {
  double s = 0.0;
  for (const ExpPolyTerm& t : m.terms)
    s += t.w * factorial(t.p + 1) / std::pow(t.beta, t.p + 2);
  return m.side == Side::pos ? s : -s;
}

double mean(const TwoSidedMeasure& m) {
  return mean(ExpPolyMeasure{0.0, m.pos, Side::pos}) +
         mean(ExpPolyMeasure{0.0, m.neg, Side::neg});
}

double mean_trunc(const ExpPolyMeasure& m) {
  // int_0^1 x * w x^p e^{-bx} dx = w * gamma(p+2, b) / b^{p+2}
  double s = 0.0;
  for (const ExpPolyTerm& t : m.terms)
    s += t.w * lower_gamma(t.p + 2, t.beta) / std::pow(t.beta, t.p + 2);
  return m.side == Side::pos ? s : -s;
}

// -------------------------------------------------------------- transforms ---

std::complex<double> laplace(const ExpPolyMeasure& m, std::complex<double> z) {
  std::complex<double> s = m.atom0;
  for (const ExpPolyTerm& t : m.terms)
    s += t.w * factorial(t.p) / std::pow(z + t.beta, t.p + 1);
  return s;
}

std::complex<double> laplace(const TwoSidedMeasure& m, std::complex<double> z) {
  if (!m.neg.empty())
    throw ValidationError("laplace: measure has mass on the negative axis");
  return laplace(ExpPolyMeasure{m.atom0, m.pos, Side::pos}, z);
}

std::complex<double> cf(const ExpPolyMeasure& m, double theta) {
  const std::complex<double> i(0.0, 1.0);
  const std::complex<double> shift =
      (m.side == Side::pos) ? -i * theta : i * theta;
  std::complex<double> s = m.atom0;
  for (const ExpPolyTerm& t : m.terms)
    s += t.w * factorial(t.p) / std::pow(t.beta + shift, t.p + 1);
  return s;
}

std::complex<double> cf(const TwoSidedMeasure& m, double theta) {
  return cf(ExpPolyMeasure{m.atom0, m.pos, Side::pos}, theta) +
         cf(ExpPolyMeasure{0.0, m.neg, Side::neg}, theta);
}

// ----------------------------------------------------------------- algebra ---

ExpPolyMeasure reflect(const ExpPolyMeasure& m) {
  ExpPolyMeasure r = m;
  r.side = (m.side == Side::pos) ? Side::neg : Side::pos;
  return r;
}

TwoSidedMeasure reflect(const TwoSidedMeasure& m) {
  return TwoSidedMeasure{m.atom0, m.neg, m.pos};
}

namespace {

// x^p e^{-bx} * x^q e^{-cx} with b == c (merged-rate branch):
//   p! q! / (p+q+1)!  *  x^{p+q+1} e^{-bx}
void emit_conv_equal(double w, int p, int q, double rate,
                     std::vector<ExpPolyTerm>& out) {
  out.push_back(
      {w * factorial(p) * factorial(q) / factorial(p + q + 1), p + q + 1, rate});
}

// Distinct rates via partial fractions of p!q!/((s+b)^{p+1}(s+c)^{q+1}).
void emit_conv_distinct(double w, int p, double b, int q, double c,
                        std::vector<ExpPolyTerm>& out) {
  const double pq = factorial(p) * factorial(q);
  for (int k = 0; k <= p; ++k) {
    const double a =
        ((k % 2) ? -1.0 : 1.0) * binom(q + k, k) / std::pow(c - b, q + 1 + k);
    out.push_back({w * pq * a / factorial(p - k), p - k, b});
  }
  for (int l = 0; l <= q; ++l) {
    const double a =
        ((l % 2) ? -1.0 : 1.0) * binom(p + l, l) / std::pow(b - c, p + 1 + l);
    out.push_back({w * pq * a / factorial(q - l), q - l, c});
  }
}

}  // namespace

ExpPolyMeasure convolve(const ExpPolyMeasure& a, const ExpPolyMeasure& b) {
  if (a.side != b.side && !a.terms.empty() && !b.terms.empty())
    throw ValidationError("convolve: measures must live on the same side");
  ExpPolyMeasure out;
  out.side = a.terms.empty() ? b.side : a.side;
  out.atom0 = a.atom0 * b.atom0;
  for (const ExpPolyTerm& t : b.terms)
    out.terms.push_back({a.atom0 * t.w, t.p, t.beta});
  for (const ExpPolyTerm& t : a.terms)
    out.terms.push_back({b.atom0 * t.w, t.p, t.beta});
  for (const ExpPolyTerm& ta : a.terms)
    for (const ExpPolyTerm& tb : b.terms) {
      if (rates_equal(ta.beta, tb.beta))
        emit_conv_equal(ta.w * tb.w, ta.p, tb.p, 0.5 * (ta.beta + tb.beta),
                        out.terms);
      else
        emit_conv_distinct(ta.w * tb.w, ta.p, ta.beta, tb.p, tb.beta, out.terms);
    }
  out.terms = canon_terms(std::move(out.terms));
  return out;
}

std::vector<ExpPolyTerm> cross_kernel_terms(const std::vector<ExpPolyTerm>& f,
                                            const std::vector<ExpPolyTerm>& g) {
  // term of f: v u^m e^{-cu}; term of g: w (u+s)^p e^{-b(u+s)}:
  //   contribution  v w e^{-bs} sum_r C(p,r) s^r (m+p-r)! / (c+b)^{m+p-r+1}
  std::vector<ExpPolyTerm> out;
  for (const ExpPolyTerm& tf : f)
    for (const ExpPolyTerm& tg : g)
      for (int r = 0; r <= tg.p; ++r)
        out.push_back({tf.w * tg.w * binom(tg.p, r) *
                           factorial(tf.p + tg.p - r) /
                           std::pow(tf.beta + tg.beta, tf.p + tg.p - r + 1),
                       r, tg.beta});
  return canon_terms(std::move(out));
}

DensityFn cross_tail_fn(const ExpPolyMeasure& a, const ExpPolyMeasure& b) {
  const std::vector<ExpPolyTerm> tb = tail_terms(b.terms);
  DensityFn out;
  out.pos.terms = cross_kernel_terms(tb, a.terms);  // rates of a survive
  out.neg.terms = cross_kernel_terms(a.terms, tb);  // rates of b survive
  return out;
}

double cross_convolve_tail(const ExpPolyMeasure& a, const ExpPolyMeasure& b,
                           double x) {
  const DensityFn f = cross_tail_fn(a, b);
  return x >= 0.0 ? eval(f.pos, x) : eval(f.neg, -x);
}

// ------------------------------------------------------------ function ops ---

ExpPolyFn fn_add(const ExpPolyFn& a, const ExpPolyFn& b) {
  ExpPolyFn out{a.c0 + b.c0, a.terms};
  out.terms.insert(out.terms.end(), b.terms.begin(), b.terms.end());
  out.terms = canon_terms(std::move(out.terms));
  return out;
}

ExpPolyFn fn_scale(const ExpPolyFn& a, double c) {
  ExpPolyFn out{a.c0 * c, a.terms};
  for (ExpPolyTerm& t : out.terms) t.w *= c;
  return out;
}

ExpPolyFn fn_derivative(const ExpPolyFn& a) {
  // d/dx [w x^p e^{-bx}] = w p x^{p-1} e^{-bx} - w b x^p e^{-bx}
  ExpPolyFn out;
  for (const ExpPolyTerm& t : a.terms) {
    if (t.p > 0) out.terms.push_back({t.w * t.p, t.p - 1, t.beta});
    out.terms.push_back({-t.w * t.beta, t.p, t.beta});
  }
  out.terms = canon_terms(std::move(out.terms));
  return out;
}

DensityFn fn_add(const DensityFn& a, const DensityFn& b) {
  return {fn_add(a.pos, b.pos), fn_add(a.neg, b.neg)};
}

DensityFn fn_scale(const DensityFn& a, double c) {
  return {fn_scale(a.pos, c), fn_scale(a.neg, c)};
}

}  // namespace mapwh
