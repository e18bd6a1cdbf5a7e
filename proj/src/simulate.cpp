#include "mapwh/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "mapwh/cxmat.hpp"
#include "mapwh/errors.hpp"
#include "mapwh/kernels.hpp"

namespace mapwh {

namespace {

// ---------------------------------------------------------------- rng ------

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Two independent substreams over one counter-based generator: event decisions
// draw one value at a time, the Gaussian part consumes batched normals. The
// substreams use disjoint counter ranges, so a path is a pure function of
// (seed, path_id) no matter how the consumers interleave.
class PathRng {
 public:
  PathRng(std::uint64_t seed, std::uint64_t path_id)
      : key_(mix64(seed ^ mix64(path_id))) {}

  double uniform() {
    if (ev_pos_ == 2) {
      fill_uniform(key_, (1ull << 63) | ev_ctr_++, ev_buf_, 2);
      ev_pos_ = 0;
    }
    return ev_buf_[ev_pos_++];
  }

  double exponential(double rate) { return -std::log(uniform()) / rate; }

  double normal() {
    if (nm_pos_ == nm_buf_.size()) {
      if (nm_buf_.empty()) nm_buf_.resize(4096);
      fill_normals(key_, nm_ctr_, nm_buf_.data(), nm_buf_.size());
      nm_ctr_ += nm_buf_.size() / 2;
      nm_pos_ = 0;
    }
    return nm_buf_[nm_pos_++];
  }

 private:
  std::uint64_t key_;
  std::uint64_t ev_ctr_ = 0;
  double ev_buf_[2] = {0, 0};
  int ev_pos_ = 2;
  std::uint64_t nm_ctr_ = 0;
  std::vector<double> nm_buf_;
  std::size_t nm_pos_ = 0;
};

// ---------------------------------------------------- jump mixtures --------

struct MixtureComp {
  double cum = 0.0;  // normalized cumulative probability
  double sign = 1.0;
  int p = 0;
  double beta = 1.0;
  bool atom = false;
};

// Finite measure as a sampling mixture: the atom at zero plus gamma components
// w x^p e^{-beta x} of mass w p! / beta^{p+1}, drawn as p+1 unit exponentials.
struct JumpSampler {
  double total = 0.0;
  std::vector<MixtureComp> comps;

  void add_atom(double m) {
    if (m <= 0.0) return;
    total += m;
    comps.push_back({total, 1.0, 0, 1.0, true});
  }

  void add_terms(const std::vector<ExpPolyTerm>& ts, double sign) {
    for (const auto& t : ts) {
      if (t.w < 0.0)
        throw ValidationError(
            "simulation needs nonnegative mixture weights in every jump "
            "measure");
      const double m = t.w * factorial(t.p) / std::pow(t.beta, t.p + 1);
      if (m <= 0.0) continue;
      total += m;
      comps.push_back({total, sign, t.p, t.beta, false});
    }
  }

  void finalize() {
    for (auto& c : comps) c.cum /= total;
    if (!comps.empty()) comps.back().cum = 1.0;
  }

  double draw(PathRng& rng) const {
    const double u = rng.uniform();
    std::size_t k = 0;
    while (k + 1 < comps.size() && u > comps[k].cum) ++k;
    const MixtureComp& c = comps[k];
    if (c.atom) return 0.0;
    double g = 0.0;
    for (int r = 0; r <= c.p; ++r) g -= std::log(rng.uniform());
    return c.sign * g / c.beta;
  }
};

struct PhaseClock {
  double b = 0.0;      // pathwise slope
  double sigma = 0.0;  // Gaussian standard deviation
  double kill = 0.0;
  double lam = 0.0;  // own-jump intensity
  double rate = 0.0;  // kill + lam + switch rates
  JumpSampler own;
  std::vector<double> q_to;        // switch rate per destination
  std::vector<JumpSampler> carry;  // switch jump law per destination
};

std::vector<PhaseClock> build_clocks(const MapSpec& s) {
  std::vector<PhaseClock> clocks(s.n);
  for (int i = 0; i < s.n; ++i) {
    const PhaseComponent& c = s.components[i];
    PhaseClock& pc = clocks[i];
    if (!(c.kill >= 0.0) || !(c.gauss >= 0.0))
      throw ValidationError("simulation needs nonnegative kill and gauss");
    pc.kill = c.kill;
    pc.sigma = std::sqrt(c.gauss);
    pc.b = c.center;
    if (s.kind == SpecKind::general)
      pc.b -= mean_trunc(c.jumps_pos) + mean_trunc(c.jumps_neg);
    pc.own.add_terms(c.jumps_pos.terms, c.jumps_pos.side == Side::neg ? -1 : 1);
    pc.own.add_terms(c.jumps_neg.terms, c.jumps_neg.side == Side::neg ? -1 : 1);
    pc.own.finalize();
    pc.lam = pc.own.total;
    pc.q_to.assign(s.n, 0.0);
    pc.carry.resize(s.n);
    double sw = 0.0;
    for (int j = 0; j < s.n; ++j) {
      if (j == i) continue;
      const double qij = s.q(i, j);
      if (qij < 0.0)
        throw ValidationError("simulation needs nonnegative switch rates");
      if (qij == 0.0) continue;
      pc.q_to[j] = qij;
      sw += qij;
      JumpSampler& js = pc.carry[j];
      const TwoSidedMeasure& F = s.F(i, j);
      js.add_atom(F.atom0);
      js.add_terms(F.pos, 1.0);
      js.add_terms(F.neg, -1.0);
      if (js.total <= 0.0)
        throw ValidationError(
            "simulation needs a normalizable switch jump law");
      js.finalize();
    }
    pc.rate = pc.kill + pc.lam + sw;
  }
  return clocks;
}

}  // namespace

// ---------------------------------------------------------------- paths ----

SimulatedPath simulate_path(const MapSpec& spec, const SimulateConfig& cfg) {
  if (spec.n < 1 || spec.components.size() != size_t(spec.n) ||
      spec.Q.size() != size_t(spec.n) * spec.n ||
      spec.trans.size() != size_t(spec.n) * spec.n)
    throw ValidationError("simulation needs a structurally complete spec");
  if (!(cfg.T > 0.0) || !std::isfinite(cfg.T))
    throw ValidationError("simulation horizon T must be positive and finite");
  if (!(cfg.h > 0.0) || !std::isfinite(cfg.h))
    throw ValidationError("simulation step h must be positive and finite");
  if (cfg.start_phase < 0 || cfg.start_phase >= spec.n)
    throw ValidationError("start phase is out of range");

  const std::vector<PhaseClock> clocks = build_clocks(spec);
  PathRng rng(cfg.seed, cfg.path_id);

  SimulatedPath path;
  path.n = spec.n;
  path.T = cfg.T;
  path.h = cfg.h;
  path.start_phase = cfg.start_phase;
  path.has_trace = cfg.record_trace;
  path.path_drift.resize(spec.n);
  for (int i = 0; i < spec.n; ++i) {
    path.path_drift[i] = clocks[i].b;
    if (clocks[i].sigma > 0.0) path.has_gauss = true;
  }

  double t = 0.0, x = 0.0;
  int ph = cfg.start_phase;
  if (cfg.record_trace) {
    const size_t guess = size_t(cfg.T / cfg.h) + 1024;
    path.t.reserve(guess);
    path.x.reserve(guess);
    path.phase.reserve(guess);
    path.t.push_back(0.0);
    path.x.push_back(0.0);
    path.phase.push_back(ph);
  }
  auto push = [&](double tt, double xx, int pp) {
    if (!cfg.record_trace) return;
    path.t.push_back(tt);
    path.x.push_back(xx);
    path.phase.push_back(pp);
  };

  bool killed = false;
  while (t < cfg.T) {
    const PhaseClock& pc = clocks[ph];
    const double dt = pc.rate > 0.0
                          ? rng.exponential(pc.rate)
                          : std::numeric_limits<double>::infinity();
    const double seg_end = std::min(t + dt, cfg.T);
    if (cfg.record_trace || pc.sigma > 0.0) {
      // grid steps of h restart after every event; the final step is partial
      const double eps = cfg.h * 1e-9;
      while (seg_end - t > eps) {
        const double step = std::min(cfg.h, seg_end - t);
        double dx = pc.b * step;
        if (pc.sigma > 0.0)
          dx += pc.sigma * std::sqrt(step) * rng.normal();
        x += dx;
        t += step;
        push(t, x, ph);
      }
    } else {
      x += pc.b * (seg_end - t);
    }
    t = seg_end;
    if (t >= cfg.T) break;

    double u = rng.uniform() * pc.rate;
    if (u < pc.kill) {
      path.events.push_back({t, EventKind::kill, ph, ph, 0.0});
      killed = true;
      break;
    }
    u -= pc.kill;
    if (u < pc.lam) {
      const double jmp = pc.own.draw(rng);
      x += jmp;
      path.events.push_back({t, EventKind::levy_jump, ph, ph, jmp});
      push(t, x, ph);
    } else {
      u -= pc.lam;
      int dest = -1;
      for (int j = 0; j < spec.n && dest < 0; ++j) {
        if (pc.q_to[j] <= 0.0) continue;
        if (u < pc.q_to[j]) dest = j;
        else u -= pc.q_to[j];
      }
      if (dest < 0) {  // numerical edge of the category draw
        for (int j = spec.n - 1; j >= 0; --j)
          if (pc.q_to[j] > 0.0) { dest = j; break; }
      }
      const double jmp = pc.carry[dest].draw(rng);
      x += jmp;
      path.events.push_back({t, EventKind::phase_switch, ph, dest, jmp});
      ph = dest;
      push(t, x, ph);
    }
  }

  path.killed = killed;
  path.end_time = t;
  path.final_x = x;
  path.final_phase = ph;
  return path;
}

// --------------------------------------------------------------- ladders ---

namespace {

std::vector<LadderEpoch> ladder_from_trace(const SimulatedPath& p,
                                           LadderSide side) {
  std::vector<LadderEpoch> eps;
  if (p.x.empty()) return eps;
  const double dir = side == LadderSide::ascending ? 1.0 : -1.0;
  double best = dir * p.x[0];
  for (size_t k = 1; k < p.x.size(); ++k) {
    const double v = dir * p.x[k];
    if (v > best) {
      eps.push_back({v - best, p.phase[k], p.phase[k - 1]});
      best = v;
    }
  }
  return eps;
}

// Exact reconstruction for Gaussian-free paths: piecewise-linear stretches
// between events plus the event jumps, with one epoch per climbing stretch.
std::vector<LadderEpoch> ladder_from_events(const SimulatedPath& p,
                                            LadderSide side) {
  std::vector<LadderEpoch> eps;
  const double dir = side == LadderSide::ascending ? 1.0 : -1.0;
  double t0 = 0.0, x0 = 0.0, best = 0.0;
  int ph = p.start_phase;
  auto stretch_to = [&](double t1) {
    const double x1 = x0 + p.path_drift[ph] * (t1 - t0);
    const double v = dir * x1;
    if (v > best) {
      eps.push_back({v - best, ph, ph});
      best = v;
    }
    x0 = x1;
    t0 = t1;
  };
  for (const PathEvent& e : p.events) {
    stretch_to(e.time);
    x0 += e.jump;
    const double v = dir * x0;
    if (v > best) {
      eps.push_back({v - best, e.to, e.from});
      best = v;
    }
    ph = e.to;
  }
  stretch_to(p.end_time);
  return eps;
}

}  // namespace

std::vector<LadderEpoch> extract_ladder(const SimulatedPath& path,
                                        LadderSide side) {
  if (path.has_trace) return ladder_from_trace(path, side);
  if (path.has_gauss)
    throw ValidationError(
        "ladder extraction from a Gaussian path needs a recorded trace");
  return ladder_from_events(path, side);
}

std::string ladder_csv_header() {
  return "path_id,epoch,increment,phase_prev,phase_at_max";
}

std::string ladder_csv_rows(std::uint64_t path_id,
                            const std::vector<LadderEpoch>& epochs) {
  std::string out;
  char line[128];
  for (size_t k = 0; k < epochs.size(); ++k) {
    std::snprintf(line, sizeof line, "%llu,%zu,%.17g,%d,%d\n",
                  static_cast<unsigned long long>(path_id), k,
                  epochs[k].increment, epochs[k].phase_prev,
                  epochs[k].phase_at_max);
    out += line;
  }
  return out;
}

// ------------------------------------------------------------ statistics ---

double ks_statistic_uniform(std::vector<double> u) {
  if (u.empty()) throw ValidationError("distribution test needs samples");
  std::sort(u.begin(), u.end());
  const double n = double(u.size());
  double d = 0.0;
  for (size_t k = 0; k < u.size(); ++k) {
    d = std::max(d, u[k] - double(k) / n);
    d = std::max(d, double(k + 1) / n - u[k]);
  }
  return d;
}

namespace {

double ks_tail(double lambda) {
  // 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2)
  double s = 0.0, sign = 1.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = sign * 2.0 * std::exp(-2.0 * k * k * lambda * lambda);
    s += term;
    if (std::fabs(term) < 1e-12 * std::fabs(s) + 1e-300) break;
    sign = -sign;
  }
  return std::min(1.0, std::max(0.0, s));
}

}  // namespace

double ks_two_sample_p(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty())
    throw ValidationError("distribution test needs samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const size_t m = a.size(), n = b.size();
  size_t i = 0, j = 0;
  double fa = 0.0, fb = 0.0, d = 0.0;
  while (i < m && j < n) {
    if (a[i] <= b[j]) fa = double(++i) / double(m);
    else fb = double(++j) / double(n);
    d = std::max(d, std::fabs(fa - fb));
  }
  const double ne = double(m) * double(n) / double(m + n);
  const double lam = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
  return ks_tail(lam);
}

// ------------------------------------------------------ empirical check ----

namespace {

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("MAPWH_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? int(std::min(hw, 8u)) : 1;
}

struct PathStats {
  long epochs = 0;
  std::vector<long> marked;       // per phase_at_max
  std::vector<double> excess;     // per phase, sum of increment - cutoff
  std::vector<long> trans;        // n*n adjacency of all epochs
  std::vector<long> mark_trans;   // n*n adjacency of marked epochs
  std::vector<std::pair<int, double>> overshoots;  // (phase, overshoot)
};

PathStats collect_path(const MapSpec& bond, const LadderCheckConfig& cfg,
                       const std::vector<double>& cutoff, int path_id, int n) {
  SimulateConfig sc;
  sc.T = cfg.T;
  sc.h = cfg.h;
  sc.seed = cfg.seed;
  sc.path_id = std::uint64_t(path_id);
  sc.record_trace = true;
  const SimulatedPath path = simulate_path(bond, sc);
  const std::vector<LadderEpoch> eps =
      extract_ladder(path, LadderSide::ascending);

  PathStats st;
  st.marked.assign(n, 0);
  st.excess.assign(n, 0.0);
  st.trans.assign(size_t(n) * n, 0);
  st.mark_trans.assign(size_t(n) * n, 0);
  st.epochs = long(eps.size());
  int prev = -1, prev_marked = -1;
  for (const LadderEpoch& e : eps) {
    const int j = e.phase_at_max;
    if (prev >= 0) ++st.trans[size_t(prev) * n + j];
    prev = j;
    if (e.increment > cutoff[j]) {
      ++st.marked[j];
      st.excess[j] += e.increment - cutoff[j];
      if (prev_marked >= 0) ++st.mark_trans[size_t(prev_marked) * n + j];
      prev_marked = j;
    }
  }

  // first-passage overshoots over spaced levels; after a crossing the next
  // level is the smallest one above the maximum reached, so the samples stay
  // close to independent
  int lev = 0;
  double m = 0.0;
  for (size_t k = 0; k < path.x.size() && lev < cfg.levels; ++k) {
    if (path.x[k] <= m) continue;
    m = path.x[k];
    double level = cfg.level_start + lev * cfg.level_step;
    if (m < level) continue;
    st.overshoots.push_back({path.phase[k], m - level});
    while (lev < cfg.levels &&
           cfg.level_start + lev * cfg.level_step <= m)
      ++lev;
  }
  return st;
}

}  // namespace

LadderCheckReport empirical_ladder_check(const MapSpec& bond,
                                         const MapSubordinatorSpec& plus,
                                         const std::vector<double>& pi,
                                         const LadderCheckConfig& cfg) {
  const int n = bond.n;
  if (n < 1 || plus.n() != n)
    throw ValidationError("empirical check needs matching phase counts");
  if (pi.size() != size_t(n))
    throw ValidationError("empirical check needs a reference law of length n");
  for (int i = 0; i < n; ++i) {
    if (bond.components[i].kill != 0.0)
      throw ValidationError(
          "empirical check needs an unkilled bonded description");
    if (std::fabs(bond.pi[i] - pi[i]) > 1e-8)
      throw ValidationError(
          "empirical check needs the bond's own reference law");
  }
  if (!irreducible(bond.Q, n))
    throw ValidationError("empirical check needs an irreducible modulator");
  if (cfg.paths < 1 || cfg.levels < 0)
    throw ValidationError("empirical check needs at least one path");

  LadderCheckReport rep;
  rep.fits.resize(n);
  rep.transitions.assign(size_t(n) * n, 0);
  rep.markchain_pred.assign(size_t(n) * n, 0.0);
  rep.markchain_emp.assign(size_t(n) * n, 0.0);
  rep.creep_frac_emp.assign(n, 0.0);
  rep.creep_frac_pred.assign(n, 0.0);

  // a single-step Gaussian record must stay below the mark cutoff
  rep.cutoffs.assign(n, cfg.jump_cutoff);
  for (int i = 0; i < n; ++i)
    rep.cutoffs[i] = std::max(
        cfg.jump_cutoff, 8.0 * std::sqrt(bond.components[i].gauss * cfg.h));

  // predictions carried by the ascending factor
  std::vector<double> expected_rate(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const ExpPolyMeasure& Pi = plus.Pi(i);
    PhaseLadderFit& f = rep.fits[i];
    if (!Pi.terms.empty()) {
      f.has_expected = true;
      double r = Pi.terms[0].beta;
      for (const auto& t : Pi.terms) r = std::min(r, t.beta);
      f.expected_rate = r;
      expected_rate[i] = r;
    }
    const double mj = mean(plus.Pi(i));
    rep.creep_frac_pred[i] =
        plus.d(i) + mj > 0.0 ? plus.d(i) / (plus.d(i) + mj) : 0.0;
  }
  const std::vector<double> pip = stationary_law(plus.spec().Q, n);

  // jump-marked phase chain kernel K = (D - U)^{-1} M: D holds total event
  // outflow, U the mark-free switches (atoms), M the marked landings. The
  // observed chain only sees marks whose overshoot clears the cutoff, an
  // independent thinning with phase probability p_j = exp(-rate_j cut_j), so
  // the prediction is the visible-mark kernel (I - K (I-P))^{-1} K P.
  {
    CxMat A(n, n), M(n, n);
    for (int i = 0; i < n; ++i) {
      const double lam_i = mass(plus.Pi(i));
      double D = plus.kill(i) + lam_i;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        const double qij = plus.q(i, j);
        D += qij;
        A(i, j) = -qij * plus.F_atom(i, j);
        M(i, j) = qij * (1.0 - plus.F_atom(i, j));
      }
      A(i, i) = D;
      M(i, i) = lam_i;
    }
    const CxMat K = solve(A, M);
    CxMat hide(n, n), KP(n, n);
    for (int i = 0; i < n; ++i) {
      const double p = rep.fits[i].has_expected
                           ? std::exp(-expected_rate[i] * rep.cutoffs[i])
                           : 1.0;
      for (int j = 0; j < n; ++j) {
        hide(j, i) = -K(j, i) * (1.0 - p);
        KP(j, i) = K(j, i) * p;
      }
      hide(i, i) += 1.0;
    }
    const CxMat Kvis = solve(hide, KP);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        rep.markchain_pred[size_t(i) * n + j] = Kvis(i, j).real();
  }

  // simulate the bond and collect per-path statistics
  std::vector<PathStats> stats(cfg.paths);
  {
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex err_mu;
    auto worker = [&] {
      for (;;) {
        const int k = next.fetch_add(1);
        if (k >= cfg.paths) return;
        try {
          stats[k] = collect_path(bond, cfg, rep.cutoffs, k, n);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mu);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    };
    const int workers = std::min(resolve_threads(cfg.threads), cfg.paths);
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  // fixed-order reduction keeps the report deterministic
  std::vector<double> excess(n, 0.0);
  std::vector<long> marked(n, 0), creeps(n, 0);
  std::vector<long> cross(n, 0);
  std::vector<long> mark_trans(size_t(n) * n, 0);
  std::vector<double> pooled_u;
  for (const PathStats& st : stats) {
    rep.total_epochs += st.epochs;
    for (int i = 0; i < n; ++i) {
      marked[i] += st.marked[i];
      excess[i] += st.excess[i];
    }
    for (size_t k = 0; k < st.trans.size(); ++k) {
      rep.transitions[k] += st.trans[k];
      mark_trans[k] += st.mark_trans[k];
    }
    for (const auto& ov : st.overshoots) {
      ++cross[ov.first];
      if (ov.second <= rep.cutoffs[ov.first]) {
        ++creeps[ov.first];
      } else if (expected_rate[ov.first] > 0.0) {
        pooled_u.push_back(
            1.0 - std::exp(-expected_rate[ov.first] *
                           (ov.second - rep.cutoffs[ov.first])));
      }
    }
  }

  // per-phase exponential rate fit on the marked increments past the cutoff
  rep.rates_ok = true;
  for (int i = 0; i < n; ++i) {
    PhaseLadderFit& f = rep.fits[i];
    f.marked = marked[i];
    rep.marked_epochs += marked[i];
    if (f.has_expected) {
      if (marked[i] >= 50) {
        f.fitted_rate = double(marked[i]) / excess[i];
        f.rel_error = std::fabs(f.fitted_rate / f.expected_rate - 1.0);
        if (f.rel_error > cfg.rate_tol) rep.rates_ok = false;
      } else {
        std::ostringstream os;
        os << "phase " << i << ": only " << marked[i]
           << " jump-marked epochs, rate fit skipped";
        rep.warnings.push_back(os.str());
      }
    } else if (marked[i] > std::max<long>(10, rep.total_epochs / 1000)) {
      rep.rates_ok = false;
      std::ostringstream os;
      os << "phase " << i << ": " << marked[i]
         << " jump-marked epochs where the ascending factor has no jumps";
      rep.warnings.push_back(os.str());
    }
  }
  if (rep.total_epochs < 10000)
    rep.warnings.push_back(
        "fewer than 1e4 ladder epochs; statistics are underpowered");

  // switch balance over all epochs
  rep.switching_ok = true;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double qij = plus.q(i, j), qji = plus.q(j, i);
      if (qij <= 0.0 || qji <= 0.0) continue;
      const long nij = rep.transitions[size_t(i) * n + j];
      const long nji = rep.transitions[size_t(j) * n + i];
      if (nij < 25 || nji < 25) {
        std::ostringstream os;
        os << "pair " << i << "," << j
           << ": too few phase changes for the balance check";
        rep.warnings.push_back(os.str());
        continue;
      }
      const double pred = pip[i] * qij / (pip[j] * qji);
      const double rel = std::fabs(double(nij) / double(nji) / pred - 1.0);
      rep.balance_worst_rel = std::max(rep.balance_worst_rel, rel);
      if (rel > cfg.switch_tol) rep.switching_ok = false;
    }
  }

  // observed jump-marked chain vs its kernel
  for (int i = 0; i < n; ++i) {
    long row = 0;
    for (int j = 0; j < n; ++j) row += mark_trans[size_t(i) * n + j];
    if (row >= 100) {
      for (int j = 0; j < n; ++j) {
        const double emp = double(mark_trans[size_t(i) * n + j]) / double(row);
        rep.markchain_emp[size_t(i) * n + j] = emp;
        rep.markchain_max_diff =
            std::max(rep.markchain_max_diff,
                     std::fabs(emp - rep.markchain_pred[size_t(i) * n + j]));
      }
    } else {
      std::ostringstream os;
      os << "phase " << i << ": too few marked epochs for the chain check";
      rep.warnings.push_back(os.str());
    }
  }

  // first-passage overshoots: creep fractions and the pooled positive parts
  for (int i = 0; i < n; ++i)
    rep.creep_frac_emp[i] =
        cross[i] > 0 ? double(creeps[i]) / double(cross[i]) : 0.0;
  rep.overshoot_samples = long(pooled_u.size());
  if (!pooled_u.empty())
    rep.overshoot_ks = ks_statistic_uniform(std::move(pooled_u));
  else if (cfg.levels > 0)
    rep.warnings.push_back("no level-crossing overshoots were collected");

  return rep;
}

std::string to_json_text(const LadderCheckReport& r, int indent) {
  nlohmann::json j;
  j["total_epochs"] = r.total_epochs;
  j["marked_epochs"] = r.marked_epochs;
  j["cutoffs"] = r.cutoffs;
  auto fits = nlohmann::json::array();
  for (size_t i = 0; i < r.fits.size(); ++i) {
    const PhaseLadderFit& f = r.fits[i];
    fits.push_back({{"phase", i},
                    {"marked", f.marked},
                    {"has_expected", f.has_expected},
                    {"expected_rate", f.expected_rate},
                    {"fitted_rate", f.fitted_rate},
                    {"rel_error", f.rel_error}});
  }
  j["fits"] = std::move(fits);
  j["transitions"] = r.transitions;
  j["balance_worst_rel"] = r.balance_worst_rel;
  j["markchain_pred"] = r.markchain_pred;
  j["markchain_emp"] = r.markchain_emp;
  j["markchain_max_diff"] = r.markchain_max_diff;
  j["creep_frac_emp"] = r.creep_frac_emp;
  j["creep_frac_pred"] = r.creep_frac_pred;
  j["overshoot_samples"] = r.overshoot_samples;
  j["overshoot_ks"] = r.overshoot_ks;
  j["rates_ok"] = r.rates_ok;
  j["switching_ok"] = r.switching_ok;
  j["warnings"] = r.warnings;
  return j.dump(indent);
}

}  // namespace mapwh
