#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "mapwh/errors.hpp"
#include "mapwh/examples.hpp"
#include "mapwh/exponent.hpp"
#include "mapwh/friendship.hpp"
#include "mapwh/simulate.hpp"

using namespace mapwh;

namespace {

MapSpec single_phase(double center, double gauss, double kill,
                     ExpPolyMeasure pos, ExpPolyMeasure neg,
                     SpecKind kind = SpecKind::general) {
  MapSpec s;
  s.n = 1;
  s.kind = kind;
  s.pi = {1.0};
  s.Q = {0.0};
  s.components.resize(1);
  s.components[0].center = center;
  s.components[0].gauss = gauss;
  s.components[0].kill = kill;
  s.components[0].jumps_pos = std::move(pos);
  s.components[0].jumps_neg = std::move(neg);
  s.trans = default_trans(1);
  return s;
}

ExpPolyMeasure no_jumps(Side side = Side::pos) {
  ExpPolyMeasure m;
  m.side = side;
  return m;
}

ExpPolyMeasure exp_density(double w, double beta, Side side) {
  ExpPolyMeasure m;
  m.side = side;
  m.terms.push_back({w, 0, beta});
  return m;
}

// Stationary drift of the phase-averaged exponent through a centered
// difference of the characteristic matrix at the origin.
double exponent_mean_slope(const MapSpec& s, const std::vector<double>& pi) {
  const double eps = 1e-6;
  const CxMat dpsi = (psi_matrix(s, eps) - psi_matrix(s, -eps)) * cxd(1.0 / (2.0 * eps), 0.0);
  double slope = 0.0;
  for (int i = 0; i < s.n; ++i) {
    cxd row = 0.0;
    for (int j = 0; j < s.n; ++j) row += dpsi(i, j);
    slope += pi[i] * row.imag();
  }
  return slope;
}

// Local-clock rescaling of an upward factor: phase i runs delta_i times
// faster, so its switch rates, drift, killing and jump intensities all pick
// up delta_i while the switch jump laws stay put.
MapSpec rescale_local_clocks(MapSpec s, const std::vector<double>& delta) {
  for (int i = 0; i < s.n; ++i) {
    double off = 0.0;
    for (int j = 0; j < s.n; ++j) {
      if (j == i) continue;
      s.Q[size_t(i) * s.n + j] *= delta[i];
      off += s.Q[size_t(i) * s.n + j];
    }
    s.Q[size_t(i) * s.n + i] = -off;
    s.components[i].center *= delta[i];
    s.components[i].kill *= delta[i];
    for (auto& t : s.components[i].jumps_pos.terms) t.w *= delta[i];
    for (auto& t : s.components[i].jumps_neg.terms) t.w *= delta[i];
  }
  return s;
}

}  // namespace

TEST_CASE("pure drift accumulates exactly") {
  MapSpec s = single_phase(1.75, 0.0, 0.0, no_jumps(), no_jumps(Side::neg),
                           SpecKind::subordinator);
  SimulateConfig cfg;
  cfg.T = 3.0;
  cfg.record_trace = false;

  SimulatedPath p = simulate_path(s, cfg);
  CHECK(p.final_x == 1.75 * 3.0);
  CHECK(p.end_time == 3.0);
  CHECK(p.events.empty());
  CHECK_FALSE(p.killed);
  CHECK(p.path_drift[0] == 1.75);

  auto asc = extract_ladder(p, LadderSide::ascending);
  REQUIRE(asc.size() == 1);
  CHECK(asc[0].increment == doctest::Approx(5.25).epsilon(1e-15));
  CHECK(asc[0].phase_at_max == 0);
  CHECK(extract_ladder(p, LadderSide::descending).empty());

  cfg.record_trace = true;
  cfg.h = 1e-3;
  SimulatedPath q = simulate_path(s, cfg);
  CHECK(q.final_x == doctest::Approx(5.25).epsilon(1e-12));
  auto fine = extract_ladder(q, LadderSide::ascending);
  CHECK(fine.size() == q.x.size() - 1);
  double total = 0.0;
  for (const auto& e : fine) total += e.increment;
  CHECK(total == doctest::Approx(q.final_x).epsilon(1e-12));
}

TEST_CASE("simulation validates its configuration") {
  MapSpec s = single_phase(1.0, 0.0, 0.0, no_jumps(), no_jumps(Side::neg));
  SimulateConfig cfg;
  cfg.T = 0.0;
  CHECK_THROWS_AS(simulate_path(s, cfg), ValidationError);
  cfg.T = 1.0;
  cfg.h = 0.0;
  CHECK_THROWS_AS(simulate_path(s, cfg), ValidationError);
  cfg.h = 1e-3;
  cfg.start_phase = 1;
  CHECK_THROWS_AS(simulate_path(s, cfg), ValidationError);
}

TEST_CASE("phase occupation follows the switch clocks") {
  MapSpec s;
  s.n = 2;
  s.kind = SpecKind::general;
  s.pi = {0.5, 0.5};
  s.Q = {-1.0, 1.0, 1.0, -1.0};
  s.components.resize(2);
  s.trans = default_trans(2);

  SimulateConfig cfg;
  cfg.T = 1e4;
  cfg.record_trace = false;
  cfg.seed = 11;
  SimulatedPath p = simulate_path(s, cfg);

  double occ0 = 0.0, last = 0.0;
  int ph = 0;
  double prev_time = -1.0;
  for (const auto& e : p.events) {
    CHECK(e.time > prev_time);
    prev_time = e.time;
    CHECK(e.kind == EventKind::phase_switch);
    CHECK(e.from == ph);
    CHECK(e.to == 1 - ph);
    if (ph == 0) occ0 += e.time - last;
    last = e.time;
    ph = e.to;
  }
  if (ph == 0) occ0 += p.end_time - last;
  CHECK(occ0 / cfg.T == doctest::Approx(0.5).epsilon(0.02));
  const double switches = double(p.events.size());
  CHECK(switches == doctest::Approx(1e4).epsilon(0.05));
}

TEST_CASE("same configuration reproduces the path bit for bit") {
  SubordinatorPair pr = gen_double_exp(sample_double_exp_params(4));
  MapSpec b = bond(pr.plus, pr.minus, pr.pi);

  SimulateConfig cfg;
  cfg.T = 2.0;
  cfg.h = 1e-3;
  cfg.seed = 7;
  cfg.path_id = 3;
  SimulatedPath p1 = simulate_path(b, cfg);
  SimulatedPath p2 = simulate_path(b, cfg);

  CHECK(p1.final_x == p2.final_x);
  CHECK(p1.x == p2.x);
  REQUIRE(p1.events.size() == p2.events.size());
  for (size_t k = 0; k < p1.events.size(); ++k) {
    CHECK(p1.events[k].time == p2.events[k].time);
    CHECK(p1.events[k].jump == p2.events[k].jump);
    CHECK(p1.events[k].kind == p2.events[k].kind);
  }

  cfg.path_id = 4;
  SimulatedPath p3 = simulate_path(b, cfg);
  CHECK(p3.final_x != p1.final_x);
}

TEST_CASE("killing stops the clock at an exponential time") {
  const double rate = 0.6931471805599453;  // survival 1/2 by time one
  MapSpec s = single_phase(1.0, 0.0, rate, no_jumps(), no_jumps(Side::neg),
                           SpecKind::subordinator);
  SimulateConfig cfg;
  cfg.T = 1.0;
  cfg.record_trace = false;
  int killed = 0;
  const int paths = 2000;
  for (int k = 0; k < paths; ++k) {
    cfg.path_id = std::uint64_t(k);
    SimulatedPath p = simulate_path(s, cfg);
    if (p.killed) {
      ++killed;
      CHECK(p.end_time < 1.0);
      REQUIRE(!p.events.empty());
      CHECK(p.events.back().kind == EventKind::kill);
      CHECK(p.final_x == doctest::Approx(p.end_time).epsilon(1e-12));
    } else {
      CHECK(p.end_time == 1.0);
    }
  }
  CHECK(double(killed) / paths == doctest::Approx(0.5).epsilon(0.08));
}

TEST_CASE("mean slope matches the exponent derivative") {
  SubordinatorPair pr = gen_double_exp(sample_double_exp_params(6));

  SUBCASE("upward factor, exact event simulation") {
    const MapSpec& hp = pr.plus.spec();
    const std::vector<double> pig = stationary_law(hp.Q, hp.n);
    const double theory = exponent_mean_slope(hp, pig);
    REQUIRE(theory > 0.0);

    SimulateConfig cfg;
    cfg.T = 500.0;
    cfg.record_trace = false;
    cfg.seed = 21;
    double acc = 0.0;
    const int paths = 400;
    for (int k = 0; k < paths; ++k) {
      cfg.path_id = std::uint64_t(k);
      acc += simulate_path(hp, cfg).final_x / cfg.T;
    }
    const double emp = acc / paths;
    CHECK(emp == doctest::Approx(theory).epsilon(0.02));
  }

  SUBCASE("bonded process oscillates") {
    MapSpec b = bond(pr.plus, pr.minus, pr.pi);
    CHECK(std::fabs(exponent_mean_slope(b, b.pi)) < 1e-8);

    SimulateConfig cfg;
    cfg.T = 50.0;
    cfg.h = 1e-3;
    cfg.seed = 22;
    double acc = 0.0, acc2 = 0.0;
    const int paths = 200;
    for (int k = 0; k < paths; ++k) {
      cfg.path_id = std::uint64_t(k);
      const double v = simulate_path(b, cfg).final_x / cfg.T;
      acc += v;
      acc2 += v * v;
    }
    const double emp = acc / paths;
    const double sd = std::sqrt((acc2 / paths - emp * emp) / (paths - 1));
    CHECK(std::fabs(emp) <= 4.0 * sd + 0.01);
  }
}

TEST_CASE("compound poisson ladder increments are exponential overshoots") {
  // negative pathwise drift, unit-rate upward jumps Exp(beta): every record
  // is a jump overshoot and memorylessness makes them iid Exp(beta)
  const double beta = 1.5, c = 1.2;
  ExpPolyMeasure jumps = exp_density(beta, beta, Side::pos);  // mass one
  const double center = -c + mean_trunc(jumps);
  MapSpec s = single_phase(center, 0.0, 0.0, jumps, no_jumps(Side::neg));

  SimulateConfig cfg;
  cfg.T = 40.0;
  cfg.record_trace = false;
  cfg.seed = 5;
  std::vector<double> u;
  const int paths = 90000;
  for (int k = 0; k < paths; ++k) {
    cfg.path_id = std::uint64_t(k);
    SimulatedPath p = simulate_path(s, cfg);
    for (const auto& e : extract_ladder(p, LadderSide::ascending)) {
      CHECK(e.increment > 0.0);
      u.push_back(1.0 - std::exp(-beta * e.increment));
    }
  }
  CAPTURE(u.size());
  REQUIRE(u.size() >= 100000);
  CHECK(ks_statistic_uniform(std::move(u)) <= 0.02);
}

TEST_CASE("descending ladder matches the dual's ascending ladder entrywise") {
  // Conjugating by the reference law preserves each within-phase ladder law
  // and transposes the switch-pair laws; pooled increments are not invariant
  // because the two ladder modulators weight the phases differently. With
  // exponential jump densities every record below (above) the running record
  // is a memoryless overshoot, so the entrywise laws are directly samplable.
  MapSpec s;
  s.n = 2;
  s.kind = SpecKind::general;
  s.pi = {0.5, 0.5};
  s.Q = {-1.0, 1.0, 1.0, -1.0};
  s.components.resize(2);
  s.components[0].jumps_pos = exp_density(0.8, 2.0, Side::pos);
  s.components[0].jumps_neg = no_jumps(Side::neg);
  s.components[1].jumps_pos = no_jumps();
  s.components[1].jumps_neg = exp_density(0.6, 1.5, Side::neg);
  s.components[0].center = 0.4 + mean_trunc(s.components[0].jumps_pos);
  // zero pathwise slope in phase one: its infimum moves by jumps alone
  s.components[1].center = mean_trunc(s.components[1].jumps_neg);
  s.trans = default_trans(2);
  s.trans[1] = make_two_sided(0.4, {}, {{1.08, 0, 1.8}});  // 0 -> 1

  const MapSpec d = pi_dual(s);

  SimulateConfig cfg;
  cfg.T = 100.0;
  cfg.record_trace = false;
  std::vector<double> s11, d11, s01, d10;
  long s00 = 0, d00 = 0;
  const int paths = 300;
  for (int k = 0; k < paths; ++k) {
    cfg.path_id = std::uint64_t(k);
    cfg.start_phase = k % 2;
    cfg.seed = 31;
    for (const auto& e :
         extract_ladder(simulate_path(s, cfg), LadderSide::descending)) {
      if (e.phase_prev == 1 && e.phase_at_max == 1) s11.push_back(e.increment);
      else if (e.phase_prev == 0 && e.phase_at_max == 1) s01.push_back(e.increment);
      else ++s00;
    }
    cfg.seed = 32;
    for (const auto& e :
         extract_ladder(simulate_path(d, cfg), LadderSide::ascending)) {
      if (e.phase_prev == 1 && e.phase_at_max == 1) d11.push_back(e.increment);
      else if (e.phase_prev == 1 && e.phase_at_max == 0) d10.push_back(e.increment);
      else ++d00;
    }
  }
  // phase zero only climbs, so neither side records any (0, 0) epochs
  CHECK(s00 == 0);
  CHECK(d00 == 0);
  CAPTURE(s11.size());
  CAPTURE(d11.size());
  CAPTURE(s01.size());
  CAPTURE(d10.size());
  REQUIRE(s11.size() > 1000);
  REQUIRE(d11.size() > 1000);
  REQUIRE(s01.size() > 500);
  REQUIRE(d10.size() > 500);
  CHECK(ks_two_sample_p(std::move(s11), std::move(d11)) > 0.01);
  CHECK(ks_two_sample_p(std::move(s01), std::move(d10)) > 0.01);
}

TEST_CASE("pure drift ascending factor yields no jump marks") {
  SubordinatorPair pr =
      gen_spectrally_positive(sample_spectrally_positive_params(2));
  const MapSpec& hm = pr.minus.spec();  // pure drift with switching
  for (int i = 0; i < hm.n; ++i) {
    CHECK(hm.components[i].jumps_pos.terms.empty());
    CHECK(hm.components[i].gauss == 0.0);
  }

  SimulateConfig cfg;
  cfg.T = 10.0;
  cfg.h = 1e-3;
  cfg.seed = 9;
  SimulatedPath p = simulate_path(hm, cfg);
  double dmax = 0.0;
  for (int i = 0; i < hm.n; ++i)
    dmax = std::max(dmax, hm.components[i].center);
  for (const auto& e : extract_ladder(p, LadderSide::ascending)) {
    CHECK(e.increment <= dmax * cfg.h * (1.0 + 1e-9));
    CHECK(e.increment > 0.0);
  }
}

TEST_CASE("gaussian paths require a trace for extraction") {
  MapSpec s = single_phase(0.0, 1.0, 0.0, no_jumps(), no_jumps(Side::neg));
  SimulateConfig cfg;
  cfg.T = 1.0;
  cfg.h = 1e-3;
  cfg.record_trace = false;
  SimulatedPath p = simulate_path(s, cfg);
  CHECK(p.has_gauss);
  CHECK_THROWS_WITH_AS(extract_ladder(p, LadderSide::ascending),
                       doctest::Contains("trace"), ValidationError);

  cfg.record_trace = true;
  SimulatedPath q = simulate_path(s, cfg);
  auto asc = extract_ladder(q, LadderSide::ascending);
  auto desc = extract_ladder(q, LadderSide::descending);
  CHECK(!asc.empty());
  CHECK(!desc.empty());
  double top = 0.0, bottom = 0.0;
  for (const auto& e : asc) top += e.increment;
  for (const auto& e : desc) bottom += e.increment;
  CHECK(top == doctest::Approx(*std::max_element(q.x.begin(), q.x.end()))
                   .epsilon(1e-12));
  CHECK(-bottom == doctest::Approx(*std::min_element(q.x.begin(), q.x.end()))
                       .epsilon(1e-12));
}

TEST_CASE("ladder csv is stable and well formed") {
  const double beta = 1.5;
  ExpPolyMeasure jumps = exp_density(beta, beta, Side::pos);
  MapSpec s = single_phase(-1.2 + mean_trunc(jumps), 0.0, 0.0, jumps,
                           no_jumps(Side::neg));
  SimulateConfig cfg;
  cfg.T = 200.0;
  cfg.record_trace = false;
  cfg.seed = 77;
  SimulatedPath p = simulate_path(s, cfg);
  auto eps = extract_ladder(p, LadderSide::ascending);
  REQUIRE(!eps.empty());

  CHECK(ladder_csv_header() ==
        std::string("path_id,epoch,increment,phase_prev,phase_at_max"));
  const std::string rows = ladder_csv_rows(77, eps);
  CHECK(rows == ladder_csv_rows(77, eps));
  size_t lines = 0, pos = 0;
  while ((pos = rows.find('\n', pos)) != std::string::npos) {
    ++lines;
    ++pos;
  }
  CHECK(lines == eps.size());
  unsigned long long pid = 0;
  size_t epoch = 0;
  double inc = 0.0;
  int prev = -1, atmax = -1;
  REQUIRE(std::sscanf(rows.c_str(), "%llu,%zu,%lg,%d,%d", &pid, &epoch, &inc,
                      &prev, &atmax) == 5);
  CHECK(pid == 77);
  CHECK(epoch == 0);
  CHECK(inc == eps[0].increment);
}

TEST_CASE("empirical ladder check validates the double exponential bond") {
  SubordinatorPair pr = gen_double_exp(sample_double_exp_params(3));
  MapSpec b = bond(pr.plus, pr.minus, pr.pi);

  // long horizons keep the alternation boundary of the two-phase switch
  // counts (at most one unpaired transition per path) far below the gate
  LadderCheckConfig cfg;
  cfg.paths = 160;
  cfg.T = 250.0;
  cfg.h = 1e-4;
  cfg.seed = 2025;
  cfg.level_start = 3.0;
  cfg.level_step = 2.0;
  cfg.levels = 8;

  const LadderCheckReport rep = empirical_ladder_check(b, pr.plus, pr.pi, cfg);
  CAPTURE(to_json_text(rep));

  CHECK(rep.total_epochs >= 10000);
  CHECK(rep.rates_ok);
  CHECK(rep.switching_ok);
  for (int i = 0; i < 2; ++i) {
    REQUIRE(rep.fits[i].has_expected);
    CHECK(rep.fits[i].marked >= 600);
    CHECK(rep.fits[i].rel_error <= cfg.rate_tol);
  }
  CHECK(rep.balance_worst_rel <= cfg.switch_tol);
  CHECK(rep.markchain_max_diff <= 0.05);
  REQUIRE(rep.overshoot_samples >= 250);
  // alpha ~ one percent critical value for the pooled overshoot shape
  CHECK(rep.overshoot_ks <=
        1.63 / std::sqrt(double(rep.overshoot_samples)));
  for (int i = 0; i < 2; ++i) {
    CHECK(rep.creep_frac_emp[i] > 0.0);
    CHECK(rep.creep_frac_emp[i] < 1.0);
  }

  // the report is a deterministic function of the configuration
  const nlohmann::json j = nlohmann::json::parse(to_json_text(rep));
  CHECK(j["rates_ok"].get<bool>());
  CHECK(j["fits"].size() == 2);
}

TEST_CASE("worker count does not change the report") {
  SubordinatorPair pr = gen_double_exp(sample_double_exp_params(3));
  MapSpec b = bond(pr.plus, pr.minus, pr.pi);

  LadderCheckConfig cfg;
  cfg.paths = 40;
  cfg.T = 10.0;
  cfg.h = 1e-3;
  cfg.seed = 5;
  cfg.levels = 2;
  cfg.level_start = 2.0;

  cfg.threads = 1;
  const std::string one = to_json_text(empirical_ladder_check(b, pr.plus, pr.pi, cfg));
  cfg.threads = 5;
  const std::string five = to_json_text(empirical_ladder_check(b, pr.plus, pr.pi, cfg));
  CHECK(one == five);
}

TEST_CASE("local clock rescaling leaves the ladder predictions unchanged") {
  SubordinatorPair pr = gen_double_exp(sample_double_exp_params(8));
  MapSpec b = bond(pr.plus, pr.minus, pr.pi);

  MapSubordinatorSpec faster(
      rescale_local_clocks(pr.plus.spec(), {1.7, 0.4}));

  LadderCheckConfig cfg;
  cfg.paths = 30;
  cfg.T = 10.0;
  cfg.h = 1e-3;
  cfg.seed = 13;
  cfg.levels = 0;

  const LadderCheckReport a = empirical_ladder_check(b, pr.plus, pr.pi, cfg);
  const LadderCheckReport c = empirical_ladder_check(b, faster, pr.pi, cfg);

  // predictions agree to rounding, the empirical side is bitwise identical
  // (the same bonded process was simulated with the same seed)
  for (int i = 0; i < 2; ++i) {
    CHECK(c.fits[i].expected_rate ==
          doctest::Approx(a.fits[i].expected_rate).epsilon(1e-12));
    CHECK(c.creep_frac_pred[i] ==
          doctest::Approx(a.creep_frac_pred[i]).epsilon(1e-12));
    CHECK(c.fits[i].marked == a.fits[i].marked);
    CHECK(c.fits[i].fitted_rate == a.fits[i].fitted_rate);
  }
  for (size_t k = 0; k < a.markchain_pred.size(); ++k) {
    CHECK(c.markchain_pred[k] ==
          doctest::Approx(a.markchain_pred[k]).epsilon(1e-12));
    CHECK(c.markchain_emp[k] == a.markchain_emp[k]);
  }
  CHECK(c.transitions == a.transitions);
  CHECK(c.total_epochs == a.total_epochs);
  CHECK(c.overshoot_ks == a.overshoot_ks);
  CHECK(c.rates_ok == a.rates_ok);
  CHECK(c.switching_ok == a.switching_ok);
}

TEST_CASE("empirical check rejects unusable inputs") {
  SubordinatorPair pr = gen_double_exp(sample_double_exp_params(3));
  MapSpec b = bond(pr.plus, pr.minus, pr.pi);
  LadderCheckConfig cfg;
  cfg.paths = 2;
  cfg.T = 1.0;

  MapSpec killed = b;
  killed.components[0].kill = 0.1;
  CHECK_THROWS_WITH_AS(empirical_ladder_check(killed, pr.plus, pr.pi, cfg),
                       doctest::Contains("unkilled"), ValidationError);

  std::vector<double> wrong = {0.9, 0.1};
  CHECK_THROWS_WITH_AS(empirical_ladder_check(b, pr.plus, wrong, cfg),
                       doctest::Contains("reference law"), ValidationError);

  std::vector<double> short_pi = {1.0};
  CHECK_THROWS_AS(empirical_ladder_check(b, pr.plus, short_pi, cfg),
                  ValidationError);
}
