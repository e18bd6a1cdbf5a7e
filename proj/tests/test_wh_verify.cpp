#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "mapwh/errors.hpp"
#include "mapwh/examples.hpp"
#include "mapwh/exponent.hpp"
#include "mapwh/friendship.hpp"
#include "mapwh/wh_verify.hpp"

using namespace mapwh;

namespace {

struct BondedCase {
  SubordinatorPair pair;
  MapSpec bond;
};

BondedCase bonded_double_exp(std::uint64_t seed) {
  SubordinatorPair pr = gen_double_exp(sample_double_exp_params(seed));
  MapSpec b = bond(pr.plus, pr.minus, pr.pi);
  return {std::move(pr), std::move(b)};
}

BondedCase bonded_spectrally_positive(std::uint64_t seed) {
  SubordinatorPair pr =
      gen_spectrally_positive(sample_spectrally_positive_params(seed));
  MapSpec b = bond(pr.plus, pr.minus, pr.pi);
  return {std::move(pr), std::move(b)};
}

// a one-phase standard Brownian motion, psi(theta) = -theta^2 / 2
MapSpec brownian_spec() {
  MapSpec s;
  s.n = 1;
  s.kind = SpecKind::general;
  s.pi = {1.0};
  s.Q = {0.0};
  PhaseComponent c;
  c.gauss = 1.0;
  s.components = {c};
  s.trans = default_trans(1);
  return s;
}

MapSubordinatorSpec pure_drift_one_phase(double d) {
  MapSpec s;
  s.n = 1;
  s.kind = SpecKind::subordinator;
  s.pi = {1.0};
  s.Q = {0.0};
  PhaseComponent c;
  c.center = d;
  s.components = {c};
  s.trans = default_trans(1);
  return MapSubordinatorSpec(std::move(s));
}

}  // namespace

TEST_CASE("grid builders cover their ranges") {
  const std::vector<double> u = uniform_grid(-50.0, 50.0, 1001);
  REQUIRE(u.size() == 1001);
  CHECK(u.front() == -50.0);
  CHECK(u.back() == 50.0);
  CHECK(u[500] == 0.0);

  const std::vector<double> r = refined_grid(50.0, 11, 30, 0.01);
  CHECK(r.size() >= 60);
  for (double t : r) CHECK(t != 0.0);
  CHECK(std::fabs(r.front() + 50.0) <= 1e-12);
  double closest = 1e9;
  for (double t : r) closest = std::min(closest, std::fabs(t));
  CHECK(closest == doctest::Approx(0.01).epsilon(1e-12));

  CHECK_THROWS_AS(uniform_grid(1.0, 0.0, 5), ValidationError);
  CHECK_THROWS_AS(refined_grid(1.0, 5, 5, 2.0), ValidationError);
}

TEST_CASE("factorised product reproduces the bonded exponent on a wide grid") {
  const std::vector<double> grid = uniform_grid(-50.0, 50.0, 1001);
  for (int fam = 0; fam < 2; ++fam) {
    CAPTURE(fam);
    const BondedCase c =
        fam == 0 ? bonded_double_exp(1) : bonded_spectrally_positive(1);
    const WhScan scan =
        wh_residual(c.bond, c.pair.plus, c.pair.minus, c.pair.pi, grid);
    CHECK(scan.max_residual <= 1e-9);
    CHECK(scan.samples.size() == grid.size());
    // unkilled pairs close the identity at theta = 0 at generator level
    const WhScan zero =
        wh_residual(c.bond, c.pair.plus, c.pair.minus, c.pair.pi, {0.0});
    CHECK(zero.max_residual <= 1e-12);
    CHECK(zero.samples[0].det_abs <= 1e-12);
  }
}

TEST_CASE("residual scan flags a perturbed drift") {
  const BondedCase c = bonded_double_exp(4);
  MapSpec bumped = c.pair.plus.spec();
  bumped.components[1].center += 1e-3;
  const MapSubordinatorSpec plus(std::move(bumped));
  const WhScan scan = wh_residual(c.bond, plus, c.pair.minus, c.pair.pi,
                                  uniform_grid(-50.0, 50.0, 1001));
  CHECK(scan.max_residual >= 1e-4);
}

TEST_CASE("residual csv carries one row per sample") {
  const BondedCase c = bonded_double_exp(2);
  const WhScan scan = wh_residual(c.bond, c.pair.plus, c.pair.minus, c.pair.pi,
                                  uniform_grid(-1.0, 1.0, 5));
  const std::string csv = to_csv(scan);
  CHECK(csv.rfind("theta,residual_frobenius,det_abs\n", 0) == 0);
  size_t rows = 0;
  for (char ch : csv)
    if (ch == '\n') ++rows;
  CHECK(rows == 6);  // header + 5 samples
  double th = 0.0, res = 0.0, da = 0.0;
  const size_t first = csv.find('\n') + 1;
  REQUIRE(std::sscanf(csv.c_str() + first, "%lf,%lf,%lf", &th, &res, &da) == 3);
  CHECK(th == -1.0);
  CHECK(res == doctest::Approx(scan.samples[0].residual_frobenius));
  CHECK(da == doctest::Approx(scan.samples[0].det_abs));
}

TEST_CASE("exponent stays invertible away from the origin") {
  const std::vector<double> grid = refined_grid(50.0, 11, 100, 0.01);
  for (int fam = 0; fam < 2; ++fam) {
    CAPTURE(fam);
    const BondedCase c =
        fam == 0 ? bonded_double_exp(3) : bonded_spectrally_positive(3);
    const InvertibilityScan scan = invertibility_scan(c.bond, grid);
    CHECK(scan.min_det_abs > 1e-8);
    CHECK(std::fabs(scan.theta_at_min) == doctest::Approx(0.01).epsilon(1e-9));
  }
  CHECK_THROWS_AS(invertibility_scan(brownian_spec(), {0.0, 1.0}),
                  ValidationError);
}

TEST_CASE("brownian determinant matches its closed form") {
  const InvertibilityScan scan =
      invertibility_scan(brownian_spec(), {-0.01, 0.01, 1.0, 25.0});
  CHECK(scan.min_det_abs == doctest::Approx(0.01 * 0.01 / 2.0).epsilon(1e-14));
  CHECK(std::fabs(scan.theta_at_min) == 0.01);
}

TEST_CASE("determinant zero orders at the origin add up") {
  // each unkilled one-sided exponent has a simple determinant zero at the
  // origin; the factorisation multiplies the two determinants, so the bonded
  // exponent must show exactly the sum of the one-sided orders
  const BondedCase c = bonded_double_exp(6);
  std::vector<double> thetas;
  std::vector<double> dplus, dminus, dbond;
  for (int k = 0; k < 12; ++k) {
    const double t = 1e-3 * std::pow(10.0, k / 11.0);
    thetas.push_back(t);
    dplus.push_back(std::abs(det(psi_matrix(c.pair.plus.spec(), t))));
    dminus.push_back(std::abs(det(psi_matrix(c.pair.minus.spec(), t))));
    dbond.push_back(std::abs(det(psi_matrix(c.bond, t))));
  }
  CHECK(log_log_slope(thetas, dplus) == doctest::Approx(1.0).epsilon(0.1));
  CHECK(log_log_slope(thetas, dminus) == doctest::Approx(1.0).epsilon(0.1));
  CHECK(log_log_slope(thetas, dbond) == doctest::Approx(2.0).epsilon(0.05));
  CHECK_THROWS_AS(log_log_slope({1.0}, {1.0}), ValidationError);
  CHECK_THROWS_AS(log_log_slope({1.0, 1.0}, {0.0, 1.0}), ValidationError);
}

TEST_CASE("uniqueness classification reads the pair structure") {
  {
    const SubordinatorPair pr = gen_double_exp(sample_double_exp_params(1));
    const UniquenessClass c = classify_uniqueness(pr.plus, pr.minus);
    CHECK(c.A0);
    CHECK(c.A1);
    CHECK(c.A_inf);     // both families run strictly positive drifts
    CHECK_FALSE(c.A_ll);  // switching atoms are part of the construction
    CHECK(c.irreducible);
    CHECK_FALSE(c.killed);
    CHECK_FALSE(c.reasons.empty());

    const std::string js = to_json_text(c);
    const auto j = nlohmann::json::parse(js);
    CHECK(j.at("A0").get<bool>());
    CHECK(j.at("A1").get<bool>());
    CHECK_FALSE(j.at("killed").get<bool>());
    CHECK(j.at("reasons").is_array());
  }
  {
    // turning the drifts off leaves driftless compound Poisson phases whose
    // switch laws carry atoms: the absolute-continuity branch must fail
    const SubordinatorPair pr = gen_double_exp(sample_double_exp_params(1));
    MapSpec flat = pr.plus.spec();
    for (auto& comp : flat.components) comp.center = 0.0;
    const UniquenessClass c =
        classify_uniqueness(MapSubordinatorSpec(std::move(flat)), pr.minus);
    CHECK_FALSE(c.A1);
    CHECK_FALSE(c.A_inf);
    bool mentioned = false;
    for (const std::string& r : c.reasons)
      if (r.find("driftless compound Poisson") != std::string::npos)
        mentioned = true;
    CHECK(mentioned);
  }
  {
    // disconnected modulator
    MapSpec s;
    s.n = 2;
    s.kind = SpecKind::subordinator;
    s.pi = {0.5, 0.5};
    s.Q = {0.0, 0.0, 0.0, 0.0};
    PhaseComponent c0;
    c0.center = 1.0;
    s.components = {c0, c0};
    s.trans = default_trans(2);
    const MapSubordinatorSpec h(std::move(s));
    const UniquenessClass c = classify_uniqueness(h, h);
    CHECK_FALSE(c.irreducible);
    CHECK_FALSE(c.A0);
    CHECK(c.A_inf);
  }
}

TEST_CASE("renewal probe recovers the stationary drift limit") {
  {
    // one-phase pure drift: z (d z)^{-1} = 1/d with no z-dependence at all
    const RenewalProbe p = markov_renewal_probe(pure_drift_one_phase(2.0));
    REQUIRE(p.limit.size() == 1);
    CHECK(p.limit[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(p.max_abs_error <= 1e-10);
  }
  for (int fam = 0; fam < 2; ++fam) {
    CAPTURE(fam);
    const SubordinatorPair pr =
        fam == 0 ? gen_double_exp(sample_double_exp_params(1))
                 : gen_spectrally_positive(sample_spectrally_positive_params(1));
    const RenewalProbe p = markov_renewal_probe(pr.plus);
    CHECK(p.max_abs_error <= 1e-4);
    // rows of the limit agree: the starting phase washes out
    REQUIRE(p.limit.size() == 4);
    CHECK(p.limit[0] == doctest::Approx(p.limit[2]).epsilon(1e-6));
    CHECK(p.limit[1] == doctest::Approx(p.limit[3]).epsilon(1e-6));
  }
  {
    MapSpec s = gen_double_exp(sample_double_exp_params(1)).plus.spec();
    s.components[0].kill = 0.1;
    CHECK_THROWS_WITH_AS(markov_renewal_probe(MapSubordinatorSpec(std::move(s))),
                         doctest::Contains("unkilled"), ValidationError);
  }
  CHECK_THROWS_AS(
      markov_renewal_probe(pure_drift_one_phase(1.0), {1e-1}),
      ValidationError);
}

TEST_CASE("generated friendships keep the residual inside tolerance") {
  const std::vector<double> grid = uniform_grid(-50.0, 50.0, 101);
  for (std::uint64_t seed = 10; seed < 16; ++seed) {
    CAPTURE(seed);
    const BondedCase de = bonded_double_exp(seed);
    CHECK(wh_residual(de.bond, de.pair.plus, de.pair.minus, de.pair.pi, grid)
              .max_residual <= 1e-9);
    const BondedCase sp = bonded_spectrally_positive(seed);
    CHECK(wh_residual(sp.bond, sp.pair.plus, sp.pair.minus, sp.pair.pi, grid)
              .max_residual <= 1e-9);
  }
}
