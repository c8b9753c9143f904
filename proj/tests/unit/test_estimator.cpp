#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "fusioncurve/error.hpp"
#include "fusioncurve/estimator.hpp"
#include "fusioncurve/simlab.hpp"

using namespace fusioncurve;

namespace {

FusedDataset small_sample(std::uint64_t seed = 7, int causes = 1) {
  auto cfg = sim::standard_config(400, 0.25, seed);
  cfg.causes = causes;
  return sim::generate(cfg);
}

EstimatorConfig base_config() {
  EstimatorConfig e;
  e.spec = sim::correct_spec();
  e.grid = {1.0, 2.0, 3.0, 4.0, 5.0};
  e.arms = {Arm::Approved, Arm::Investigational};
  e.band_draws = 400;
  return e;
}

}  // namespace

TEST_CASE("isotonic regression pools adjacent violators") {
  const std::vector<double> y{0.1, 0.3, 0.2};
  const auto fit = isotonic(y);
  REQUIRE(fit.size() == 3);
  CHECK(fit[0] == doctest::Approx(0.1));
  CHECK(fit[1] == doctest::Approx(0.25));
  CHECK(fit[2] == doctest::Approx(0.25));
  CHECK(isotonic(fit) == fit);

  const std::vector<double> down{0.5, 0.4, 0.3, 0.2};
  for (double v : isotonic(down)) CHECK(v == doctest::Approx(0.35));
}

TEST_CASE("isotonic output is nondecreasing and preserves the mean") {
  std::vector<double> y;
  for (int i = 0; i < 40; ++i) y.push_back(std::sin(0.7 * i) + 0.05 * i);
  const auto fit = isotonic(y);
  CHECK(std::is_sorted(fit.begin(), fit.end()));
  CHECK(std::accumulate(fit.begin(), fit.end(), 0.0) == doctest::Approx(std::accumulate(y.begin(), y.end(), 0.0)));
}

TEST_CASE("sensitivity map") {
  SensitivitySpec id;
  CHECK(id.identity());
  SensitivitySpec half{0.5, 0.0};
  CHECK(half.apply(0.3) == doctest::Approx(0.15).epsilon(1e-12));
  CHECK(half.derivative(0.3) == doctest::Approx(0.5).epsilon(1e-12));
  SensitivitySpec shift{1.0, 0.4};
  const double r = 0.2, h = 1e-6;
  CHECK(shift.derivative(r) == doctest::Approx((shift.apply(r + h) - shift.apply(r - h)) / (2 * h)).epsilon(1e-6));
  SensitivitySpec big{5.0, 0.0};
  CHECK(big.apply(0.6) == 1.0);
}

TEST_CASE("estimate_curve: estimates are EIF column means and the band contains the CI") {
  const auto ds = small_sample();
  auto cfg = base_config();
  const auto res = estimate_curve(ds, cfg);
  const auto& m = res.eif;
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t t = 0; t < cfg.grid.size(); ++t) {
      const auto col = m.column(a, 0, t);
      double sum = 0.0;
      for (std::size_t i = 0; i < m.rows; ++i) sum += m.at(i, col);
      const auto& p = res.curve.at(a, 0, t);
      CHECK(p.estimate == doctest::Approx(sum / static_cast<double>(m.rows)).epsilon(1e-12));
      CHECK(p.se == doctest::Approx(eif_standard_error(m, col)).epsilon(1e-12));
      CHECK(p.band_lo <= p.ci_lo);
      CHECK(p.band_hi >= p.ci_hi);
      CHECK(p.mono_band_lo <= p.mono_ci_lo + 1e-15);
      CHECK(p.mono_band_hi >= p.mono_ci_hi - 1e-15);
      CHECK(p.mono_band_lo >= 0.0);
      CHECK(p.mono_band_hi <= 1.0);
    }
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t t = 1; t < cfg.grid.size(); ++t)
      CHECK(res.curve.at(a, 0, t).mono_estimate >= res.curve.at(a, 0, t - 1).mono_estimate);
}

TEST_CASE("centered influence values have mean zero") {
  const auto ds = small_sample();
  const auto res = estimate_curve(ds, base_config());
  const auto& m = res.eif;
  for (std::size_t c = 0; c < m.columns(); ++c) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.rows; ++i) s += m.centered(i, c);
    CHECK(std::abs(s / static_cast<double>(m.rows)) < 1e-12);
  }
}

TEST_CASE("results do not depend on the thread count or the kernel flavour") {
  const auto ds = small_sample(9);
  auto cfg = base_config();
  cfg.serial = true;
  const auto ref = estimate_curve(ds, cfg);
  for (int threads : {1, 3}) {
    cfg.serial = false;
    cfg.threads = threads;
    const auto res = estimate_curve(ds, cfg);
    REQUIRE(res.curve.points.size() == ref.curve.points.size());
    for (std::size_t i = 0; i < ref.curve.points.size(); ++i) {
      CHECK(res.curve.points[i].estimate == ref.curve.points[i].estimate);
      CHECK(res.curve.points[i].band_lo == ref.curve.points[i].band_lo);
      CHECK(res.curve.points[i].band_hi == ref.curve.points[i].band_hi);
    }
    CHECK(res.eif.values == ref.eif.values);
  }
}

TEST_CASE("sensitivity: identity leaves results bitwise unchanged, rho scales estimate and SE") {
  const auto ds = small_sample();
  auto cfg = base_config();
  const auto ref = estimate_curve(ds, cfg);
  cfg.sensitivity = {1.0, 0.0};
  const auto same = estimate_curve(ds, cfg);
  for (std::size_t i = 0; i < ref.curve.points.size(); ++i) {
    CHECK(same.curve.points[i].estimate == ref.curve.points[i].estimate);
    CHECK(same.curve.points[i].ci_lo == ref.curve.points[i].ci_lo);
    CHECK(same.curve.points[i].band_hi == ref.curve.points[i].band_hi);
  }
  cfg.sensitivity = {0.5, 0.0};
  const auto half = estimate_curve(ds, cfg);
  for (std::size_t i = 0; i < ref.curve.points.size(); ++i) {
    const double r = std::clamp(ref.curve.points[i].estimate, 1e-12, 1.0 - 1e-12);
    CHECK(half.curve.points[i].estimate == doctest::Approx(0.5 * r).epsilon(1e-10));
    CHECK(half.curve.points[i].se == doctest::Approx(0.5 * ref.curve.points[i].se).epsilon(1e-10));
  }
}

TEST_CASE("relative VE arithmetic from a hand-built EIF matrix") {
  EifMatrix m({Arm::Approved, Arm::Investigational}, {1}, {1.0}, 4);
  m.kappa = 0.5;
  m.bridging = {1, 1, 0, 0};
  // column means: R1 = 0.2, R1p = 0.1
  const double a1[] = {0.3, 0.5, -0.1, 0.1};
  const double a2[] = {0.2, 0.2, 0.0, 0.0};
  for (std::size_t i = 0; i < 4; ++i) {
    m.at(i, 0) = a1[i];
    m.at(i, 1) = a2[i];
  }
  m.compute_estimates();
  const auto rv = relative_ve(m, 0, 0.95);
  REQUIRE(rv.points.size() == 1);
  const auto& p = rv.points[0];
  CHECK(p.r_approved == doctest::Approx(0.2));
  CHECK(p.r_investigational == doctest::Approx(0.1));
  CHECK(p.relve == doctest::Approx(0.5));
  CHECK(p.defined);
  CHECK_FALSE(p.degenerate);
  REQUIRE(p.se_log_rr.has_value());
  CHECK(p.ci_lo <= p.relve);
  CHECK(p.ci_hi >= p.relve);
  CHECK(p.ci_hi <= 1.0);

  // identical arms: relVE = 0, the log-relVE variance is undefined
  for (std::size_t i = 0; i < 4; ++i) m.at(i, 1) = a1[i];
  m.compute_estimates();
  const auto same = relative_ve(m, 0, 0.95);
  CHECK(same.points[0].relve == doctest::Approx(0.0));
  CHECK(same.points[0].degenerate);
  CHECK_FALSE(same.points[0].se_log_relve.has_value());
}

TEST_CASE("relative VE needs a nonzero approved-arm risk") {
  EifMatrix m({Arm::Approved, Arm::Investigational}, {1}, {1.0}, 2);
  m.bridging = {1, 0};
  m.compute_estimates();
  CHECK_THROWS_AS(relative_ve(m, 0, 0.95), Error);
}

TEST_CASE("input validation") {
  const auto ds = small_sample();
  auto cfg = base_config();
  SUBCASE("grid beyond horizon") {
    cfg.grid = {1.0, ds.horizon() + 1.0};
    try {
      estimate_curve(ds, cfg);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::GridBeyondHorizon);
    }
  }
  SUBCASE("cause out of range") {
    cfg.causes = {2};
    try {
      estimate_curve(ds, cfg);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::CauseOutOfRange);
    }
  }
  SUBCASE("placebo is not a target") {
    cfg.arms = {Arm::Placebo};
    CHECK_THROWS_AS(estimate_curve(ds, cfg), Error);
  }
}

TEST_CASE("default grid: sorted deciles of event times within the horizon") {
  const auto ds = small_sample();
  const auto g = default_grid(ds);
  CHECK(!g.empty());
  CHECK(g.size() <= 10);
  CHECK(std::is_sorted(g.begin(), g.end()));
  CHECK(std::adjacent_find(g.begin(), g.end()) == g.end());
  CHECK(g.back() <= ds.horizon());
}

TEST_CASE("stratified resample keeps every (trial, arm) cell size") {
  const auto ds = small_sample();
  const auto bs = stratified_resample(ds, 5);
  for (Trial t : {Trial::Historical, Trial::Bridging})
    for (Arm a : {Arm::Placebo, Arm::Approved, Arm::Investigational}) CHECK(bs.count(t, a) == ds.count(t, a));
  const auto again = stratified_resample(ds, 5);
  for (std::size_t i = 0; i < bs.size(); ++i) CHECK(bs[i].s == again[i].s);
}

TEST_CASE("robustness scenarios blank out the intended models") {
  const auto c = sim::correct_spec();
  const auto ma = scenario_spec(Scenario::Ma, c);
  CHECK(ma.event_spec(1).size() == c.event_spec(1).size());
  CHECK(ma.marker_bridging.size() == c.marker_bridging.size());
  CHECK(ma.arm_propensity.empty());
  CHECK(ma.censoring.empty());
  const auto mc = scenario_spec(Scenario::Mc, c);
  CHECK(mc.event_spec(1).empty());
  CHECK(mc.censoring.size() == c.censoring.size());
  CHECK(parse_scenario(to_string(Scenario::Mb)) == Scenario::Mb);
}

TEST_CASE("no-direct-effect test validates its inputs") {
  sim::NcdeDgp dgp;
  dgp.n = 300;
  const auto rows = sim::generate_ncde(dgp);
  NcdeConfig cfg;
  cfg.estimator.spec = sim::correct_spec();
  cfg.estimator.folds = 2;
  cfg.t_star = 4.0;
  cfg.bootstrap = 100;
  CHECK_THROWS_AS(ncde_test(rows, 1, sim::kAdminCensoring, cfg), Error);
  cfg.bootstrap = 200;
  cfg.t_star = 9.0;
  try {
    ncde_test(rows, 1, sim::kAdminCensoring, cfg);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::GridBeyondHorizon);
  }
  cfg.t_star = 0.01;
  cfg.min_events = 5;
  try {
    ncde_test(rows, 1, sim::kAdminCensoring, cfg);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InsufficientEvents);
  }
}
