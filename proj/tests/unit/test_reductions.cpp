#include <cmath>
#include <vector>

#include "doctest.h"
#include "fusioncurve/eif.hpp"
#include "fusioncurve/simlab.hpp"

using namespace fusioncurve;

namespace {

// Oracle with the censoring survival replaced by one.
class NoCensoring final : public Nuisance {
 public:
  explicit NoCensoring(const Nuisance& inner) : inner_(inner) {}
  int causes() const override { return inner_.causes(); }
  double kappa() const override { return inner_.kappa(); }
  Truncation truncation() const override { return inner_.truncation(); }
  double prob_bridging(std::span<const double> x) const override { return inner_.prob_bridging(x); }
  double prob_historical_approved(std::span<const double> x) const override {
    return inner_.prob_historical_approved(x);
  }
  double prob_arm_bridging(Arm a, std::span<const double> x) const override { return inner_.prob_arm_bridging(a, x); }
  double marker_density(std::span<const double> s, std::span<const double> x, Trial t, Arm a) const override {
    return inner_.marker_density(s, x, t, a);
  }
  MarkerNodes marker_nodes(std::span<const double> x, Arm a) const override { return inner_.marker_nodes(x, a); }
  EventCurve event_curve(std::span<const double> x, std::span<const double> s) const override {
    return inner_.event_curve(x, s);
  }
  double censoring_survival_before(double, std::span<const double>, std::span<const double>) const override {
    return 1.0;
  }

 private:
  const Nuisance& inner_;
};

std::shared_ptr<const Nuisance> full_fit(const FusedDataset& ds) {
  std::vector<std::size_t> all(ds.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return std::make_shared<FittedNuisance>(ds.records(), all, ds.kappa(), ds.causes(), sim::correct_spec());
}

}  // namespace

TEST_CASE("competing form with one cause equals the censored form") {
  auto cfg = sim::standard_config(200, 0.25, 21);
  const auto ds = sim::generate(cfg);
  const auto nu = full_fit(ds);
  for (double t : {1.0, 3.0, 5.0})
    for (const auto& r : ds.records())
      for (Arm a : {Arm::Approved, Arm::Investigational})
        CHECK(eif_competing_row(*nu, r, a, t, 1) == doctest::Approx(eif_censored_row(*nu, r, a, t)).epsilon(1e-10));
}

TEST_CASE("without censoring before t the censored form equals the complete form") {
  auto cfg = sim::standard_config(200, 0.0, 22);
  const auto ds = sim::generate(cfg);
  const sim::OracleNuisance oracle(cfg);
  const NoCensoring nu(oracle);
  const double t = 2.0;
  std::size_t compared = 0;
  for (const auto& r : ds.records()) {
    if (r.historical() && *r.delta == 0 && *r.time < t) continue;
    ++compared;
    for (Arm a : {Arm::Approved, Arm::Investigational})
      CHECK(eif_censored_row(nu, r, a, t) == doctest::Approx(eif_complete_row(nu, r, a, t)).epsilon(1e-10));
  }
  CHECK(compared > 100);
}

TEST_CASE("cause-specific plug-ins and EIF means add up to the all-cause values") {
  auto cfg = sim::standard_config(300, 0.25, 23);
  cfg.causes = 2;
  const auto ds = sim::generate(cfg);
  const auto nu = full_fit(ds);
  for (Arm a : {Arm::Approved, Arm::Investigational})
    for (double t : {1.5, 4.0}) {
      const auto rep = check_sum_to_allcause(*nu, ds, a, t);
      CAPTURE(rep.plugin_sum);
      CAPTURE(rep.allcause_plugin);
      CAPTURE(rep.eif_sum);
      CAPTURE(rep.allcause_eif_mean);
      CHECK(rep.pass);
    }
}
