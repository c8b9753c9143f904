#include <string>

#include "doctest.h"
#include "fusioncurve/config.hpp"
#include "fusioncurve/error.hpp"

using namespace fusioncurve;

TEST_CASE("config: sections map onto the run configuration") {
  const auto cfg = parse_config(R"(
[data]
historical = h.csv
bridging = /abs/b.csv
covariates = age, bmi
markers = s1,s2
horizon = 4.5

[estimate]
folds = 3
seed = 42
grid = 1, 2.5, 4
arms = 1p,1
causes = 1,2
level = 0.9

[models]
event1 = x1,s
event2 = x2
censoring = 1

[truncation]
density_ratio = 20

[sensitivity]
rho = 0.8

[simulate]
scenarios = 1000:0, 2000:0.25
replications = 10
)",
                                "/base");
  CHECK(cfg.historical == "/base/h.csv");
  CHECK(cfg.bridging == "/abs/b.csv");
  CHECK(cfg.schema.covariates == std::vector<std::string>{"age", "bmi"});
  CHECK(cfg.schema.markers.size() == 2);
  REQUIRE(cfg.horizon.has_value());
  CHECK(*cfg.horizon == 4.5);
  CHECK(cfg.estimator.folds == 3);
  CHECK(cfg.estimator.seed == 42);
  CHECK(cfg.estimator.grid == std::vector<double>{1.0, 2.5, 4.0});
  CHECK(cfg.grid_given);
  CHECK(cfg.estimator.arms == std::vector<Arm>{Arm::Approved, Arm::Investigational});
  CHECK(cfg.estimator.causes == std::vector<int>{1, 2});
  CHECK(cfg.estimator.level == 0.9);
  CHECK(cfg.estimator.spec.event.size() == 2);
  CHECK(cfg.estimator.spec.event_spec(2).size() == 1);
  CHECK(cfg.estimator.spec.censoring.empty());
  CHECK(cfg.estimator.spec.truncation.density_ratio == 20.0);
  CHECK(cfg.estimator.sensitivity.rho == 0.8);
  REQUIRE(cfg.scenarios.size() == 2);
  CHECK(cfg.scenarios[1].n_h == 2000);
  CHECK(cfg.scenarios[1].c == 0.25);
  CHECK(cfg.study.replications == 10);
}

TEST_CASE("config: defaults") {
  const auto cfg = parse_config("");
  CHECK(cfg.estimator.folds == 5);
  CHECK(cfg.estimator.level == 0.95);
  CHECK(cfg.scenarios.size() == 16);
  CHECK(cfg.out == "fusioncurve-out");
}

TEST_CASE("config: malformed input is rejected") {
  CHECK_THROWS_AS(parse_config("[nope]\na = 1\n"), Error);
  CHECK_THROWS_AS(parse_config("[estimate]\nfolds = two\n"), Error);
  CHECK_THROWS_AS(parse_config("[estimate]\nfolds = 1\n"), Error);
  CHECK_THROWS_AS(parse_config("[estimate]\nunknown = 1\n"), Error);
  CHECK_THROWS_AS(parse_config("[estimate]\narms = 0\n"), Error);
  CHECK_THROWS_AS(parse_config("[estimate]\nlevel = 1.5\n"), Error);
  CHECK_THROWS_AS(parse_config("[simulate]\nscenarios = 1000\n"), Error);
  CHECK_THROWS_AS(parse_config("[models]\nevent = x1*\n"), Error);
}

TEST_CASE("list parsers") {
  CHECK(parse_number_list(" 1, 2.5 ,3") == std::vector<double>{1.0, 2.5, 3.0});
  CHECK(parse_number_list("").empty());
  CHECK_THROWS_AS(parse_number_list("1,x"), Error);
  CHECK(parse_arm_list("1p,1,1p") == std::vector<Arm>{Arm::Approved, Arm::Investigational});
}
