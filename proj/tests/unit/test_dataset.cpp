#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "fusioncurve/dataset.hpp"
#include "fusioncurve/error.hpp"
#include "fusioncurve/simlab.hpp"

using namespace fusioncurve;
namespace fs = std::filesystem;

namespace {

CsvSchema sample_schema() {
  CsvSchema s;
  s.covariates = {"x1", "x2", "x3", "x4", "x5", "x6"};
  return s;
}

fs::path toys(const std::string& name) { return fs::path(FUSIONCURVE_TOYS) / name; }

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

fs::path write_tmp(const std::string& name, const std::string& text) {
  const auto p = fs::temp_directory_path() / ("fusioncurve_test_" + name);
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST_CASE("arm codes") {
  CHECK(parse_arm_code("0") == Arm::Placebo);
  CHECK(parse_arm_code("1") == Arm::Approved);
  CHECK(parse_arm_code("1p") == Arm::Investigational);
  CHECK(arm_code(Arm::Investigational) == "1p");
  CHECK_THROWS_AS(parse_arm_code("2"), Error);
  CHECK(arm_allowed(Arm::Placebo, Trial::Historical));
  CHECK_FALSE(arm_allowed(Arm::Placebo, Trial::Bridging));
  CHECK_FALSE(arm_allowed(Arm::Investigational, Trial::Historical));
}

TEST_CASE("shipped sample loads with the expected counts") {
  const auto ds = load_fused_csv(toys("sample_historical.csv"), toys("sample_bridging.csv"), sample_schema());
  CHECK(ds.n_historical() == 400);
  CHECK(ds.n_bridging() == 100);
  CHECK(ds.dim() == 6);
  CHECK(ds.causes() == 1);
  CHECK(ds.horizon() == ds.max_time());
  CHECK(ds.kappa() == doctest::Approx(0.2));
}

TEST_CASE("write then load reproduces the records bitwise") {
  auto cfg = sim::standard_config(120, 0.25, 3);
  cfg.causes = 2;
  const auto ds = sim::generate(cfg);
  CsvSchema schema = sample_schema();
  schema.markers = {"s1", "s2"};
  const auto h = fs::temp_directory_path() / "fusioncurve_rt_h.csv";
  const auto b = fs::temp_directory_path() / "fusioncurve_rt_b.csv";
  write_fused_csv(ds, h, b, schema);
  const auto back = load_fused_csv(h, b, schema, ds.horizon());
  REQUIRE(back.size() == ds.size());
  CHECK(back.causes() == 2);
  std::size_t hi = 0, bi = 0;
  // historical rows come first in both
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& r = ds[i];
    const auto& q = back[i];
    CHECK(r.x == q.x);
    CHECK(r.s == q.s);
    CHECK(r.arm == q.arm);
    CHECK(r.trial == q.trial);
    CHECK(r.time == q.time);
    CHECK(r.delta == q.delta);
    (r.historical() ? hi : bi)++;
  }
  CHECK(hi == ds.n_historical());
}

TEST_CASE("load errors carry a code and name the problem") {
  const auto schema = sample_schema();
  SUBCASE("missing column") {
    try {
      load_fused_csv(fs::path(FUSIONCURVE_TEST_DATA) / "missing_x3_historical.csv", toys("sample_bridging.csv"),
                     schema);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::MissingColumn);
      CHECK(std::string(e.what()).find("x3") != std::string::npos);
    }
  }
  SUBCASE("bad arm code") {
    const auto h = write_tmp("badarm.csv", "x1,x2,x3,x4,x5,x6,arm,s,time,event\n0,0,0,0,0,0,2,1,1,1\n");
    CHECK(code_of([&] { load_fused_csv(h, toys("sample_bridging.csv"), schema); }) == ErrorCode::BadArmCode);
  }
  SUBCASE("investigational arm in the historical file") {
    const auto h = write_tmp("hist1p.csv", "x1,x2,x3,x4,x5,x6,arm,s,time,event\n0,0,0,0,0,0,1p,1,1,1\n");
    CHECK_THROWS_AS(load_fused_csv(h, toys("sample_bridging.csv"), schema), Error);
  }
  SUBCASE("non-positive time") {
    const auto h = write_tmp("t0.csv", "x1,x2,x3,x4,x5,x6,arm,s,time,event\n0,0,0,0,0,0,1,1,0,1\n");
    CHECK(code_of([&] { load_fused_csv(h, toys("sample_bridging.csv"), schema); }) == ErrorCode::NonPositiveTime);
  }
  SUBCASE("missing value") {
    const auto h = write_tmp("na.csv", "x1,x2,x3,x4,x5,x6,arm,s,time,event\n0,,0,0,0,0,1,1,1,1\n");
    CHECK(code_of([&] { load_fused_csv(h, toys("sample_bridging.csv"), schema); }) == ErrorCode::MissingValue);
  }
}

TEST_CASE("overlap trimming drops only bridging rows outside the historical box") {
  const auto ds = load_fused_csv(toys("sample_historical.csv"), toys("sample_bridging.csv"), sample_schema());
  const auto diag = overlap_report(ds);
  const auto trimmed = trim_to_overlap(ds);
  CHECK(trimmed.data.n_historical() == ds.n_historical());
  CHECK(trimmed.data.n_bridging() + trimmed.dropped == ds.n_bridging());
  CHECK(static_cast<double>(trimmed.dropped) ==
        doctest::Approx(diag.outside_any_fraction * static_cast<double>(ds.n_bridging())));
  CHECK(overlap_report(trimmed.data).outside_any_fraction == 0.0);
}
