#include <cmath>
#include <string>

#include "doctest.h"
#include "fusioncurve/error.hpp"
#include "fusioncurve/toy.hpp"

using namespace fusioncurve;

namespace {
std::string toy_path(const std::string& name) { return std::string(FUSIONCURVE_TOYS) + "/" + name + ".json"; }
}  // namespace

TEST_CASE("point-mass derivative matches the influence function on the shipped toys") {
  for (const char* name : {"no_censoring", "censoring", "competing", "constant_outcome"}) {
    CAPTURE(name);
    const auto toy = DiscreteToyModel::load(toy_path(name));
    const auto rep = gateaux_check(toy);
    CAPTURE(rep.worst.cell);
    CAPTURE(to_string(rep.worst.form));
    CAPTURE(rep.worst.numeric);
    CAPTURE(rep.worst.closed_form);
    CHECK(rep.comparisons > 0);
    CHECK(rep.max_error < 1e-6);
  }
}
