#include <doctest.h>

#include <sstream>

#include "vcml/acceptance.hpp"

using namespace vcml;

namespace {

AcceptanceConfig fast_subset() {
  AcceptanceConfig c;
  c.only = {1, 2, 3, 9};
  c.workers = 2;
  return c;
}

}  // namespace

TEST_CASE("acceptance runner: happy path lists each criterion and passes") {
  std::ostringstream log;
  const auto report = run_acceptance(fast_subset(), &log);
  REQUIRE(report.criteria.size() == 4);
  CHECK(report.all_passed());
  for (const auto& c : report.criteria) {
    CHECK(log.str().find("criterion " + std::to_string(c.id)) != std::string::npos);
  }
  const auto j = acceptance_to_json(report);
  CHECK(j["all_passed"] == true);
  CHECK(j["criteria"].size() == 4);
}

TEST_CASE("acceptance runner: perturbing the ROI constant fails exactly that criterion") {
  auto config = fast_subset();
  config.roi.fiv_tp = 200.0;  // forced-failure fixture
  const auto report = run_acceptance(config, nullptr);
  REQUIRE(report.criteria.size() == 4);
  CHECK_FALSE(report.all_passed());
  for (const auto& c : report.criteria) {
    if (c.id == 1) {
      CHECK_FALSE(c.passed);
    } else {
      CHECK(c.passed);
    }
  }
}

TEST_CASE("acceptance runner: report is reproducible under a fixed master seed") {
  const auto a = acceptance_to_json(run_acceptance(fast_subset(), nullptr)).dump();
  const auto b = acceptance_to_json(run_acceptance(fast_subset(), nullptr)).dump();
  CHECK(a == b);
}
