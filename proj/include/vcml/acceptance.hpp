#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "vcml/common.hpp"
#include "vcml/metrics.hpp"

namespace vcml {

struct AcceptanceConfig {
  std::uint64_t master_seed = 20172;
  unsigned workers = 0;          // 0: hardware concurrency
  std::vector<int> only;         // run a subset of criterion ids when non-empty
  RoiParams roi;                 // criterion 1 constants (perturbable as a negative control)
  std::size_t fusion_n = 10000;  // criterion 8 dataset size
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
};

struct AcceptanceReport {
  std::vector<CriterionResult> criteria;
  bool all_passed() const;
};

// Runs the acceptance criteria, printing one pass/fail line per criterion
// to `log` when given.
AcceptanceReport run_acceptance(const AcceptanceConfig& config, std::ostream* log = nullptr);

nlohmann::json acceptance_to_json(const AcceptanceReport& report);

}  // namespace vcml
