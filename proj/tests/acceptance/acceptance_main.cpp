// Acceptance gate: runs every criterion and prints one pass/fail line each.
// Non-zero exit on any failure.

#include <cstdlib>
#include <iostream>
#include <string>

#include "vcml/acceptance.hpp"

int main(int argc, char** argv) {
  vcml::AcceptanceConfig config;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--seed" && i + 1 < argc) {
      config.master_seed = std::strtoull(argv[++i], nullptr, 10);
    } else if (arg == "--workers" && i + 1 < argc) {
      config.workers = static_cast<unsigned>(std::atoi(argv[++i]));
    } else if (arg == "--only" && i + 1 < argc) {
      config.only.push_back(std::atoi(argv[++i]));
    } else {
      std::cerr << "usage: acceptance_tests [--seed N] [--workers N] [--only ID ...]\n";
      return 2;
    }
  }
  const auto report = vcml::run_acceptance(config, &std::cout);
  std::cout << (report.all_passed() ? "ACCEPTANCE: all criteria passed"
                                    : "ACCEPTANCE: FAILURES present")
            << "\n";
  return report.all_passed() ? 0 : 1;
}
