// Acceptance suite: one PASS/FAIL line per check, nonzero exit on any failure.
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "swarm/validation.hpp"

int main(int argc, char** argv) {
  std::uint64_t seed = 20240601;
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--seed" && i + 1 < argc) {
      seed = std::stoull(argv[++i]);
    } else {
      only.push_back(std::stoi(arg));
    }
  }
  const auto results = swarm::run_acceptance(only, seed, &std::cout);
  int failed = 0;
  for (const auto& r : results) failed += !r.passed;
  std::cout << results.size() - failed << "/" << results.size() << " checks passed\n";
  return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
