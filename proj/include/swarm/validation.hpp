#ifndef SWARM_VALIDATION_HPP
#define SWARM_VALIDATION_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace swarm {

struct CheckResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct Check {
  int id;
  std::string name;
  std::function<CheckResult(std::uint64_t seed)> run;
};

/// The acceptance checks in order; each is deterministic given the seed.
const std::vector<Check>& acceptance_checks();

/// Runs the selected checks (all when `only` is empty), printing one line per
/// check to `log` if given. Exceptions inside a check count as failures.
std::vector<CheckResult> run_acceptance(const std::vector<int>& only, std::uint64_t seed,
                                        std::ostream* log);

std::string format_result(const CheckResult& r);

}  // namespace swarm

#endif  // SWARM_VALIDATION_HPP
