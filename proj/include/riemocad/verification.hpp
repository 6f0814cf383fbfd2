#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace riemocad {

struct CheckResult {
  std::string name;
  bool passed = false;
  double worst = 0.0;  // largest observed error (or violation count)
  double tolerance = 0.0;
};

/// Property checks on `seeds` random instances each: decomposition
/// identities, Stiefel gradients, ILS enumeration against a box scan, and the
/// cost bound sandwich.
std::vector<CheckResult> run_verification(int seeds, std::uint64_t base_seed = 7);

}  // namespace riemocad
