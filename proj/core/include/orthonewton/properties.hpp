#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace orthonewton {

struct PropertyOutcome {
  std::string name;
  bool passed = false;
  double measured = 0.0;   // worst value observed
  double threshold = 0.0;  // bound it is compared against
  std::string detail;
};

/// Seeded invariant checks over geometry, retractions, energy derivatives and
/// solvers. Cheap enough to run from the command line in a few seconds.
std::vector<PropertyOutcome> run_property_suite(
    std::uint64_t seed, const std::function<void(const PropertyOutcome&)>& on_result = {});

}  // namespace orthonewton
