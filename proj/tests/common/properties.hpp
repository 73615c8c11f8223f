#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "afkan/data.hpp"

namespace afkan::testing {

struct PropertyResult {
  std::string name;
  bool ok = false;
  std::string detail;
};

// Class-dependent blobs in [0, 1]; learnable by every variant within an epoch.
Dataset synthetic_dataset(std::size_t n, std::size_t features, std::size_t classes,
                          std::uint64_t seed);

PropertyResult softmax_normalization(std::uint64_t seed);
PropertyResult l2mm_range(std::uint64_t seed);
PropertyResult partition_of_unity(std::uint64_t seed);
PropertyResult phase_gap_identity();
PropertyResult batching_round_trip(std::uint64_t seed);
PropertyResult run_determinism(std::uint64_t seed);

// The six suites above, in that order.
std::vector<PropertyResult> run_properties(std::uint64_t seed = 7);

}  // namespace afkan::testing
