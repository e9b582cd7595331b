#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace lemon::data {

struct SplitIndices {
  std::vector<std::int64_t> train, val, test;
};

// Deterministic, per-category stratified split. `categories` holds one entry
// per sample; ratios must sum to 1. Categories with fewer samples than the
// number of nonzero-ratio splits go entirely to train (with a warning on
// stderr).
SplitIndices split_dataset(const std::vector<std::string>& categories,
                           const std::array<double, 3>& ratios, std::uint64_t seed);

}  // namespace lemon::data
