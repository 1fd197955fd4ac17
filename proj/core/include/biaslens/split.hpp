#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "biaslens/schema.hpp"

namespace biaslens {

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;
};

/// Partitions 0..n-1 into train/validation/test, stratified on the joint
/// (target, sensitive) pair so each part mirrors the global stratum
/// proportions to within one sample. Deterministic given the seed. Strata
/// smaller than the number of parts fall back to an unstratified assignment
/// and record a warning.
SplitIndices stratified_split(const TabularDataset& dataset, std::array<double, 3> fractions,
                              std::uint64_t seed);

}  // namespace biaslens
