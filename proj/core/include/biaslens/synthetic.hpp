#pragma once

#include <cstdint>

#include "biaslens/schema.hpp"

namespace biaslens {

/// Controls for the synthetic benchmark generator. The generated table has a
/// binary group column, a binary outcome column, one outcome-informative
/// numeric feature, one group proxy of tunable strength, and noise features.
struct SyntheticSpec {
  std::size_t n = 1000;
  double prevalence_a = 0.5;   // Pr(group = a)
  double base_rate_a = 0.5;    // Pr(outcome positive | a)
  double base_rate_d = 0.5;    // Pr(outcome positive | d)
  double proxy_corr = 0.0;     // target Pearson correlation between proxy and group
  std::size_t noise_dim = 0;   // independent standard-normal features
};

/// Column names are fixed: "group" (sensitive, advantaged "a"), "outcome"
/// (target, positive "pos"), "signal", "proxy", "noise_<i>".
TabularDataset make_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

/// Additive-noise standard deviation that yields the requested correlation
/// between a binary column with advantaged share p and (column + noise).
double proxy_noise_std(double target_corr, double advantaged_share);

}  // namespace biaslens
