#include "biaslens/split.hpp"

#include <algorithm>
#include <cmath>

#include "biaslens/error.hpp"
#include "biaslens/rng.hpp"

namespace biaslens {

namespace {

constexpr std::size_t kParts = 3;

// Largest-remainder allocation of n items to the three parts; every part is
// within one item of fraction * n.
std::array<std::size_t, kParts> allocate(std::size_t n, const std::array<double, 3>& fractions) {
  std::array<std::size_t, kParts> counts{};
  std::array<double, kParts> remainders{};
  std::size_t assigned = 0;
  for (std::size_t p = 0; p < kParts; ++p) {
    const double target = fractions[p] * static_cast<double>(n);
    counts[p] = static_cast<std::size_t>(std::floor(target));
    remainders[p] = target - std::floor(target);
    assigned += counts[p];
  }
  std::array<std::size_t, kParts> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainders[a] > remainders[b]; });
  for (std::size_t i = 0; assigned < n; ++i, ++assigned) counts[order[i % kParts]]++;
  return counts;
}

}  // namespace

SplitIndices stratified_split(const TabularDataset& dataset, std::array<double, 3> fractions,
                              std::uint64_t seed) {
  double total = fractions[0] + fractions[1] + fractions[2];
  if (fractions[0] <= 0 || fractions[1] <= 0 || fractions[2] <= 0 || std::abs(total - 1.0) > 1e-9) {
    fail(Errc::invalid_argument, "split fractions must be positive and sum to 1");
  }

  SplitIndices out;
  out.seed = seed;

  // Stratum key: 2*y + s, giving the four (y, s) cells.
  std::array<std::vector<std::size_t>, 4> strata;
  for (std::size_t i = 0; i < dataset.n(); ++i) {
    strata[2 * dataset.y()[i] + dataset.s()[i]].push_back(i);
  }

  std::vector<std::size_t> leftover;  // rows from too-small strata
  static const char* kStratumNames[4] = {"y=0,s=d", "y=0,s=a", "y=1,s=d", "y=1,s=a"};
  for (std::size_t k = 0; k < strata.size(); ++k) {
    auto& members = strata[k];
    if (members.empty()) continue;
    if (members.size() < kParts) {
      out.warnings.push_back(std::string("stratum (") + kStratumNames[k] +
                             ") has fewer rows than parts; assigned without stratification");
      leftover.insert(leftover.end(), members.begin(), members.end());
      continue;
    }
    rng::Engine eng(rng::derive_seed(seed, std::string("split/stratum/") + std::to_string(k)));
    eng.shuffle(members);
    const auto counts = allocate(members.size(), fractions);
    std::size_t pos = 0;
    for (std::size_t i = 0; i < counts[0]; ++i) out.train.push_back(members[pos++]);
    for (std::size_t i = 0; i < counts[1]; ++i) out.validation.push_back(members[pos++]);
    for (std::size_t i = 0; i < counts[2]; ++i) out.test.push_back(members[pos++]);
  }

  if (!leftover.empty()) {
    rng::Engine eng(rng::derive_seed(seed, "split/leftover"));
    eng.shuffle(leftover);
    const auto counts = allocate(leftover.size(), fractions);
    std::size_t pos = 0;
    for (std::size_t i = 0; i < counts[0]; ++i) out.train.push_back(leftover[pos++]);
    for (std::size_t i = 0; i < counts[1]; ++i) out.validation.push_back(leftover[pos++]);
    for (std::size_t i = 0; i < counts[2]; ++i) out.test.push_back(leftover[pos++]);
  }

  std::sort(out.train.begin(), out.train.end());
  std::sort(out.validation.begin(), out.validation.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

}  // namespace biaslens
