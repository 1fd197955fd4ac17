#include <doctest.h>

#include <set>

#include "biaslens/rng.hpp"

using namespace biaslens;

TEST_CASE("engine is deterministic for a seed") {
  rng::Engine a(42), b(42);
  for (int i = 0; i < 1000; ++i) CHECK(a.next() == b.next());
}

TEST_CASE("derived seeds separate streams") {
  CHECK(rng::derive_seed(7, "split") != rng::derive_seed(7, "inject"));
  CHECK(rng::derive_seed(7, "split") != rng::derive_seed(8, "split"));
  CHECK(rng::derive_seed(7, "split") == rng::derive_seed(7, "split"));
}

TEST_CASE("uniform_below stays in range and hits every value") {
  rng::Engine eng(1);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const auto v = eng.uniform_below(7);
    CHECK(v < 7);
    seen.insert(v);
  }
  CHECK(seen.size() == 7);
}

TEST_CASE("uniform01 lies in [0,1)") {
  rng::Engine eng(3);
  for (int i = 0; i < 1000; ++i) {
    const double v = eng.uniform01();
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
  }
}

TEST_CASE("normal samples have roughly unit variance") {
  rng::Engine eng(5);
  double sum = 0.0, sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double v = eng.normal();
    sum += v;
    sq += v * v;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  CHECK(std::abs(mean) < 0.03);
  CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("sample_positions returns sorted distinct positions") {
  rng::Engine eng(9);
  const auto picked = eng.sample_positions(100, 30);
  REQUIRE(picked.size() == 30);
  for (std::size_t i = 0; i + 1 < picked.size(); ++i) CHECK(picked[i] < picked[i + 1]);
  CHECK(picked.back() < 100);

  CHECK(eng.sample_positions(5, 5).size() == 5);
  CHECK(eng.sample_positions(5, 9).size() == 5);
  CHECK(eng.sample_positions(5, 0).empty());
}
