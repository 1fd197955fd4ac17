#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "biaslens/error.hpp"
#include "biaslens/metrics.hpp"
#include "biaslens/rng.hpp"
#include "support/oracles.hpp"

using namespace biaslens;

TEST_CASE("balanced accuracy on the worked confusion example") {
  const std::vector<std::uint8_t> y{1, 1, 0, 0};
  SUBCASE("perfect predictions") { CHECK(balanced_accuracy(y, y) == 1.0); }
  SUBCASE("all-positive predictions") {
    const std::vector<std::uint8_t> yhat{1, 1, 1, 1};
    CHECK(balanced_accuracy(y, yhat) == 0.5);
  }
  SUBCASE("one missed positive") {
    const std::vector<std::uint8_t> yhat{1, 0, 0, 0};
    CHECK(balanced_accuracy(y, yhat) == doctest::Approx(0.75));
  }
  SUBCASE("single-class truth is rejected") {
    const std::vector<std::uint8_t> ones{1, 1, 1, 1};
    CHECK_THROWS_AS(balanced_accuracy(ones, y), Error);
  }
}

TEST_CASE("groupwise TPR counts per group") {
  //               a+  a+  d+  d+  d-  a-
  const std::vector<std::uint8_t> y{1, 1, 1, 1, 0, 0};
  const std::vector<std::uint8_t> s{1, 1, 0, 0, 0, 1};
  const std::vector<std::uint8_t> yhat{1, 1, 1, 0, 0, 0};
  const auto [tpr_a, tpr_d] = groupwise_tpr(y, yhat, s);
  CHECK(tpr_a == 1.0);
  CHECK(tpr_d == 0.5);

  SUBCASE("perfect predictor gives (1, 1)") {
    const auto [a, d] = groupwise_tpr(y, y, s);
    CHECK(a == 1.0);
    CHECK(d == 1.0);
  }
  SUBCASE("group without positives raises the typed error") {
    const std::vector<std::uint8_t> y2{1, 1, 0, 0, 0, 0};
    const std::vector<std::uint8_t> s2{1, 1, 0, 0, 0, 1};
    try {
      groupwise_tpr(y2, yhat, s2);
      FAIL("expected NoPositivesInGroup");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::no_positives_in_group);
    }
  }
}

TEST_CASE("demographic parity compares acceptance rates and ignores y") {
  const std::vector<std::uint8_t> s{1, 1, 1, 1, 0, 0, 0, 0};
  SUBCASE("a accepts 3/4 and d accepts 1/4") {
    const std::vector<std::uint8_t> yhat{1, 1, 1, 0, 1, 0, 0, 0};
    CHECK(demographic_parity(yhat, s) == doctest::Approx(0.5));
  }
  SUBCASE("equal acceptance is zero") {
    const std::vector<std::uint8_t> yhat{1, 0, 1, 0, 1, 0, 1, 0};
    CHECK(demographic_parity(yhat, s) == 0.0);
  }
  SUBCASE("all accepted is zero") {
    const std::vector<std::uint8_t> yhat(8, 1);
    CHECK(demographic_parity(yhat, s) == 0.0);
  }
  SUBCASE("missing group raises") {
    const std::vector<std::uint8_t> all_a(8, 1);
    const std::vector<std::uint8_t> yhat(8, 1);
    CHECK_THROWS_AS(demographic_parity(yhat, all_a), Error);
  }
}

TEST_CASE("equal opportunity is the TPR difference and is antisymmetric") {
  const std::vector<std::uint8_t> y{1, 1, 1, 1, 0, 0};
  const std::vector<std::uint8_t> s{1, 1, 0, 0, 0, 1};
  const std::vector<std::uint8_t> yhat{1, 1, 1, 0, 0, 0};
  CHECK(equal_opportunity(y, yhat, s) == doctest::Approx(0.5));
  CHECK(equal_opportunity(y, y, s) == 0.0);

  std::vector<std::uint8_t> swapped(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) swapped[i] = 1 - s[i];
  CHECK(equal_opportunity(y, yhat, swapped) == doctest::Approx(-0.5));
}

TEST_CASE("prediction quality parity uses per-group balanced accuracy") {
  //               group a: 2+ 2-, perfect;  group d: 2+ 2-, all-positive
  const std::vector<std::uint8_t> y{1, 1, 0, 0, 1, 1, 0, 0};
  const std::vector<std::uint8_t> s{1, 1, 1, 1, 0, 0, 0, 0};
  const std::vector<std::uint8_t> yhat{1, 1, 0, 0, 1, 1, 1, 1};
  CHECK(prediction_quality_parity(y, yhat, s) == doctest::Approx(0.5));
  CHECK(prediction_quality_parity(y, y, s) == 0.0);

  SUBCASE("group lacking a class raises") {
    const std::vector<std::uint8_t> y2{1, 1, 0, 0, 1, 1, 1, 1};
    try {
      prediction_quality_parity(y2, yhat, s);
      FAIL("expected MissingClassInGroup");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::missing_class_in_group);
    }
  }
}

TEST_CASE("pqp stays within [-1, 1] on random instances") {
  rng::Engine eng(50);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 8 + eng.uniform_below(40);
    std::vector<std::uint8_t> y(n), s(n), yhat(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = eng.uniform01() < 0.5;
      s[i] = eng.uniform01() < 0.5;
      yhat[i] = eng.uniform01() < 0.5;
    }
    try {
      const double v = prediction_quality_parity(y, yhat, s);
      CHECK(v >= -1.0);
      CHECK(v <= 1.0);
    } catch (const Error&) {
      // degenerate draw; the typed error is the contract
    }
  }
}

TEST_CASE("auc matches the worked ranking examples") {
  SUBCASE("perfect ranking") {
    const std::vector<double> scores{0.9, 0.8, 0.2, 0.1};
    const std::vector<std::uint8_t> labels{1, 1, 0, 0};
    CHECK(auc(scores, labels) == 1.0);
  }
  SUBCASE("constant scores give 0.5 by the tie convention") {
    const std::vector<double> scores{0.3, 0.3, 0.3, 0.3};
    const std::vector<std::uint8_t> labels{1, 0, 1, 0};
    CHECK(auc(scores, labels) == 0.5);
  }
  SUBCASE("two of four pairs ranked correctly") {
    const std::vector<double> scores{0.7, 0.2, 0.4, 0.6};
    const std::vector<std::uint8_t> labels{1, 1, 0, 0};
    CHECK(auc(scores, labels) == 0.5);
  }
  SUBCASE("single-class input is rejected") {
    const std::vector<double> scores{0.1, 0.2};
    const std::vector<std::uint8_t> labels{1, 1};
    CHECK_THROWS_AS(auc(scores, labels), Error);
  }
}

TEST_CASE("rank-based auc equals the brute-force pairwise value exactly") {
  rng::Engine eng(61);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 5 + eng.uniform_below(60);
    std::vector<double> scores(n);
    std::vector<std::uint8_t> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      // Coarse grid of score values forces plenty of ties.
      scores[i] = static_cast<double>(eng.uniform_below(8)) / 7.0;
      labels[i] = eng.uniform01() < 0.5;
    }
    labels[0] = 1;
    labels[1] = 0;
    CHECK(auc(scores, labels) == oracles::brute_force_auc(scores, labels));
  }
}

TEST_CASE("auc is invariant under strictly increasing transforms") {
  rng::Engine eng(67);
  std::vector<double> scores(50);
  std::vector<std::uint8_t> labels(50);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    scores[i] = eng.normal();
    labels[i] = eng.uniform01() < 0.4;
  }
  labels[0] = 1;
  labels[1] = 0;
  auto transformed = scores;
  for (auto& v : transformed) v = std::exp(0.5 * v) + 3.0;
  CHECK(auc(scores, labels) == auc(transformed, labels));
}

TEST_CASE("xauc over the whole population reduces to auc") {
  rng::Engine eng(71);
  std::vector<double> scores(40);
  std::vector<std::uint8_t> labels(40), s(40, 1);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    scores[i] = eng.uniform01();
    labels[i] = eng.uniform01() < 0.5;
  }
  labels[0] = 1;
  labels[1] = 0;
  CHECK(xauc(scores, labels, s, 1, 1) == auc(scores, labels));
}

TEST_CASE("xauc hand case: a-positives {0.9, 0.4} vs d-negative {0.5}") {
  const std::vector<double> scores{0.9, 0.4, 0.5};
  const std::vector<std::uint8_t> labels{1, 1, 0};
  const std::vector<std::uint8_t> s{1, 1, 0};
  CHECK(xauc(scores, labels, s, 1, 0) == 0.5);
}

TEST_CASE("xauc is 1 when every a-positive outranks every d-negative") {
  const std::vector<double> scores{0.9, 0.8, 0.3, 0.2};
  const std::vector<std::uint8_t> labels{1, 1, 0, 0};
  const std::vector<std::uint8_t> s{1, 1, 0, 0};
  CHECK(xauc(scores, labels, s, 1, 0) == 1.0);
}

TEST_CASE("xauc matches its brute-force oracle on random instances") {
  rng::Engine eng(73);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 8 + eng.uniform_below(40);
    std::vector<double> scores(n);
    std::vector<std::uint8_t> labels(n), s(n);
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = static_cast<double>(eng.uniform_below(6)) / 5.0;
      labels[i] = eng.uniform01() < 0.5;
      s[i] = eng.uniform01() < 0.5;
    }
    labels[0] = 1;
    s[0] = 1;
    labels[1] = 0;
    s[1] = 0;
    CHECK(xauc(scores, labels, s, 1, 0) == oracles::brute_force_xauc(scores, labels, s, 1, 0));
  }
}

TEST_CASE("empty pair sets raise the typed error") {
  const std::vector<double> scores{0.9, 0.1};
  const std::vector<std::uint8_t> labels{1, 0};
  const std::vector<std::uint8_t> s{1, 1};
  try {
    xauc(scores, labels, s, 0, 1);
    FAIL("expected EmptyPairSet");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::empty_pair_set);
  }
}

TEST_CASE("fairness_report agrees with the individual metrics") {
  rng::Engine eng(79);
  std::vector<std::uint8_t> y(60), s(60), yhat(60);
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = eng.uniform01() < 0.5;
    s[i] = eng.uniform01() < 0.5;
    yhat[i] = eng.uniform01() < 0.5;
  }
  for (std::size_t i = 0; i < 4; ++i) {
    y[i] = i < 2;
    s[i] = i % 2;
    yhat[i] = 1;
  }
  const auto report = fairness_report(y, yhat, s);
  CHECK(report.balanced_accuracy == balanced_accuracy(y, yhat));
  CHECK(report.dp == demographic_parity(yhat, s));
  CHECK(report.eo == report.tpr_a - report.tpr_d);
  CHECK(report.pqp == prediction_quality_parity(y, yhat, s));
  // Permuting y leaves DP unchanged.
  auto y_perm = y;
  std::reverse(y_perm.begin(), y_perm.end());
  CHECK(demographic_parity(yhat, s) == report.dp);
}
