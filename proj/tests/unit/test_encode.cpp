#include <doctest.h>

#include <cmath>

#include "biaslens/encode.hpp"
#include "biaslens/error.hpp"

using namespace biaslens;

namespace {

std::vector<ColumnSpec> mixed_schema() {
  std::vector<ColumnSpec> schema;
  ColumnSpec group{.name = "group", .role = ColumnRole::sensitive, .kind = ColumnKind::categorical};
  group.advantaged_value = "a";
  schema.push_back(group);
  ColumnSpec label{.name = "label", .role = ColumnRole::target, .kind = ColumnKind::categorical};
  label.positive_value = "1";
  schema.push_back(label);
  schema.push_back({.name = "num", .role = ColumnRole::feature, .kind = ColumnKind::numeric});
  schema.push_back({.name = "cat", .role = ColumnRole::feature, .kind = ColumnKind::categorical});
  return schema;
}

}  // namespace

TEST_CASE("numeric standardization uses population stddev on the fit set") {
  // Fit values {0, 2}: mean 1, population stddev 1, so 0 encodes to -1.
  const auto dataset = TabularDataset::create(
      mixed_schema(), {{"a", "1", "0", "x"}, {"d", "0", "2", "y"}, {"a", "1", "5", "x"}});
  const std::vector<std::size_t> fit{0, 1};
  const auto encoder = Encoder::fit(dataset, fit);
  const auto matrix = encoder.transform(dataset);
  CHECK(matrix.features(0, 0) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(matrix.features(1, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(matrix.features(2, 0) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("categorical columns expand to one indicator per category") {
  const auto dataset = TabularDataset::create(
      mixed_schema(), {{"a", "1", "0", "x"}, {"d", "0", "2", "y"}, {"a", "1", "4", "x"}});
  const std::vector<std::size_t> fit{0, 1, 2};
  const auto encoder = Encoder::fit(dataset, fit);
  const auto matrix = encoder.transform(dataset);
  REQUIRE(matrix.m() == 3);  // num + {x, y}
  CHECK(matrix.feature_names[1] == "cat=x");
  CHECK(matrix.feature_names[2] == "cat=y");
  CHECK(matrix.source_names[1] == "cat");
  CHECK(matrix.features(0, 1) == 1.0);
  CHECK(matrix.features(0, 2) == 0.0);
  CHECK(matrix.features(1, 2) == 1.0);
}

TEST_CASE("unseen categories encode to the all-zeros block") {
  const auto dataset = TabularDataset::create(
      mixed_schema(), {{"a", "1", "0", "x"}, {"d", "0", "2", "y"}, {"a", "1", "4", "z"}});
  const std::vector<std::size_t> fit{0, 1};  // never sees "z"
  const auto encoder = Encoder::fit(dataset, fit);
  const auto matrix = encoder.transform(dataset);
  CHECK(matrix.features(2, 1) == 0.0);
  CHECK(matrix.features(2, 2) == 0.0);
}

TEST_CASE("standardized column has near-zero mean over its own fit set") {
  std::vector<csv::Row> rows;
  for (int i = 0; i < 57; ++i) {
    rows.push_back({i % 2 ? "a" : "d", i % 3 ? "1" : "0", std::to_string(i * 7 % 23), "x"});
  }
  const auto dataset = TabularDataset::create(mixed_schema(), rows);
  std::vector<std::size_t> fit(dataset.n());
  for (std::size_t i = 0; i < fit.size(); ++i) fit[i] = i;
  const auto matrix = Encoder::fit(dataset, fit).transform(dataset);
  double sum = 0.0;
  for (std::size_t i = 0; i < matrix.n(); ++i) sum += matrix.features(static_cast<Eigen::Index>(i), 0);
  CHECK(std::abs(sum / static_cast<double>(matrix.n())) < 1e-9);
}

TEST_CASE("constant numeric column gets stddev 1 and a warning") {
  const auto dataset =
      TabularDataset::create(mixed_schema(), {{"a", "1", "5", "x"}, {"d", "0", "5", "y"}});
  const std::vector<std::size_t> fit{0, 1};
  const auto encoder = Encoder::fit(dataset, fit);
  REQUIRE(encoder.warnings().size() == 1);
  const auto matrix = encoder.transform(dataset);
  CHECK(matrix.features(0, 0) == 0.0);  // (5 - 5) / 1
}

TEST_CASE("dataset with only target and sensitive yields an m=0 matrix") {
  std::vector<ColumnSpec> schema;
  ColumnSpec group{.name = "g", .role = ColumnRole::sensitive, .kind = ColumnKind::categorical};
  group.advantaged_value = "a";
  schema.push_back(group);
  ColumnSpec label{.name = "t", .role = ColumnRole::target, .kind = ColumnKind::categorical};
  label.positive_value = "1";
  schema.push_back(label);
  const auto dataset = TabularDataset::create(schema, {{"a", "1"}, {"d", "0"}});
  const std::vector<std::size_t> fit{0, 1};
  const auto matrix = Encoder::fit(dataset, fit).transform(dataset);
  CHECK(matrix.m() == 0);
  CHECK(matrix.n() == 2);
}

TEST_CASE("every encoded column maps back to exactly one source column") {
  const auto dataset = TabularDataset::create(
      mixed_schema(), {{"a", "1", "0", "x"}, {"d", "0", "2", "y"}, {"a", "1", "4", "z"}});
  const std::vector<std::size_t> fit{0, 1, 2};
  const auto matrix = Encoder::fit(dataset, fit).transform(dataset);
  REQUIRE(matrix.source_names.size() == matrix.m());
  for (std::size_t c = 0; c < matrix.m(); ++c) {
    bool found = false;
    for (const auto& spec : dataset.schema()) found |= spec.name == matrix.source_names[c];
    CHECK(found);
  }
}

TEST_CASE("encoder never sees rows outside the fit set") {
  auto rows = std::vector<csv::Row>{{"a", "1", "1", "x"}, {"d", "0", "3", "y"}, {"a", "0", "100", "x"}};
  const auto dataset = TabularDataset::create(mixed_schema(), rows);
  const std::vector<std::size_t> fit{0, 1};
  const auto encoder = Encoder::fit(dataset, fit);

  // Perturb the held-out row and refit on the same fit set.
  rows[2][2] = "-9999";
  rows[2][3] = "w";
  const auto perturbed = TabularDataset::create(mixed_schema(), rows);
  const auto encoder2 = Encoder::fit(perturbed, fit);

  const auto a = encoder.transform(dataset, fit);
  const auto b = encoder2.transform(perturbed, fit);
  CHECK((a.features - b.features).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("missing feature values encode to zero") {
  const auto dataset = TabularDataset::create(
      mixed_schema(), {{"a", "1", "0", "x"}, {"d", "0", "2", "y"}, {"a", "1", "?", "?"}});
  const std::vector<std::size_t> fit{0, 1};
  const auto matrix = Encoder::fit(dataset, fit).transform(dataset);
  CHECK(matrix.features(2, 0) == 0.0);  // mean-imputed then standardized
  CHECK(matrix.features(2, 1) == 0.0);
  CHECK(matrix.features(2, 2) == 0.0);
}

TEST_CASE("schema drift between fit and transform is rejected") {
  const auto dataset = TabularDataset::create(
      mixed_schema(), {{"a", "1", "0", "x"}, {"d", "0", "2", "y"}});
  const std::vector<std::size_t> fit{0, 1};
  const auto encoder = Encoder::fit(dataset, fit);
  const auto reduced = dataset.without_columns({"num"});
  CHECK_THROWS_AS(encoder.transform(reduced), Error);
}

TEST_CASE("empty fit set is rejected") {
  const auto dataset = TabularDataset::create(
      mixed_schema(), {{"a", "1", "0", "x"}, {"d", "0", "2", "y"}});
  CHECK_THROWS_AS(Encoder::fit(dataset, {}), Error);
}
