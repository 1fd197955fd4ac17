#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "biaslens/csv.hpp"
#include "biaslens/error.hpp"
#include "biaslens/schema.hpp"

using namespace biaslens;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name, const std::string& content) {
  const fs::path path = fs::temp_directory_path() / name;
  std::ofstream out(path);
  out << content;
  return path;
}

std::vector<ColumnSpec> toy_schema() {
  std::vector<ColumnSpec> schema;
  ColumnSpec group{.name = "group", .role = ColumnRole::sensitive, .kind = ColumnKind::categorical};
  group.advantaged_value = "a";
  schema.push_back(group);
  ColumnSpec label{.name = "label", .role = ColumnRole::target, .kind = ColumnKind::categorical};
  label.positive_value = "yes";
  label.negative_value = "no";
  schema.push_back(label);
  schema.push_back({.name = "x", .role = ColumnRole::feature, .kind = ColumnKind::numeric});
  return schema;
}

}  // namespace

TEST_CASE("csv parser handles quoted fields and CRLF") {
  std::istringstream in("a,b,c\r\n1,\"x, y\",\"he said \"\"hi\"\"\"\n2,,3\n");
  const auto table = csv::read_stream(in);
  REQUIRE(table.header.size() == 3);
  REQUIRE(table.rows.size() == 2);
  CHECK(table.rows[0][1] == "x, y");
  CHECK(table.rows[0][2] == "he said \"hi\"");
  CHECK(table.rows[1][1] == "");
}

TEST_CASE("csv writer round-trips fields that need quoting") {
  const fs::path path = fs::temp_directory_path() / "biaslens_csv_rt.csv";
  csv::write_file(path.string(), {"a", "b"}, {{"x,y", "line\nbreak"}, {"\"q\"", "plain"}});
  const auto table = csv::read_file(path.string());
  CHECK(table.rows[0][0] == "x,y");
  CHECK(table.rows[0][1] == "line\nbreak");
  CHECK(table.rows[1][0] == "\"q\"");
  fs::remove(path);
}

TEST_CASE("load_csv accepts a small valid file") {
  const auto path = temp_file("biaslens_t1.csv", "group,label,x\na,yes,1\nd,no,2\n");
  const auto dataset = load_csv(path.string(), toy_schema());
  CHECK(dataset.n() == 2);
  CHECK(dataset.y()[0] == 1);
  CHECK(dataset.y()[1] == 0);
  CHECK(dataset.s()[0] == 1);
  CHECK(dataset.s()[1] == 0);
  fs::remove(path);
}

TEST_CASE("load_csv rejects undeclared target values") {
  const auto path = temp_file("biaslens_t2.csv", "group,label,x\na,maybe,1\n");
  CHECK_THROWS_WITH_AS(load_csv(path.string(), toy_schema()), doctest::Contains("UnmappableValue"),
                       Error);
  fs::remove(path);
}

TEST_CASE("load_csv drops rows with missing target or sensitive values") {
  const auto path =
      temp_file("biaslens_t3.csv", "group,label,x\na,yes,1\n?,yes,2\nd,,3\nd,no,4\n");
  LoadReport report;
  const auto dataset = load_csv(path.string(), toy_schema(), &report);
  CHECK(dataset.n() == 2);
  CHECK(report.rows_read == 4);
  CHECK(report.rows_rejected == 2);
  fs::remove(path);
}

TEST_CASE("load_csv requires the header to match the schema") {
  const auto path = temp_file("biaslens_t4.csv", "group,wrong,x\na,yes,1\n");
  CHECK_THROWS_AS(load_csv(path.string(), toy_schema()), Error);
  try {
    load_csv(path.string(), toy_schema());
  } catch (const Error& e) {
    CHECK(e.code() == Errc::missing_column);
  }
  fs::remove(path);
}

TEST_CASE("empty data file is rejected") {
  const auto path = temp_file("biaslens_t5.csv", "group,label,x\n");
  CHECK_THROWS_AS(load_csv(path.string(), toy_schema()), Error);
  fs::remove(path);
}

TEST_CASE("schema validation enforces the role/value pairing") {
  auto schema = toy_schema();
  SUBCASE("two targets") {
    schema[2].role = ColumnRole::target;
    schema[2].positive_value = "1";
    CHECK_THROWS_AS(TabularDataset::create(schema, {{"a", "yes", "1"}}), Error);
  }
  SUBCASE("positive_value on a feature") {
    schema[2].positive_value = "1";
    CHECK_THROWS_AS(TabularDataset::create(schema, {{"a", "yes", "1"}}), Error);
  }
  SUBCASE("no sensitive column") {
    schema[0].role = ColumnRole::feature;
    schema[0].advantaged_value.clear();
    CHECK_THROWS_AS(TabularDataset::create(schema, {{"a", "yes", "1"}}), Error);
  }
}

TEST_CASE("numeric predicates map a threshold sensitive column") {
  std::vector<ColumnSpec> schema;
  ColumnSpec age{.name = "age", .role = ColumnRole::sensitive, .kind = ColumnKind::numeric};
  age.advantaged_value = ">25";
  age.disadvantaged_value = "<=25";
  schema.push_back(age);
  ColumnSpec label{.name = "ok", .role = ColumnRole::target, .kind = ColumnKind::categorical};
  label.positive_value = "1";
  schema.push_back(label);

  const auto dataset = TabularDataset::create(schema, {{"30", "1"}, {"25", "0"}, {"19", "1"}});
  CHECK(dataset.s()[0] == 1);
  CHECK(dataset.s()[1] == 0);
  CHECK(dataset.s()[2] == 0);
}

TEST_CASE("alternative literals with | all map to the advantaged group") {
  std::vector<ColumnSpec> schema;
  ColumnSpec marital{.name = "marital", .role = ColumnRole::sensitive, .kind = ColumnKind::categorical};
  marital.advantaged_value = "Married-civ-spouse|Married-AF-spouse";
  schema.push_back(marital);
  ColumnSpec label{.name = "ok", .role = ColumnRole::target, .kind = ColumnKind::categorical};
  label.positive_value = "1";
  schema.push_back(label);

  const auto dataset = TabularDataset::create(
      schema, {{"Married-civ-spouse", "1"}, {"Married-AF-spouse", "0"}, {"Divorced", "1"}});
  CHECK(dataset.s()[0] == 1);
  CHECK(dataset.s()[1] == 1);
  CHECK(dataset.s()[2] == 0);
}

TEST_CASE("schema JSON round-trips") {
  const auto schema = toy_schema();
  const auto text = schema_to_json_text(schema);
  const auto parsed = schema_from_json_text(text);
  REQUIRE(parsed.size() == schema.size());
  for (std::size_t i = 0; i < schema.size(); ++i) {
    CHECK(parsed[i].name == schema[i].name);
    CHECK(parsed[i].role == schema[i].role);
    CHECK(parsed[i].kind == schema[i].kind);
    CHECK(parsed[i].positive_value == schema[i].positive_value);
    CHECK(parsed[i].advantaged_value == schema[i].advantaged_value);
  }
}

TEST_CASE("flipping targets rewrites the raw cell with the negative literal") {
  const auto dataset =
      TabularDataset::create(toy_schema(), {{"d", "yes", "1"}, {"d", "yes", "2"}, {"a", "no", "3"}});
  const auto flipped = dataset.with_flipped_targets({0});
  CHECK(flipped.y()[0] == 0);
  CHECK(flipped.cell(0, 1) == "no");
  // Original untouched.
  CHECK(dataset.y()[0] == 1);
  CHECK(dataset.cell(0, 1) == "yes");
}

TEST_CASE("select_rows keeps schema and order") {
  const auto dataset =
      TabularDataset::create(toy_schema(), {{"d", "yes", "1"}, {"a", "no", "2"}, {"a", "yes", "3"}});
  const std::vector<std::size_t> pick{2, 0};
  const auto subset = dataset.select_rows(pick);
  REQUIRE(subset.n() == 2);
  CHECK(subset.cell(0, 2) == "3");
  CHECK(subset.cell(1, 2) == "1");
  CHECK(subset.y()[0] == 1);
  CHECK(subset.s()[1] == 0);
}
