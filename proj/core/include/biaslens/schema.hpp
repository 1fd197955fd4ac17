#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "biaslens/csv.hpp"

namespace biaslens {

enum class ColumnRole { feature, target, sensitive, ignored };
enum class ColumnKind { numeric, categorical };

const char* role_name(ColumnRole r);
const char* kind_name(ColumnKind k);
ColumnRole role_from_name(const std::string& s);
ColumnKind kind_from_name(const std::string& s);

/// Matches raw cell values against a declared value set. The spec string is
/// either a "|"-separated list of literals or a numeric predicate
/// (">25", ">=1", "<0.5", "<=25").
class ValueMatcher {
 public:
  ValueMatcher() = default;
  static ValueMatcher parse(const std::string& spec);
  bool matches(const std::string& raw) const;
  const std::string& spec() const { return spec_; }
  /// Canonical literal for writing a value of this class back to a cell.
  /// Numeric predicates have no literal; first alternative otherwise.
  std::optional<std::string> representative() const;

 private:
  enum class Op { any_of, gt, ge, lt, le };
  Op op_ = Op::any_of;
  double threshold_ = 0.0;
  std::vector<std::string> literals_;
  std::string spec_;
};

struct ColumnSpec {
  std::string name;
  ColumnRole role = ColumnRole::feature;
  ColumnKind kind = ColumnKind::categorical;
  std::string positive_value;       // target only
  std::string negative_value;       // target only, optional; empty = complement
  std::string advantaged_value;     // sensitive only
  std::string disadvantaged_value;  // sensitive only, optional; empty = complement
};

std::vector<ColumnSpec> schema_from_json_file(const std::string& path);
std::vector<ColumnSpec> schema_from_json_text(const std::string& text);
std::string schema_to_json_text(const std::vector<ColumnSpec>& schema);
void schema_to_json_file(const std::vector<ColumnSpec>& schema, const std::string& path);

bool is_missing_value(const std::string& raw);

/// Immutable table of raw cells plus the binary target/sensitive encodings
/// derived from the schema. Construction validates every invariant; all
/// accessors are const so instances can be shared freely across threads.
class TabularDataset {
 public:
  static TabularDataset create(std::vector<ColumnSpec> schema, std::vector<csv::Row> rows);

  const std::vector<ColumnSpec>& schema() const { return schema_; }
  std::size_t n() const { return rows_.size(); }
  const std::vector<csv::Row>& rows() const { return rows_; }
  const std::string& cell(std::size_t row, std::size_t col) const { return rows_[row][col]; }

  std::size_t target_col() const { return target_col_; }
  std::size_t sensitive_col() const { return sensitive_col_; }

  /// 1 = positive target, per row.
  const std::vector<std::uint8_t>& y() const { return y_; }
  /// 1 = advantaged group, per row.
  const std::vector<std::uint8_t>& s() const { return s_; }

  std::vector<std::size_t> feature_columns() const;

  /// Prevalence of the advantaged group, Pr(s=a).
  double advantaged_share() const;

  /// Returns a copy with the target cell of the given rows set to the
  /// negative class. Used by label-flip injection.
  TabularDataset with_flipped_targets(const std::vector<std::size_t>& row_indices) const;

  /// Returns a copy with an extra numeric feature column appended.
  TabularDataset with_numeric_column(const std::string& name, const std::vector<double>& values) const;

  /// Returns a copy restricted to the named feature columns removed.
  TabularDataset without_columns(const std::vector<std::string>& names) const;

  /// Returns a copy containing only the given rows, in the given order.
  TabularDataset select_rows(std::span<const std::size_t> indices) const;

  /// Canonical raw literal for the negative target class.
  const std::string& negative_target_literal() const { return negative_literal_; }

 private:
  TabularDataset() = default;
  void derive_binary_columns();

  std::vector<ColumnSpec> schema_;
  std::vector<csv::Row> rows_;
  std::size_t target_col_ = 0;
  std::size_t sensitive_col_ = 0;
  std::vector<std::uint8_t> y_;
  std::vector<std::uint8_t> s_;
  std::string negative_literal_;
};

struct LoadReport {
  std::size_t rows_read = 0;
  std::size_t rows_rejected = 0;  // missing target or sensitive value
};

/// Reads a CSV with header row and validates it against the schema. Rows with
/// a missing target or sensitive value are dropped and counted in the report.
TabularDataset load_csv(const std::string& path, const std::vector<ColumnSpec>& schema,
                        LoadReport* report = nullptr);

void save_csv(const TabularDataset& dataset, const std::string& path);

}  // namespace biaslens
