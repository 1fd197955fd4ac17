#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "biaslens/schema.hpp"

namespace biaslens {

/// Design matrix plus binary target/sensitive vectors. Numeric features are
/// standardized, categorical features expanded to one indicator per category.
/// The target and sensitive columns never appear among the feature columns.
struct EncodedMatrix {
  Eigen::MatrixXd features;               // n x m
  std::vector<std::uint8_t> y;            // 1 = positive
  std::vector<std::uint8_t> s;            // 1 = advantaged
  std::vector<std::string> feature_names; // encoded name, "col" or "col=category"
  std::vector<std::string> source_names;  // source column per encoded column

  std::size_t n() const { return static_cast<std::size_t>(features.rows()); }
  std::size_t m() const { return static_cast<std::size_t>(features.cols()); }

  EncodedMatrix select_rows(std::span<const std::size_t> rows) const;
  EncodedMatrix drop_columns(const std::vector<std::size_t>& cols) const;
};

/// Column statistics fitted on a designated subset of rows; transform never
/// looks at any other row's values, so validation/test leakage is impossible
/// by construction.
class Encoder {
 public:
  static Encoder fit(const TabularDataset& dataset, std::span<const std::size_t> fit_indices);

  EncodedMatrix transform(const TabularDataset& dataset) const;
  EncodedMatrix transform(const TabularDataset& dataset, std::span<const std::size_t> rows) const;

  const std::vector<std::string>& warnings() const { return warnings_; }
  std::size_t output_width() const;

 private:
  struct ColumnPlan {
    std::string name;
    ColumnKind kind = ColumnKind::numeric;
    double mean = 0.0;
    double stddev = 1.0;
    std::vector<std::string> categories;  // sorted; one indicator each
  };

  std::vector<std::string> schema_names_;
  std::vector<ColumnPlan> plans_;
  std::vector<std::string> warnings_;
};

Encoder fit_encoder(const TabularDataset& dataset, std::span<const std::size_t> fit_indices);
EncodedMatrix encode(const TabularDataset& dataset, const Encoder& encoder);

}  // namespace biaslens
