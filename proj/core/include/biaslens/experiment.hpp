#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "biaslens/inject.hpp"
#include "biaslens/model.hpp"
#include "biaslens/schema.hpp"
#include "biaslens/stats.hpp"

namespace biaslens {

enum class Metric { ba, dp, eo, pqp, tpr_a, tpr_d, rd, sd, sauc };

const char* metric_name(Metric m);
Metric metric_from_name(const std::string& s);

/// Which protocol a grid follows. Fairness grids inject into train/validation
/// only and evaluate hard-label metrics on the untouched test split.
/// Detection grids inject into the whole dataset and evaluate the detection
/// measures on an identically distributed evaluation part.
enum class GridMode { fairness, detection };

struct ExperimentConfig {
  std::string data_path;
  std::string schema_path;
  std::string sensitive_name;  // optional; validated against the schema
  TrainConfig model;
  BiasKind bias_axis = BiasKind::underrepresentation;
  std::vector<double> levels;
  std::optional<BiasKind> second_axis;
  std::vector<double> second_levels;
  int repetitions = 10;
  std::uint64_t base_seed = 0;
  std::array<double, 3> split_fractions{0.8, 0.1, 0.1};
  std::vector<Metric> metrics;

  std::string to_json() const;
  static ExperimentConfig from_json_text(const std::string& text);
  static ExperimentConfig from_json_file(const std::string& path);
  void validate(GridMode mode) const;
};

enum class Significance { none, p05, p01 };

struct LevelKey {
  double level1 = 0.0;
  std::optional<double> level2;
  std::string label(BiasKind axis1, std::optional<BiasKind> axis2) const;
};

struct ResultCell {
  std::vector<std::optional<double>> values;  // one slot per repetition
  std::optional<double> mean;
  std::optional<double> stddev;
  Significance significance = Significance::none;
  std::optional<double> p_value;
  std::size_t available() const;
};

struct ExperimentResult {
  std::string dataset_id;
  std::string sensitive_name;
  std::string model_name;
  BiasKind bias_axis = BiasKind::underrepresentation;
  std::optional<BiasKind> second_axis;
  std::vector<LevelKey> levels;
  std::vector<Metric> metrics;
  std::vector<std::vector<ResultCell>> cells;  // [level][metric]
  std::vector<std::uint64_t> repetition_seeds;
  double wall_time_seconds = 0.0;
  std::vector<std::string> notes;

  const ResultCell& cell(std::size_t level, Metric m) const;
};

/// One repetition of a grid: the per-(level, metric) values, in level-major
/// order. Exposed so a single repetition can be reproduced in isolation.
std::vector<std::vector<std::optional<double>>> run_single_repetition(
    const ExperimentConfig& config, const TabularDataset& dataset, GridMode mode, int repetition,
    std::vector<std::string>* notes = nullptr);

/// Runs the configured bias grid: per repetition, stratified split, injection
/// into train+validation, training, metrics on the unbiased test split.
/// Aggregates mean/std per cell and Welch-tests each level against the first.
ExperimentResult run_bias_grid(const ExperimentConfig& config, const TabularDataset& dataset,
                               int threads = 1);

/// Product grid over (bias_axis x second_axis).
ExperimentResult run_joint_grid(const ExperimentConfig& config, const TabularDataset& dataset,
                                BiasKind second_axis, const std::vector<double>& second_levels,
                                int threads = 1);

/// Detection grid: injection into the full dataset, identically distributed
/// train/eval parts, detection measures only. Levels equal to 1.0 are
/// substituted with 0.95.
ExperimentResult run_detection_grid(const ExperimentConfig& config, const TabularDataset& dataset,
                                    int threads = 1);

/// Paired per-repetition difference of `metric` between the highest and
/// lowest first-axis levels, one entry per second-axis level.
struct JointDelta {
  double second_level = 0.0;
  std::optional<double> mean;
  std::optional<double> stddev;
  std::vector<std::optional<double>> values;
};
std::vector<JointDelta> joint_axis_delta(const ExperimentResult& result, Metric metric);

enum class TableFormat { csv, text };

std::string emit_table(const ExperimentResult& result, TableFormat format);

/// Canonical per-repetition CSV; byte-identical for a given config and seed
/// regardless of scheduling.
std::string repetitions_csv(const ExperimentResult& result);

/// Runs a grid and writes summary.csv, repetitions.csv, config.json and
/// meta.json into out_dir. meta.json starts in status "incomplete" and is
/// finalized last; on failure partial outputs are removed and the incomplete
/// marker remains.
ExperimentResult run_experiment_to_dir(const ExperimentConfig& config, const TabularDataset& dataset,
                                       GridMode mode, const std::string& out_dir, int threads = 1);

}  // namespace biaslens
