#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "biaslens/metrics.hpp"
#include "biaslens/model.hpp"
#include "biaslens/schema.hpp"
#include "biaslens/split.hpp"

namespace biaslens {

inline constexpr const char* kProfileVersion = "dbp-v1";

/// Quantitative bias signature of one dataset: representation difference,
/// separation difference (with its two components), and proxy strength, plus
/// provenance for reproducibility.
struct DataBiasProfile {
  std::string dataset_id;
  std::string sensitive_name;
  double rd = 0.0;
  double delta_xauc = 0.0;
  double delta_wauc = 0.0;
  double sd = 0.0;
  double sauc = 0.5;
  std::string model_config_digest;
  std::uint64_t seed = 0;
  std::array<double, 3> split_fractions{0.8, 0.1, 0.1};
  std::string created_at;

  std::string to_json() const;
  static DataBiasProfile from_json(const std::string& text);
  static DataBiasProfile from_json_file(const std::string& path);
};

/// Pr(s=a) - Pr(s=d), exact from group counts.
double representation_difference(BinaryVec s);

/// xAUC(a,d) - xAUC(d,a).
double delta_xauc(ScoreVec scores, BinaryVec labels, BinaryVec s);

/// Within-group AUC difference, AUC on s=a minus AUC on s=d.
double delta_wauc(ScoreVec scores, BinaryVec labels, BinaryVec s);

/// Mean of delta_xauc and delta_wauc.
double separation_difference(ScoreVec scores, BinaryVec labels, BinaryVec s);

/// Trains a classifier for the sensitive attribute on the train part of the
/// split and returns its AUC on the test part. Class a is scored positive.
double sensitive_auc(const TabularDataset& dataset, const SplitIndices& split,
                     const TrainConfig& config);

struct ProfileConfig {
  std::string dataset_id = "dataset";
  TrainConfig model;
  std::array<double, 3> split_fractions{0.8, 0.1, 0.1};
};

/// Assembles the full profile: identically-distributed split, one classifier
/// for the labels (separation measures) and one for the sensitive attribute
/// (proxy strength); RD comes from the full dataset. Deterministic given seed.
DataBiasProfile build_profile(const TabularDataset& dataset, const std::string& sensitive_name,
                              const ProfileConfig& config, std::uint64_t seed);

struct CompareThresholds {
  double sauc_gap = 0.2;
  double sd_gap = 0.1;
  double rd_gap = 0.2;
};

struct ProfileDiff {
  double rd = 0.0;
  double delta_xauc = 0.0;
  double delta_wauc = 0.0;
  double sd = 0.0;
  double sauc = 0.0;
  std::vector<std::string> classifications;  // of profile 1 relative to profile 2

  std::string to_json() const;
};

/// Signed per-measure differences (p1 - p2) plus a coarse classification by
/// the given thresholds.
ProfileDiff compare_profiles(const DataBiasProfile& p1, const DataBiasProfile& p2,
                             const CompareThresholds& thresholds = {});

/// Three-axis radar chart (RD, SD, sAUC), one polygon per profile. RD and SD
/// are mapped from [-1,1] to [0,1]; sAUC is plotted raw.
std::string radar_svg(const std::vector<DataBiasProfile>& profiles);

}  // namespace biaslens
