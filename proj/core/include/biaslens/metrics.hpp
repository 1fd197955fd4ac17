#pragma once

#include <cstdint>
#include <span>

namespace biaslens {

using BinaryVec = std::span<const std::uint8_t>;
using ScoreVec = std::span<const double>;

struct ConfusionCounts {
  // Indexed by [group][truth][prediction]; group 1 = advantaged.
  std::size_t cell[2][2][2] = {};
  std::size_t total() const;
};

ConfusionCounts confusion_counts(BinaryVec y, BinaryVec yhat, BinaryVec s);

struct FairnessReport {
  double balanced_accuracy = 0.0;
  double tpr_a = 0.0;
  double tpr_d = 0.0;
  double dp = 0.0;
  double eo = 0.0;
  double pqp = 0.0;
  ConfusionCounts counts;
};

/// (TPR + TNR) / 2. Requires both classes in y.
double balanced_accuracy(BinaryVec y, BinaryVec yhat);

/// Per-group true positive rates (advantaged, disadvantaged). Requires at
/// least one positive in each group.
std::pair<double, double> groupwise_tpr(BinaryVec y, BinaryVec yhat, BinaryVec s);

/// Acceptance-rate difference Pr(yhat=1|a) - Pr(yhat=1|d); ignores y.
double demographic_parity(BinaryVec yhat, BinaryVec s);

/// TPR difference tpr_a - tpr_d.
double equal_opportunity(BinaryVec y, BinaryVec yhat, BinaryVec s);

/// Balanced-accuracy difference BA_a - BA_d. Requires both classes within
/// each group.
double prediction_quality_parity(BinaryVec y, BinaryVec yhat, BinaryVec s);

/// All hard-label metrics in one pass over the confusion cells.
FairnessReport fairness_report(BinaryVec y, BinaryVec yhat, BinaryVec s);

/// Pairwise ranking AUC with ties counted 0.5. Rank-based implementation;
/// matches the brute-force pairwise definition exactly.
double auc(ScoreVec scores, BinaryVec labels);

/// Cross-group AUC: probability that a positive from from_group outranks a
/// negative from to_group (ties 0.5). Groups are the values of s (1 = a).
double xauc(ScoreVec scores, BinaryVec labels, BinaryVec s, std::uint8_t from_group,
            std::uint8_t to_group);

}  // namespace biaslens
