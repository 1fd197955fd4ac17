#include "biaslens/metrics.hpp"

#include <algorithm>
#include <vector>

#include "biaslens/error.hpp"

namespace biaslens {

namespace {

void check_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b) fail(Errc::shape_mismatch, what);
}

double tpr_from_cells(const ConfusionCounts& c, int group) {
  const std::size_t positives = c.cell[group][1][0] + c.cell[group][1][1];
  return static_cast<double>(c.cell[group][1][1]) / static_cast<double>(positives);
}

double ba_from_cells(const ConfusionCounts& c, int group) {
  const std::size_t pos = c.cell[group][1][0] + c.cell[group][1][1];
  const std::size_t neg = c.cell[group][0][0] + c.cell[group][0][1];
  const double tpr = static_cast<double>(c.cell[group][1][1]) / static_cast<double>(pos);
  const double tnr = static_cast<double>(c.cell[group][0][0]) / static_cast<double>(neg);
  return 0.5 * (tpr + tnr);
}

}  // namespace

std::size_t ConfusionCounts::total() const {
  std::size_t t = 0;
  for (int g = 0; g < 2; ++g) {
    for (int y = 0; y < 2; ++y) {
      for (int p = 0; p < 2; ++p) t += cell[g][y][p];
    }
  }
  return t;
}

ConfusionCounts confusion_counts(BinaryVec y, BinaryVec yhat, BinaryVec s) {
  check_same_length(y.size(), yhat.size(), "y and yhat lengths differ");
  check_same_length(y.size(), s.size(), "y and s lengths differ");
  ConfusionCounts c;
  for (std::size_t i = 0; i < y.size(); ++i) c.cell[s[i]][y[i]][yhat[i]]++;
  return c;
}

double balanced_accuracy(BinaryVec y, BinaryVec yhat) {
  check_same_length(y.size(), yhat.size(), "y and yhat lengths differ");
  std::size_t tp = 0, fn = 0, tn = 0, fp = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i]) {
      (yhat[i] ? tp : fn)++;
    } else {
      (yhat[i] ? fp : tn)++;
    }
  }
  if (tp + fn == 0 || tn + fp == 0) fail(Errc::missing_class, "both classes must be present in y");
  const double tpr = static_cast<double>(tp) / static_cast<double>(tp + fn);
  const double tnr = static_cast<double>(tn) / static_cast<double>(tn + fp);
  return 0.5 * (tpr + tnr);
}

std::pair<double, double> groupwise_tpr(BinaryVec y, BinaryVec yhat, BinaryVec s) {
  const auto c = confusion_counts(y, yhat, s);
  for (int g = 0; g < 2; ++g) {
    if (c.cell[g][1][0] + c.cell[g][1][1] == 0) {
      fail(Errc::no_positives_in_group,
           std::string("group ") + (g == 1 ? "a" : "d") + " has no positive instances");
    }
  }
  return {tpr_from_cells(c, 1), tpr_from_cells(c, 0)};
}

double demographic_parity(BinaryVec yhat, BinaryVec s) {
  check_same_length(yhat.size(), s.size(), "yhat and s lengths differ");
  std::size_t n[2] = {}, accepted[2] = {};
  for (std::size_t i = 0; i < yhat.size(); ++i) {
    n[s[i]]++;
    accepted[s[i]] += yhat[i];
  }
  if (n[0] == 0 || n[1] == 0) fail(Errc::missing_group, "both groups must be present");
  return static_cast<double>(accepted[1]) / static_cast<double>(n[1]) -
         static_cast<double>(accepted[0]) / static_cast<double>(n[0]);
}

double equal_opportunity(BinaryVec y, BinaryVec yhat, BinaryVec s) {
  const auto [tpr_a, tpr_d] = groupwise_tpr(y, yhat, s);
  return tpr_a - tpr_d;
}

double prediction_quality_parity(BinaryVec y, BinaryVec yhat, BinaryVec s) {
  const auto c = confusion_counts(y, yhat, s);
  for (int g = 0; g < 2; ++g) {
    const std::size_t pos = c.cell[g][1][0] + c.cell[g][1][1];
    const std::size_t neg = c.cell[g][0][0] + c.cell[g][0][1];
    if (pos == 0 || neg == 0) {
      fail(Errc::missing_class_in_group,
           std::string("group ") + (g == 1 ? "a" : "d") + " must contain both classes");
    }
  }
  return ba_from_cells(c, 1) - ba_from_cells(c, 0);
}

FairnessReport fairness_report(BinaryVec y, BinaryVec yhat, BinaryVec s) {
  FairnessReport r;
  r.counts = confusion_counts(y, yhat, s);
  r.balanced_accuracy = balanced_accuracy(y, yhat);
  const auto [ta, td] = groupwise_tpr(y, yhat, s);
  r.tpr_a = ta;
  r.tpr_d = td;
  r.eo = ta - td;
  r.dp = demographic_parity(yhat, s);
  r.pqp = prediction_quality_parity(y, yhat, s);
  return r;
}

double auc(ScoreVec scores, BinaryVec labels) {
  check_same_length(scores.size(), labels.size(), "scores and labels lengths differ");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Twice the rank sum of positives, with average ranks for ties; integer
  // arithmetic keeps the result bit-exact against the pairwise definition.
  std::size_t positives = 0;
  unsigned long long rank2_sum = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    // 1-based ranks i+1 .. j share the average rank (i+1 + j) / 2.
    const unsigned long long rank2 = static_cast<unsigned long long>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]]) {
        ++positives;
        rank2_sum += rank2;
      }
    }
    i = j;
  }
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0) fail(Errc::missing_class, "both classes must be present");
  const unsigned long long p = positives;
  const unsigned long long numerator2 = rank2_sum - p * (p + 1);
  return static_cast<double>(numerator2) /
         (2.0 * static_cast<double>(positives) * static_cast<double>(negatives));
}

double xauc(ScoreVec scores, BinaryVec labels, BinaryVec s, std::uint8_t from_group,
            std::uint8_t to_group) {
  check_same_length(scores.size(), labels.size(), "scores and labels lengths differ");
  check_same_length(scores.size(), s.size(), "scores and s lengths differ");
  std::vector<double> pos_scores, neg_scores;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] == 1 && s[i] == from_group) pos_scores.push_back(scores[i]);
    if (labels[i] == 0 && s[i] == to_group) neg_scores.push_back(scores[i]);
  }
  if (pos_scores.empty() || neg_scores.empty()) {
    fail(Errc::empty_pair_set, "no (positive, negative) pairs between the requested groups");
  }
  std::sort(neg_scores.begin(), neg_scores.end());
  unsigned long long wins2 = 0;
  for (double sp : pos_scores) {
    const auto lower = std::lower_bound(neg_scores.begin(), neg_scores.end(), sp);
    const auto upper = std::upper_bound(neg_scores.begin(), neg_scores.end(), sp);
    const auto below = static_cast<unsigned long long>(lower - neg_scores.begin());
    const auto ties = static_cast<unsigned long long>(upper - lower);
    wins2 += 2 * below + ties;
  }
  return static_cast<double>(wins2) /
         (2.0 * static_cast<double>(pos_scores.size()) * static_cast<double>(neg_scores.size()));
}

}  // namespace biaslens
