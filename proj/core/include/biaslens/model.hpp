#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

namespace biaslens {

enum class ModelKind { logistic, forest };

const char* model_kind_name(ModelKind k);
ModelKind model_kind_from_name(const std::string& s);

struct TrainConfig {
  ModelKind model_kind = ModelKind::logistic;
  // Logistic regression.
  double l2_lambda = 1e-4;
  int max_iters = 5000;
  double tol = 1e-8;
  double learning_rate = 0.1;
  // Forest. feature_subsample <= 0 picks the sqrt(m)/m default at fit time.
  int n_trees = 100;
  int max_depth = 8;
  int min_leaf = 5;
  double feature_subsample = 0.0;
  std::uint64_t seed = 0;
  // Reserved for protocol parity; no early stopping is implemented.
  bool use_validation = false;

  std::string to_json() const;
  static TrainConfig from_json(const std::string& text);
  /// Stable digest of every hyperparameter, for profile provenance.
  std::string digest() const;
};

struct TrainingMeta {
  int iterations_run = 0;
  double final_loss = 0.0;
};

struct TreeNode {
  // Leaves have feature == -1 and carry the positive fraction.
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double positive_fraction = 0.0;
};

struct Tree {
  std::vector<TreeNode> nodes;
  double predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
};

class TrainedClassifier {
 public:
  ModelKind kind() const { return kind_; }
  int feature_count() const { return feature_count_; }
  const TrainingMeta& meta() const { return meta_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  double intercept() const { return intercept_; }
  const std::vector<Tree>& trees() const { return trees_; }

  /// Posterior positive-class probability per row.
  Eigen::VectorXd predict_proba(const Eigen::Ref<const Eigen::MatrixXd>& X) const;

  std::string to_json() const;
  static TrainedClassifier from_json(const std::string& text);

 private:
  friend TrainedClassifier train_logistic(const Eigen::Ref<const Eigen::MatrixXd>&,
                                          const std::vector<std::uint8_t>&, const TrainConfig&);
  friend TrainedClassifier train_forest(const Eigen::Ref<const Eigen::MatrixXd>&,
                                        const std::vector<std::uint8_t>&, const TrainConfig&);

  ModelKind kind_ = ModelKind::logistic;
  int feature_count_ = 0;
  TrainingMeta meta_;
  Eigen::VectorXd weights_;
  double intercept_ = 0.0;
  std::vector<Tree> trees_;
};

/// Full-batch gradient descent on mean log-loss with L2 penalty on the
/// weights (intercept unpenalized). Weights start at zero; stops at max_iters
/// or when the loss improvement falls below tol.
TrainedClassifier train_logistic(const Eigen::Ref<const Eigen::MatrixXd>& X,
                                 const std::vector<std::uint8_t>& y, const TrainConfig& config);

/// Bagged CART trees, Gini splits over a random feature subset per split,
/// leaves storing the positive fraction. Posterior is the mean over trees.
TrainedClassifier train_forest(const Eigen::Ref<const Eigen::MatrixXd>& X,
                               const std::vector<std::uint8_t>& y, const TrainConfig& config);

/// Convenience dispatch on config.model_kind.
TrainedClassifier train_model(const Eigen::Ref<const Eigen::MatrixXd>& X,
                              const std::vector<std::uint8_t>& y, const TrainConfig& config);

/// Hard labels at the given threshold: 1 iff p >= threshold.
std::vector<std::uint8_t> classify(const Eigen::Ref<const Eigen::VectorXd>& probs, double threshold);

}  // namespace biaslens
