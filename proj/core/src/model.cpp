#include "biaslens/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "biaslens/error.hpp"
#include "biaslens/rng.hpp"

namespace biaslens {

using nlohmann::json;

const char* model_kind_name(ModelKind k) { return k == ModelKind::logistic ? "logistic" : "forest"; }

ModelKind model_kind_from_name(const std::string& s) {
  if (s == "logistic") return ModelKind::logistic;
  if (s == "forest") return ModelKind::forest;
  fail(Errc::invalid_argument, "unknown model kind '" + s + "'");
}

std::string TrainConfig::to_json() const {
  json j{{"model_kind", model_kind_name(model_kind)},
         {"l2_lambda", l2_lambda},
         {"max_iters", max_iters},
         {"tol", tol},
         {"learning_rate", learning_rate},
         {"n_trees", n_trees},
         {"max_depth", max_depth},
         {"min_leaf", min_leaf},
         {"feature_subsample", feature_subsample},
         {"seed", seed},
         {"use_validation", use_validation}};
  return j.dump();
}

TrainConfig TrainConfig::from_json(const std::string& text) {
  json j = json::parse(text);
  TrainConfig c;
  c.model_kind = model_kind_from_name(j.value("model_kind", "logistic"));
  c.l2_lambda = j.value("l2_lambda", c.l2_lambda);
  c.max_iters = j.value("max_iters", c.max_iters);
  c.tol = j.value("tol", c.tol);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.n_trees = j.value("n_trees", c.n_trees);
  c.max_depth = j.value("max_depth", c.max_depth);
  c.min_leaf = j.value("min_leaf", c.min_leaf);
  c.feature_subsample = j.value("feature_subsample", c.feature_subsample);
  c.seed = j.value("seed", c.seed);
  c.use_validation = j.value("use_validation", c.use_validation);
  if (c.tol <= 0.0) fail(Errc::invalid_argument, "tol must be > 0");
  if (c.l2_lambda < 0.0) fail(Errc::invalid_argument, "l2_lambda must be >= 0");
  if (c.learning_rate <= 0.0) fail(Errc::invalid_argument, "learning_rate must be > 0");
  if (c.n_trees < 1) fail(Errc::invalid_argument, "n_trees must be >= 1");
  if (c.feature_subsample > 1.0) fail(Errc::invalid_argument, "feature_subsample must be in (0, 1]");
  return c;
}

std::string TrainConfig::digest() const {
  // FNV-1a over the canonical JSON form.
  const std::string text = to_json();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

void check_training_inputs(const Eigen::Ref<const Eigen::MatrixXd>& X, const std::vector<std::uint8_t>& y) {
  if (X.rows() < 1) fail(Errc::invalid_argument, "training set must contain at least one row");
  if (static_cast<std::size_t>(X.rows()) != y.size()) {
    fail(Errc::shape_mismatch, "label vector length does not match row count");
  }
  if (!X.allFinite()) fail(Errc::invalid_argument, "feature matrix contains non-finite values");
}

double mean_log_loss(const Eigen::VectorXd& z, const Eigen::VectorXd& y01) {
  // log(1 + exp(-t)) with t = z for positives, -z for negatives, computed
  // stably as max(-t, 0) + log1p(exp(-|t|)).
  double total = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double t = y01[i] > 0.5 ? z[i] : -z[i];
    total += std::max(-t, 0.0) + std::log1p(std::exp(-std::abs(t)));
  }
  return total / static_cast<double>(z.size());
}

}  // namespace

TrainedClassifier train_logistic(const Eigen::Ref<const Eigen::MatrixXd>& X,
                                 const std::vector<std::uint8_t>& y, const TrainConfig& config) {
  check_training_inputs(X, y);
  const Eigen::Index n = X.rows();
  const Eigen::Index m = X.cols();
  const double inv_n = 1.0 / static_cast<double>(n);

  Eigen::VectorXd y01(n);
  for (Eigen::Index i = 0; i < n; ++i) y01[i] = y[static_cast<std::size_t>(i)];

  Eigen::VectorXd w = Eigen::VectorXd::Zero(m);
  double b = 0.0;

  Eigen::VectorXd z(n), p(n), residual(n), grad_w(m);
  double prev_loss = std::numeric_limits<double>::infinity();
  int iters = 0;

  auto loss_at = [&](const Eigen::VectorXd& weights, double bias) {
    z.noalias() = X * weights;
    z.array() += bias;
    return mean_log_loss(z, y01) + 0.5 * config.l2_lambda * weights.squaredNorm();
  };

  for (int iter = 0; iter < config.max_iters; ++iter) {
    const double loss = loss_at(w, b);
    if (!std::isfinite(loss)) {
      fail(Errc::non_finite_loss, "training diverged; lower the learning rate");
    }
    if (std::abs(prev_loss - loss) < config.tol) break;
    prev_loss = loss;

    p.array() = 1.0 / (1.0 + (-z.array()).exp());
    residual = p - y01;
    grad_w.noalias() = X.transpose() * residual;
    grad_w *= inv_n;
    grad_w += config.l2_lambda * w;
    const double grad_b = residual.sum() * inv_n;

    w -= config.learning_rate * grad_w;
    b -= config.learning_rate * grad_b;
    iters = iter + 1;
  }

  const double final_loss = loss_at(w, b);
  if (!std::isfinite(final_loss)) {
    fail(Errc::non_finite_loss, "training diverged; lower the learning rate");
  }

  TrainedClassifier model;
  model.kind_ = ModelKind::logistic;
  model.feature_count_ = static_cast<int>(m);
  model.weights_ = std::move(w);
  model.intercept_ = b;
  model.meta_ = {iters, final_loss};
  return model;
}

double Tree::predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  int node = 0;
  while (nodes[static_cast<std::size_t>(node)].feature >= 0) {
    const auto& nd = nodes[static_cast<std::size_t>(node)];
    node = x[nd.feature] <= nd.threshold ? nd.left : nd.right;
  }
  return nodes[static_cast<std::size_t>(node)].positive_fraction;
}

namespace {

struct TreeBuilder {
  const Eigen::Ref<const Eigen::MatrixXd>& X;
  const std::vector<std::uint8_t>& y;
  const TrainConfig& config;
  std::size_t features_per_split;
  rng::Engine& eng;
  Tree tree;

  int build(std::vector<std::size_t>& samples, int depth) {
    std::size_t positives = 0;
    for (std::size_t i : samples) positives += y[i];
    const double fraction = static_cast<double>(positives) / static_cast<double>(samples.size());

    const int node_id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({-1, 0.0, -1, -1, fraction});

    if (depth >= config.max_depth || positives == 0 || positives == samples.size() ||
        samples.size() < static_cast<std::size_t>(2 * config.min_leaf)) {
      return node_id;
    }

    // Candidate features for this split, sampled without replacement.
    const auto chosen = eng.sample_positions(static_cast<std::size_t>(X.cols()), features_per_split);

    const double parent_gini = gini(positives, samples.size());
    double best_gain = 0.0;
    int best_feature = -1;
    double best_threshold = 0.0;

    std::vector<std::pair<double, std::uint8_t>> values(samples.size());
    for (std::size_t f : chosen) {
      for (std::size_t i = 0; i < samples.size(); ++i) {
        values[i] = {X(static_cast<Eigen::Index>(samples[i]), static_cast<Eigen::Index>(f)), y[samples[i]]};
      }
      std::sort(values.begin(), values.end());

      std::size_t left_n = 0, left_pos = 0;
      for (std::size_t i = 0; i + 1 < values.size(); ++i) {
        left_n += 1;
        left_pos += values[i].second;
        if (values[i].first == values[i + 1].first) continue;  // no threshold between equal values
        const std::size_t right_n = values.size() - left_n;
        if (left_n < static_cast<std::size_t>(config.min_leaf) ||
            right_n < static_cast<std::size_t>(config.min_leaf)) {
          continue;
        }
        const std::size_t right_pos = positives - left_pos;
        const double wl = static_cast<double>(left_n) / static_cast<double>(values.size());
        const double child_gini = wl * gini(left_pos, left_n) + (1.0 - wl) * gini(right_pos, right_n);
        const double gain = parent_gini - child_gini;
        if (gain > best_gain + 1e-15) {
          best_gain = gain;
          best_feature = static_cast<int>(f);
          best_threshold = 0.5 * (values[i].first + values[i + 1].first);
        }
      }
    }

    if (best_feature < 0) return node_id;

    std::vector<std::size_t> left, right;
    for (std::size_t i : samples) {
      if (X(static_cast<Eigen::Index>(i), best_feature) <= best_threshold) {
        left.push_back(i);
      } else {
        right.push_back(i);
      }
    }
    if (left.empty() || right.empty()) return node_id;

    tree.nodes[static_cast<std::size_t>(node_id)].feature = best_feature;
    tree.nodes[static_cast<std::size_t>(node_id)].threshold = best_threshold;
    const int left_id = build(left, depth + 1);
    tree.nodes[static_cast<std::size_t>(node_id)].left = left_id;
    const int right_id = build(right, depth + 1);
    tree.nodes[static_cast<std::size_t>(node_id)].right = right_id;
    return node_id;
  }

  static double gini(std::size_t positives, std::size_t total) {
    const double p = static_cast<double>(positives) / static_cast<double>(total);
    return 2.0 * p * (1.0 - p);
  }
};

}  // namespace

TrainedClassifier train_forest(const Eigen::Ref<const Eigen::MatrixXd>& X,
                               const std::vector<std::uint8_t>& y, const TrainConfig& config) {
  check_training_inputs(X, y);
  if (config.n_trees < 1) fail(Errc::invalid_argument, "n_trees must be >= 1");
  const std::size_t n = static_cast<std::size_t>(X.rows());
  const std::size_t m = static_cast<std::size_t>(X.cols());

  double subsample = config.feature_subsample;
  if (subsample <= 0.0) subsample = m > 0 ? std::sqrt(static_cast<double>(m)) / static_cast<double>(m) : 1.0;
  if (subsample > 1.0) fail(Errc::invalid_argument, "feature_subsample must be in (0, 1]");
  const std::size_t features_per_split =
      m == 0 ? 0 : std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(subsample * static_cast<double>(m))));

  TrainedClassifier model;
  model.kind_ = ModelKind::forest;
  model.feature_count_ = static_cast<int>(m);
  model.trees_.reserve(static_cast<std::size_t>(config.n_trees));

  for (int t = 0; t < config.n_trees; ++t) {
    rng::Engine eng(rng::derive_seed(config.seed, "forest/tree/" + std::to_string(t)));
    std::vector<std::size_t> bootstrap(n);
    for (auto& idx : bootstrap) idx = static_cast<std::size_t>(eng.uniform_below(n));
    std::sort(bootstrap.begin(), bootstrap.end());

    TreeBuilder builder{X, y, config, features_per_split, eng, {}};
    if (m == 0) {
      std::size_t positives = 0;
      for (std::size_t i : bootstrap) positives += y[i];
      builder.tree.nodes.push_back(
          {-1, 0.0, -1, -1, static_cast<double>(positives) / static_cast<double>(n)});
    } else {
      builder.build(bootstrap, 0);
    }
    model.trees_.push_back(std::move(builder.tree));
  }
  model.meta_ = {config.n_trees, 0.0};
  return model;
}

TrainedClassifier train_model(const Eigen::Ref<const Eigen::MatrixXd>& X,
                              const std::vector<std::uint8_t>& y, const TrainConfig& config) {
  return config.model_kind == ModelKind::logistic ? train_logistic(X, y, config)
                                                  : train_forest(X, y, config);
}

Eigen::VectorXd TrainedClassifier::predict_proba(const Eigen::Ref<const Eigen::MatrixXd>& X) const {
  if (X.cols() != feature_count_) {
    fail(Errc::shape_mismatch, "expected " + std::to_string(feature_count_) + " feature columns, got " +
                                   std::to_string(X.cols()));
  }
  Eigen::VectorXd out(X.rows());
  if (kind_ == ModelKind::logistic) {
    out.noalias() = X * weights_;
    out.array() += intercept_;
    out.array() = 1.0 / (1.0 + (-out.array()).exp());
  } else {
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      double sum = 0.0;
      for (const auto& tree : trees_) sum += tree.predict(X.row(i));
      out[i] = sum / static_cast<double>(trees_.size());
    }
  }
  return out;
}

std::vector<std::uint8_t> classify(const Eigen::Ref<const Eigen::VectorXd>& probs, double threshold) {
  if (threshold <= 0.0 || threshold >= 1.0) fail(Errc::invalid_argument, "threshold must be in (0, 1)");
  std::vector<std::uint8_t> out(static_cast<std::size_t>(probs.size()));
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    out[static_cast<std::size_t>(i)] = probs[i] >= threshold ? 1 : 0;
  }
  return out;
}

std::string TrainedClassifier::to_json() const {
  json j{{"model_kind", model_kind_name(kind_)},
         {"feature_count", feature_count_},
         {"training_meta", {{"iterations_run", meta_.iterations_run}, {"final_loss", meta_.final_loss}}}};
  if (kind_ == ModelKind::logistic) {
    std::vector<double> w(weights_.data(), weights_.data() + weights_.size());
    j["weights"] = w;
    j["intercept"] = intercept_;
  } else {
    json trees = json::array();
    for (const auto& tree : trees_) {
      json nodes = json::array();
      for (const auto& nd : tree.nodes) {
        nodes.push_back({{"feature", nd.feature},
                         {"threshold", nd.threshold},
                         {"left", nd.left},
                         {"right", nd.right},
                         {"positive_fraction", nd.positive_fraction}});
      }
      trees.push_back(std::move(nodes));
    }
    j["trees"] = std::move(trees);
  }
  return j.dump();
}

TrainedClassifier TrainedClassifier::from_json(const std::string& text) {
  json j = json::parse(text);
  TrainedClassifier model;
  model.kind_ = model_kind_from_name(j.at("model_kind").get<std::string>());
  model.feature_count_ = j.at("feature_count").get<int>();
  model.meta_.iterations_run = j.at("training_meta").at("iterations_run").get<int>();
  model.meta_.final_loss = j.at("training_meta").at("final_loss").get<double>();
  if (model.kind_ == ModelKind::logistic) {
    const auto w = j.at("weights").get<std::vector<double>>();
    model.weights_ = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
    model.intercept_ = j.at("intercept").get<double>();
  } else {
    for (const auto& tj : j.at("trees")) {
      Tree tree;
      for (const auto& nj : tj) {
        tree.nodes.push_back({nj.at("feature").get<int>(), nj.at("threshold").get<double>(),
                              nj.at("left").get<int>(), nj.at("right").get<int>(),
                              nj.at("positive_fraction").get<double>()});
      }
      model.trees_.push_back(std::move(tree));
    }
  }
  return model;
}

}  // namespace biaslens
