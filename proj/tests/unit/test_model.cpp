#include <doctest.h>

#include <cmath>

#include "biaslens/error.hpp"
#include "biaslens/model.hpp"
#include "biaslens/rng.hpp"
#include "support/oracles.hpp"

using namespace biaslens;

namespace {

Eigen::MatrixXd to_matrix(const std::vector<std::vector<double>>& rows) {
  Eigen::MatrixXd X(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return X;
}

}  // namespace

TEST_CASE("zero iterations leaves the zero model: every posterior is 0.5") {
  Eigen::MatrixXd X(4, 2);
  X << 1, 2, -1, 0, 3, 1, 0, 0;
  const std::vector<std::uint8_t> y{1, 0, 1, 0};
  TrainConfig config;
  config.max_iters = 0;
  const auto model = train_logistic(X, y, config);
  const auto probs = model.predict_proba(X);
  for (Eigen::Index i = 0; i < probs.size(); ++i) CHECK(probs[i] == 0.5);
  CHECK(model.meta().iterations_run == 0);
}

TEST_CASE("separable 1-D data trains to perfect accuracy at threshold 0.5") {
  Eigen::MatrixXd X(100, 1);
  std::vector<std::uint8_t> y(100);
  for (int i = 0; i < 50; ++i) {
    X(i, 0) = -1.0;
    y[static_cast<std::size_t>(i)] = 0;
    X(50 + i, 0) = 1.0;
    y[static_cast<std::size_t>(50 + i)] = 1;
  }
  TrainConfig config;
  config.max_iters = 2000;
  const auto model = train_logistic(X, y, config);
  const auto yhat = classify(model.predict_proba(X), 0.5);
  for (int i = 0; i < 100; ++i) CHECK(yhat[static_cast<std::size_t>(i)] == y[static_cast<std::size_t>(i)]);
}

TEST_CASE("analytic gradient matches central finite differences") {
  rng::Engine eng(17);
  double max_rel_err = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 5, m = 3;
    std::vector<std::vector<double>> rows(n, std::vector<double>(m));
    std::vector<std::uint8_t> y(n);
    for (auto& row : rows) {
      for (auto& v : row) v = eng.normal();
    }
    for (auto& v : y) v = eng.uniform01() < 0.5;
    bool ok = false;
    for (auto v : y) ok |= v == 1;
    if (!ok) y[0] = 1;

    std::vector<double> w(m);
    for (auto& v : w) v = eng.normal() * 0.5;
    const double b = eng.normal() * 0.5;
    const double lambda = 0.01;

    // Analytic gradient of the training objective at (w, b).
    const Eigen::MatrixXd X = to_matrix(rows);
    Eigen::VectorXd wv = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(m));
    Eigen::VectorXd z = X * wv;
    z.array() += b;
    Eigen::VectorXd p = (1.0 / (1.0 + (-z.array()).exp())).matrix();
    Eigen::VectorXd resid(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) resid[static_cast<Eigen::Index>(i)] = p[static_cast<Eigen::Index>(i)] - y[i];
    Eigen::VectorXd grad = X.transpose() * resid / static_cast<double>(n) + lambda * wv;

    const double h = 1e-5;
    for (std::size_t j = 0; j < m; ++j) {
      auto w_plus = w, w_minus = w;
      w_plus[j] += h;
      w_minus[j] -= h;
      const double numeric = (oracles::logistic_objective(rows, y, w_plus, b, lambda) -
                              oracles::logistic_objective(rows, y, w_minus, b, lambda)) /
                             (2.0 * h);
      const double analytic = grad[static_cast<Eigen::Index>(j)];
      const double rel = std::abs(numeric - analytic) / std::max(1.0, std::abs(analytic));
      max_rel_err = std::max(max_rel_err, rel);
    }
  }
  CHECK(max_rel_err < 1e-5);
}

TEST_CASE("training is bit-identical for identical inputs") {
  rng::Engine eng(23);
  Eigen::MatrixXd X(40, 3);
  std::vector<std::uint8_t> y(40);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) X(i, j) = eng.normal();
    y[static_cast<std::size_t>(i)] = eng.uniform01() < 0.5;
  }
  y[0] = 1;
  y[1] = 0;
  TrainConfig config;
  config.max_iters = 300;
  config.seed = 99;
  SUBCASE("logistic") {
    const auto a = train_logistic(X, y, config);
    const auto b = train_logistic(X, y, config);
    CHECK(a.weights() == b.weights());
    CHECK(a.intercept() == b.intercept());
  }
  SUBCASE("forest") {
    config.model_kind = ModelKind::forest;
    config.n_trees = 12;
    const auto a = train_forest(X, y, config);
    const auto b = train_forest(X, y, config);
    CHECK(a.predict_proba(X) == b.predict_proba(X));
  }
}

TEST_CASE("final loss never exceeds the zero-model loss") {
  rng::Engine eng(29);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::MatrixXd X(30, 2);
    std::vector<std::uint8_t> y(30);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      X(i, 0) = eng.normal();
      X(i, 1) = eng.normal();
      y[static_cast<std::size_t>(i)] = eng.uniform01() < 0.4;
    }
    y[0] = 1;
    y[1] = 0;
    TrainConfig config;
    config.max_iters = 500;
    const auto model = train_logistic(X, y, config);
    const double zero_loss = std::log(2.0);  // mean log-loss of the 0.5 posterior
    CHECK(model.meta().final_loss <= zero_loss + 1e-12);
  }
}

TEST_CASE("stronger regularization shrinks the weight norm") {
  rng::Engine eng(31);
  Eigen::MatrixXd X(60, 4);
  std::vector<std::uint8_t> y(60);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) X(i, j) = eng.normal();
    y[static_cast<std::size_t>(i)] = X(i, 0) + 0.3 * eng.normal() > 0;
  }
  TrainConfig weak;
  weak.l2_lambda = 1e-4;
  weak.max_iters = 1500;
  TrainConfig strong = weak;
  strong.l2_lambda = 1.0;
  const auto model_weak = train_logistic(X, y, weak);
  const auto model_strong = train_logistic(X, y, strong);
  CHECK(model_strong.weights().norm() <= model_weak.weights().norm());
}

TEST_CASE("diverging training raises NonFiniteLoss") {
  Eigen::MatrixXd X(4, 1);
  X << 1e150, -1e150, 1e150, -1e150;
  const std::vector<std::uint8_t> y{1, 0, 1, 0};
  TrainConfig config;
  config.learning_rate = 1e200;
  config.max_iters = 50;
  CHECK_THROWS_AS(train_logistic(X, y, config), Error);
}

TEST_CASE("depth-0 forest predicts the bootstrap base rate at the root") {
  Eigen::MatrixXd X(50, 2);
  std::vector<std::uint8_t> y(50);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    X(i, 0) = static_cast<double>(i);
    X(i, 1) = static_cast<double>(i % 7);
    y[static_cast<std::size_t>(i)] = i % 5 == 0;
  }
  TrainConfig config;
  config.model_kind = ModelKind::forest;
  config.n_trees = 1;
  config.max_depth = 0;
  config.seed = 7;
  const auto model = train_forest(X, y, config);
  const auto probs = model.predict_proba(X);
  for (Eigen::Index i = 1; i < probs.size(); ++i) CHECK(probs[i] == probs[0]);
  CHECK(probs[0] >= 0.0);
  CHECK(probs[0] <= 1.0);
}

TEST_CASE("pure datasets give constant posteriors 1.0") {
  Eigen::MatrixXd X(20, 1);
  std::vector<std::uint8_t> y(20, 1);
  for (Eigen::Index i = 0; i < X.rows(); ++i) X(i, 0) = static_cast<double>(i);
  TrainConfig config;
  config.model_kind = ModelKind::forest;
  config.n_trees = 5;
  const auto model = train_forest(X, y, config);
  const auto probs = model.predict_proba(X);
  for (Eigen::Index i = 0; i < probs.size(); ++i) CHECK(probs[i] == 1.0);
}

TEST_CASE("forest solves XOR with depth 2 and full feature view") {
  Eigen::MatrixXd X(4, 2);
  X << 0, 0, 0, 1, 1, 0, 1, 1;
  const std::vector<std::uint8_t> y{0, 1, 1, 0};
  TrainConfig config;
  config.model_kind = ModelKind::forest;
  config.n_trees = 25;
  config.max_depth = 2;
  config.min_leaf = 1;
  config.feature_subsample = 1.0;
  config.seed = 3;
  const auto model = train_forest(X, y, config);
  const auto yhat = classify(model.predict_proba(X), 0.5);
  CHECK(yhat == y);
}

TEST_CASE("forest posterior is the mean of its trees") {
  rng::Engine eng(41);
  Eigen::MatrixXd X(80, 3);
  std::vector<std::uint8_t> y(80);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) X(i, j) = eng.normal();
    y[static_cast<std::size_t>(i)] = X(i, 1) > 0.2;
  }
  TrainConfig config;
  config.model_kind = ModelKind::forest;
  config.n_trees = 9;
  config.seed = 5;
  const auto model = train_forest(X, y, config);
  const auto probs = model.predict_proba(X);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    double sum = 0.0, low = 1.0, high = 0.0;
    for (const auto& tree : model.trees()) {
      const double p = tree.predict(X.row(i));
      sum += p;
      low = std::min(low, p);
      high = std::max(high, p);
    }
    CHECK(probs[i] == doctest::Approx(sum / 9.0).epsilon(1e-12));
    CHECK(probs[i] >= low - 1e-12);
    CHECK(probs[i] <= high + 1e-12);
  }
}

TEST_CASE("classify applies the >= threshold convention") {
  Eigen::VectorXd probs(3);
  probs << 0.4, 0.5, 0.6;
  CHECK(classify(probs, 0.5) == std::vector<std::uint8_t>{0, 1, 1});

  Eigen::VectorXd all_half = Eigen::VectorXd::Constant(4, 0.5);
  CHECK(classify(all_half, 0.5) == std::vector<std::uint8_t>{1, 1, 1, 1});

  // Idempotence on {0,1} inputs.
  Eigen::VectorXd binary(4);
  binary << 0, 1, 1, 0;
  CHECK(classify(binary, 0.5) == std::vector<std::uint8_t>{0, 1, 1, 0});
  CHECK_THROWS_AS(classify(probs, 0.0), Error);
}

TEST_CASE("predict_proba rejects mismatched shapes") {
  Eigen::MatrixXd X(10, 2);
  X.setRandom();
  std::vector<std::uint8_t> y(10, 0);
  y[0] = 1;
  TrainConfig config;
  config.max_iters = 10;
  const auto model = train_logistic(X, y, config);
  Eigen::MatrixXd wrong(4, 3);
  wrong.setZero();
  CHECK_THROWS_AS(model.predict_proba(wrong), Error);
}

TEST_CASE("model serialization round-trips predictions") {
  rng::Engine eng(47);
  Eigen::MatrixXd X(30, 3);
  std::vector<std::uint8_t> y(30);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) X(i, j) = eng.normal();
    y[static_cast<std::size_t>(i)] = X(i, 0) > 0;
  }
  SUBCASE("logistic") {
    TrainConfig config;
    config.max_iters = 200;
    const auto model = train_logistic(X, y, config);
    const auto restored = TrainedClassifier::from_json(model.to_json());
    CHECK(model.predict_proba(X) == restored.predict_proba(X));
  }
  SUBCASE("forest") {
    TrainConfig config;
    config.model_kind = ModelKind::forest;
    config.n_trees = 7;
    config.seed = 2;
    const auto model = train_forest(X, y, config);
    const auto restored = TrainedClassifier::from_json(model.to_json());
    CHECK(model.predict_proba(X) == restored.predict_proba(X));
  }
}
