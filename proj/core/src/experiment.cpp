#include "biaslens/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "biaslens/detect.hpp"
#include "biaslens/encode.hpp"
#include "biaslens/error.hpp"
#include "biaslens/metrics.hpp"
#include "biaslens/rng.hpp"
#include "biaslens/split.hpp"

namespace biaslens {

using nlohmann::json;
namespace fs = std::filesystem;

const char* metric_name(Metric m) {
  switch (m) {
    case Metric::ba: return "ba";
    case Metric::dp: return "dp";
    case Metric::eo: return "eo";
    case Metric::pqp: return "pqp";
    case Metric::tpr_a: return "tpr_a";
    case Metric::tpr_d: return "tpr_d";
    case Metric::rd: return "rd";
    case Metric::sd: return "sd";
    case Metric::sauc: return "sauc";
  }
  return "?";
}

Metric metric_from_name(const std::string& s) {
  for (Metric m : {Metric::ba, Metric::dp, Metric::eo, Metric::pqp, Metric::tpr_a, Metric::tpr_d,
                   Metric::rd, Metric::sd, Metric::sauc}) {
    if (s == metric_name(m)) return m;
  }
  fail(Errc::invalid_argument, "unknown metric '" + s + "'");
}

namespace {

const char* bias_axis_short(BiasKind k) {
  switch (k) {
    case BiasKind::underrepresentation: return "u";
    case BiasKind::label_flip: return "f";
    case BiasKind::proxy_add: return "rho";
    case BiasKind::proxy_drop: return "k";
  }
  return "?";
}

std::string format_level(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

bool is_detection_metric(Metric m) { return m == Metric::rd || m == Metric::sd || m == Metric::sauc; }

void check_axis_levels(BiasKind axis, const std::vector<double>& levels) {
  if (levels.empty()) fail(Errc::invalid_argument, "levels must be non-empty");
  if (!std::is_sorted(levels.begin(), levels.end())) {
    fail(Errc::invalid_argument, "levels must be sorted ascending");
  }
  for (double v : levels) {
    if (!std::isfinite(v)) fail(Errc::invalid_argument, "levels must be finite");
    if (axis == BiasKind::proxy_drop) {
      if (v < 0.0 || v != std::floor(v)) {
        fail(Errc::invalid_argument, "proxy_drop levels must be non-negative integers");
      }
    } else if (v < 0.0 || v > 1.0) {
      fail(Errc::invalid_argument, "levels must lie in [0, 1]");
    }
  }
}

}  // namespace

std::string LevelKey::label(BiasKind axis1, std::optional<BiasKind> axis2) const {
  std::string out = std::string(bias_axis_short(axis1)) + "=" + format_level(level1);
  if (level2 && axis2) {
    out += std::string("|") + bias_axis_short(*axis2) + "=" + format_level(*level2);
  }
  return out;
}

std::size_t ResultCell::available() const {
  std::size_t c = 0;
  for (const auto& v : values) c += v.has_value();
  return c;
}

const ResultCell& ExperimentResult::cell(std::size_t level, Metric m) const {
  for (std::size_t j = 0; j < metrics.size(); ++j) {
    if (metrics[j] == m) return cells[level][j];
  }
  fail(Errc::invalid_argument, std::string("metric ") + metric_name(m) + " not in result");
}

void ExperimentConfig::validate(GridMode mode) const {
  if (repetitions < 1) fail(Errc::invalid_argument, "repetitions must be >= 1");
  if (metrics.empty()) fail(Errc::invalid_argument, "metrics must be non-empty");
  check_axis_levels(bias_axis, levels);
  if (second_axis) {
    if (*second_axis == bias_axis) fail(Errc::invalid_argument, "joint axes must be distinct");
    if (mode == GridMode::detection) {
      fail(Errc::invalid_argument, "detection grids support a single axis");
    }
    check_axis_levels(*second_axis, second_levels);
  }
  for (Metric m : metrics) {
    if (mode == GridMode::fairness && is_detection_metric(m)) {
      fail(Errc::invalid_argument, std::string("metric ") + metric_name(m) +
                                       " is a detection measure; use a detection grid");
    }
    if (mode == GridMode::detection && !is_detection_metric(m)) {
      fail(Errc::invalid_argument, std::string("metric ") + metric_name(m) +
                                       " is not available in detection grids");
    }
  }
  const double sum = split_fractions[0] + split_fractions[1] + split_fractions[2];
  if (split_fractions[0] <= 0 || split_fractions[1] <= 0 || split_fractions[2] <= 0 ||
      std::abs(sum - 1.0) > 1e-9) {
    fail(Errc::invalid_argument, "split fractions must be positive and sum to 1");
  }
}

std::string ExperimentConfig::to_json() const {
  json j{{"data", data_path},
         {"schema", schema_path},
         {"sensitive_name", sensitive_name},
         {"model", json::parse(model.to_json())},
         {"bias_axis", bias_kind_name(bias_axis)},
         {"levels", levels},
         {"repetitions", repetitions},
         {"base_seed", base_seed},
         {"split_fractions", split_fractions},
         {"metrics", json::array()}};
  for (Metric m : metrics) j["metrics"].push_back(metric_name(m));
  if (second_axis) {
    j["second_axis"] = bias_kind_name(*second_axis);
    j["second_levels"] = second_levels;
  }
  return j.dump(2) + "\n";
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json j = json::parse(text);
  ExperimentConfig c;
  c.data_path = j.value("data", "");
  c.schema_path = j.value("schema", "");
  c.sensitive_name = j.value("sensitive_name", "");
  if (j.contains("model")) c.model = TrainConfig::from_json(j.at("model").dump());
  c.bias_axis = bias_kind_from_name(j.at("bias_axis").get<std::string>());
  c.levels = j.at("levels").get<std::vector<double>>();
  if (j.contains("second_axis")) {
    c.second_axis = bias_kind_from_name(j.at("second_axis").get<std::string>());
    c.second_levels = j.value("second_levels", std::vector<double>{});
  }
  c.repetitions = j.value("repetitions", 10);
  c.base_seed = j.value("base_seed", std::uint64_t{0});
  if (j.contains("split_fractions")) {
    const auto fr = j.at("split_fractions").get<std::vector<double>>();
    if (fr.size() != 3) fail(Errc::invalid_argument, "split_fractions must have three entries");
    c.split_fractions = {fr[0], fr[1], fr[2]};
  }
  if (j.contains("metrics")) {
    for (const auto& m : j.at("metrics")) c.metrics.push_back(metric_from_name(m.get<std::string>()));
  }
  return c;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io_error, "cannot open experiment config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

namespace {

struct LevelPlan {
  LevelKey key;
  double underrep = 0.0;
  double flip = 0.0;
  double proxy_rho = 0.0;
  int proxy_drop = 0;

  void set(BiasKind kind, double level) {
    switch (kind) {
      case BiasKind::underrepresentation: underrep = level; break;
      case BiasKind::label_flip: flip = level; break;
      case BiasKind::proxy_add: proxy_rho = level; break;
      case BiasKind::proxy_drop: proxy_drop = static_cast<int>(level); break;
    }
  }
};

std::vector<LevelPlan> build_plans(const ExperimentConfig& config, GridMode mode,
                                   std::vector<std::string>* notes) {
  auto resolve = [&](BiasKind axis, double level) {
    // Extreme levels make the detection measures incomputable; the grid
    // substitutes 0.95 for 1.0.
    if (mode == GridMode::detection && level == 1.0 && axis != BiasKind::proxy_drop) {
      if (notes) {
        notes->push_back(std::string("level 1 on axis ") + bias_axis_short(axis) +
                         " substituted with 0.95");
      }
      return 0.95;
    }
    return level;
  };

  std::vector<LevelPlan> plans;
  for (double l1 : config.levels) {
    const double r1 = resolve(config.bias_axis, l1);
    if (config.second_axis) {
      for (double l2 : config.second_levels) {
        LevelPlan plan;
        plan.key = {r1, resolve(*config.second_axis, l2)};
        plan.set(config.bias_axis, r1);
        plan.set(*config.second_axis, plan.key.level2.value());
        plans.push_back(plan);
      }
    } else {
      LevelPlan plan;
      plan.key = {r1, std::nullopt};
      plan.set(config.bias_axis, r1);
      plans.push_back(plan);
    }
  }
  return plans;
}

std::vector<double> eigen_to_vec(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

/// Metrics for one trained fairness cell.
std::optional<double> fairness_metric(Metric metric, const EncodedMatrix& test,
                                      const std::vector<std::uint8_t>& yhat, std::string* error) {
  try {
    switch (metric) {
      case Metric::ba: return balanced_accuracy(test.y, yhat);
      case Metric::dp: return demographic_parity(yhat, test.s);
      case Metric::eo: return equal_opportunity(test.y, yhat, test.s);
      case Metric::pqp: return prediction_quality_parity(test.y, yhat, test.s);
      case Metric::tpr_a: return groupwise_tpr(test.y, yhat, test.s).first;
      case Metric::tpr_d: return groupwise_tpr(test.y, yhat, test.s).second;
      default: fail(Errc::invalid_argument, "not a fairness metric");
    }
  } catch (const Error& e) {
    *error = e.what();
    return std::nullopt;
  }
}

void assert_test_purity(const std::vector<std::size_t>& injected, const std::vector<std::size_t>& test,
                        std::size_t n) {
  std::vector<bool> is_test(n, false);
  for (std::size_t i : test) is_test[i] = true;
  for (std::size_t i : injected) {
    if (is_test[i]) fail(Errc::invalid_argument, "internal: injected index found in the test split");
  }
}

struct RepetitionOutput {
  std::vector<std::vector<std::optional<double>>> values;  // [plan][metric]
  std::vector<std::string> notes;
};

RepetitionOutput run_repetition_impl(const ExperimentConfig& config, const TabularDataset& dataset,
                                     GridMode mode, int repetition,
                                     const std::vector<LevelPlan>& plans) {
  const std::uint64_t seed = config.base_seed + static_cast<std::uint64_t>(repetition);
  RepetitionOutput out;
  out.values.assign(plans.size(), std::vector<std::optional<double>>(config.metrics.size()));

  auto note_cell_failure = [&](std::size_t plan_idx, Metric metric, const std::string& why) {
    out.notes.push_back("repetition " + std::to_string(repetition) + " level " +
                        plans[plan_idx].key.label(config.bias_axis, config.second_axis) + " metric " +
                        metric_name(metric) + " unavailable: " + why);
  };

  if (mode == GridMode::fairness) {
    const SplitIndices split = stratified_split(dataset, config.split_fractions, seed);
    for (std::size_t pi = 0; pi < plans.size(); ++pi) {
      const LevelPlan& plan = plans[pi];
      try {
        // Injection targets: train and validation rows, never test.
        std::vector<std::size_t> injectable = split.train;
        injectable.insert(injectable.end(), split.validation.begin(), split.validation.end());
        assert_test_purity(injectable, split.test, dataset.n());

        std::vector<std::size_t> surviving = injectable;
        if (plan.underrep > 0.0) {
          surviving = underrepresent(dataset, surviving, plan.underrep, seed).first;
        }

        const TabularDataset* working = &dataset;
        std::optional<TabularDataset> owned;
        if (plan.flip > 0.0) {
          owned = flip_labels(*working, surviving, plan.flip, seed).first;
          working = &*owned;
        }
        if (plan.proxy_rho > 0.0) {
          // An appended column necessarily exists for every row; the biasing
          // signal still reaches the model only through training rows.
          owned = add_proxy(*working, plan.proxy_rho, seed).first;
          working = &*owned;
        }

        // Train rows post-injection keep their split membership.
        std::vector<bool> in_train(dataset.n(), false);
        for (std::size_t i : split.train) in_train[i] = true;
        std::vector<std::size_t> train_rows;
        for (std::size_t i : surviving) {
          if (in_train[i]) train_rows.push_back(i);
        }
        if (train_rows.empty()) fail(Errc::empty_fit_set, "no training rows survive injection");

        const Encoder encoder = Encoder::fit(*working, train_rows);
        EncodedMatrix all = encoder.transform(*working);
        if (plan.proxy_drop >= 1) {
          all = drop_strongest_proxy(all, plan.proxy_drop, train_rows).reduced;
        }
        const EncodedMatrix train = all.select_rows(train_rows);
        const EncodedMatrix test = all.select_rows(split.test);

        TrainConfig model_config = config.model;
        model_config.seed = seed;
        const TrainedClassifier g = train_model(train.features, train.y, model_config);
        const Eigen::VectorXd probs = g.predict_proba(test.features);
        const std::vector<std::uint8_t> yhat = classify(probs, 0.5);

        for (std::size_t mi = 0; mi < config.metrics.size(); ++mi) {
          std::string why;
          out.values[pi][mi] = fairness_metric(config.metrics[mi], test, yhat, &why);
          if (!out.values[pi][mi]) note_cell_failure(pi, config.metrics[mi], why);
        }
      } catch (const Error& e) {
        for (std::size_t mi = 0; mi < config.metrics.size(); ++mi) {
          note_cell_failure(pi, config.metrics[mi], e.what());
        }
      }
    }
    return out;
  }

  // Detection mode: the bias lives in the practitioner's whole dataset.
  for (std::size_t pi = 0; pi < plans.size(); ++pi) {
    const LevelPlan& plan = plans[pi];
    try {
      std::vector<std::size_t> all_rows(dataset.n());
      for (std::size_t i = 0; i < all_rows.size(); ++i) all_rows[i] = i;

      const TabularDataset* working = &dataset;
      std::optional<TabularDataset> owned;
      if (plan.underrep > 0.0) {
        const auto survivors = underrepresent(dataset, all_rows, plan.underrep, seed).first;
        owned = dataset.select_rows(survivors);
        working = &*owned;
      }
      if (plan.flip > 0.0) {
        std::vector<std::size_t> rows(working->n());
        for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
        owned = flip_labels(*working, rows, plan.flip, seed).first;
        working = &*owned;
      }
      if (plan.proxy_rho > 0.0) {
        owned = add_proxy(*working, plan.proxy_rho, seed).first;
        working = &*owned;
      }

      std::optional<double> rd_value;
      try {
        rd_value = representation_difference(working->s());
      } catch (const Error&) {
        rd_value = std::nullopt;
      }

      const SplitIndices split = stratified_split(*working, config.split_fractions, seed);
      const Encoder encoder = Encoder::fit(*working, split.train);
      EncodedMatrix all = encoder.transform(*working);
      if (plan.proxy_drop >= 1) {
        all = drop_strongest_proxy(all, plan.proxy_drop, split.train).reduced;
      }
      const EncodedMatrix train = all.select_rows(split.train);
      const EncodedMatrix eval = all.select_rows(split.test);

      std::optional<double> sd_value, sauc_value;
      std::string sd_error, sauc_error;
      if (std::find(config.metrics.begin(), config.metrics.end(), Metric::sd) != config.metrics.end()) {
        try {
          TrainConfig g_config = config.model;
          g_config.seed = rng::derive_seed(seed, "experiment/g");
          const TrainedClassifier g = train_model(train.features, train.y, g_config);
          const auto scores = eigen_to_vec(g.predict_proba(eval.features));
          sd_value = separation_difference(scores, eval.y, eval.s);
        } catch (const Error& e) {
          sd_error = e.what();
        }
      }
      if (std::find(config.metrics.begin(), config.metrics.end(), Metric::sauc) !=
          config.metrics.end()) {
        try {
          TrainConfig h_config = config.model;
          h_config.seed = rng::derive_seed(seed, "experiment/h");
          const TrainedClassifier h = train_model(train.features, train.s, h_config);
          const auto scores = eigen_to_vec(h.predict_proba(eval.features));
          sauc_value = auc(scores, eval.s);
        } catch (const Error& e) {
          sauc_error = e.what();
        }
      }

      for (std::size_t mi = 0; mi < config.metrics.size(); ++mi) {
        switch (config.metrics[mi]) {
          case Metric::rd:
            out.values[pi][mi] = rd_value;
            if (!rd_value) note_cell_failure(pi, Metric::rd, "empty dataset after injection");
            break;
          case Metric::sd:
            out.values[pi][mi] = sd_value;
            if (!sd_value) note_cell_failure(pi, Metric::sd, sd_error);
            break;
          case Metric::sauc:
            out.values[pi][mi] = sauc_value;
            if (!sauc_value) note_cell_failure(pi, Metric::sauc, sauc_error);
            break;
          default: break;
        }
      }
    } catch (const Error& e) {
      for (std::size_t mi = 0; mi < config.metrics.size(); ++mi) {
        note_cell_failure(pi, config.metrics[mi], e.what());
      }
    }
  }
  return out;
}

ExperimentResult run_grid(const ExperimentConfig& config, const TabularDataset& dataset, GridMode mode,
                          int threads) {
  config.validate(mode);
  if (!config.sensitive_name.empty()) {
    const auto& declared = dataset.schema()[dataset.sensitive_col()].name;
    if (declared != config.sensitive_name) {
      fail(Errc::schema_mismatch,
           "dataset's sensitive column is '" + declared + "', config expects '" + config.sensitive_name + "'");
    }
  }

  const auto start = std::chrono::steady_clock::now();
  ExperimentResult result;
  result.dataset_id = config.data_path.empty() ? "dataset" : fs::path(config.data_path).stem().string();
  result.sensitive_name = dataset.schema()[dataset.sensitive_col()].name;
  result.model_name = model_kind_name(config.model.model_kind);
  result.bias_axis = config.bias_axis;
  result.second_axis = config.second_axis;
  result.metrics = config.metrics;

  const auto plans = build_plans(config, mode, &result.notes);
  for (const auto& plan : plans) result.levels.push_back(plan.key);
  for (int rep = 0; rep < config.repetitions; ++rep) {
    result.repetition_seeds.push_back(config.base_seed + static_cast<std::uint64_t>(rep));
  }

  std::vector<RepetitionOutput> outputs(static_cast<std::size_t>(config.repetitions));
  const int worker_count = std::max(1, std::min(threads, config.repetitions));
  if (worker_count == 1) {
    for (int rep = 0; rep < config.repetitions; ++rep) {
      outputs[static_cast<std::size_t>(rep)] = run_repetition_impl(config, dataset, mode, rep, plans);
    }
  } else {
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
      for (;;) {
        const int rep = next.fetch_add(1);
        if (rep >= config.repetitions) return;
        try {
          outputs[static_cast<std::size_t>(rep)] = run_repetition_impl(config, dataset, mode, rep, plans);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < worker_count; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  // Merge in repetition order so results are scheduling independent.
  result.cells.assign(plans.size(), std::vector<ResultCell>(config.metrics.size()));
  for (std::size_t pi = 0; pi < plans.size(); ++pi) {
    for (std::size_t mi = 0; mi < config.metrics.size(); ++mi) {
      auto& cell = result.cells[pi][mi];
      cell.values.resize(static_cast<std::size_t>(config.repetitions));
      for (int rep = 0; rep < config.repetitions; ++rep) {
        cell.values[static_cast<std::size_t>(rep)] = outputs[static_cast<std::size_t>(rep)].values[pi][mi];
      }
      std::vector<double> available;
      for (const auto& v : cell.values) {
        if (v) available.push_back(*v);
      }
      if (!available.empty()) {
        cell.mean = mean(available);
        cell.stddev = sample_std(available);
      }
    }
  }
  for (int rep = 0; rep < config.repetitions; ++rep) {
    auto& notes = outputs[static_cast<std::size_t>(rep)].notes;
    result.notes.insert(result.notes.end(), notes.begin(), notes.end());
  }

  // Significance of each level against the first level, per metric.
  for (std::size_t mi = 0; mi < config.metrics.size(); ++mi) {
    std::vector<double> baseline;
    for (const auto& v : result.cells[0][mi].values) {
      if (v) baseline.push_back(*v);
    }
    for (std::size_t pi = 1; pi < plans.size(); ++pi) {
      auto& cell = result.cells[pi][mi];
      std::vector<double> sample;
      for (const auto& v : cell.values) {
        if (v) sample.push_back(*v);
      }
      if (baseline.size() < 2 || sample.size() < 2) continue;
      const WelchResult w = welch_t_test(sample, baseline);
      cell.p_value = w.p;
      if (w.p < 0.01) {
        cell.significance = Significance::p01;
      } else if (w.p < 0.05) {
        cell.significance = Significance::p05;
      }
    }
  }

  result.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace

std::vector<std::vector<std::optional<double>>> run_single_repetition(
    const ExperimentConfig& config, const TabularDataset& dataset, GridMode mode, int repetition,
    std::vector<std::string>* notes) {
  config.validate(mode);
  if (repetition < 0 || repetition >= config.repetitions) {
    fail(Errc::invalid_argument, "repetition index out of range");
  }
  const auto plans = build_plans(config, mode, nullptr);
  auto out = run_repetition_impl(config, dataset, mode, repetition, plans);
  if (notes) notes->insert(notes->end(), out.notes.begin(), out.notes.end());
  return std::move(out.values);
}

ExperimentResult run_bias_grid(const ExperimentConfig& config, const TabularDataset& dataset,
                               int threads) {
  return run_grid(config, dataset, GridMode::fairness, threads);
}

ExperimentResult run_joint_grid(const ExperimentConfig& config, const TabularDataset& dataset,
                                BiasKind second_axis, const std::vector<double>& second_levels,
                                int threads) {
  ExperimentConfig joint = config;
  joint.second_axis = second_axis;
  joint.second_levels = second_levels;
  return run_grid(joint, dataset, GridMode::fairness, threads);
}

ExperimentResult run_detection_grid(const ExperimentConfig& config, const TabularDataset& dataset,
                                    int threads) {
  return run_grid(config, dataset, GridMode::detection, threads);
}

std::vector<JointDelta> joint_axis_delta(const ExperimentResult& result, Metric metric) {
  if (!result.second_axis) fail(Errc::invalid_argument, "result has no second axis");
  std::size_t metric_idx = result.metrics.size();
  for (std::size_t j = 0; j < result.metrics.size(); ++j) {
    if (result.metrics[j] == metric) metric_idx = j;
  }
  if (metric_idx == result.metrics.size()) {
    fail(Errc::invalid_argument, std::string("metric ") + metric_name(metric) + " not in result");
  }

  double low = std::numeric_limits<double>::infinity();
  double high = -std::numeric_limits<double>::infinity();
  std::vector<double> second_values;
  for (const auto& key : result.levels) {
    low = std::min(low, key.level1);
    high = std::max(high, key.level1);
    if (std::find(second_values.begin(), second_values.end(), *key.level2) == second_values.end()) {
      second_values.push_back(*key.level2);
    }
  }

  auto find_cell = [&](double l1, double l2) -> const ResultCell* {
    for (std::size_t i = 0; i < result.levels.size(); ++i) {
      if (result.levels[i].level1 == l1 && result.levels[i].level2 == l2) {
        return &result.cells[i][metric_idx];
      }
    }
    return nullptr;
  };

  std::vector<JointDelta> deltas;
  for (double l2 : second_values) {
    const ResultCell* top = find_cell(high, l2);
    const ResultCell* bottom = find_cell(low, l2);
    if (!top || !bottom) continue;
    JointDelta d;
    d.second_level = l2;
    d.values.resize(top->values.size());
    std::vector<double> diffs;
    for (std::size_t r = 0; r < top->values.size(); ++r) {
      if (top->values[r] && bottom->values[r]) {
        d.values[r] = *top->values[r] - *bottom->values[r];
        diffs.push_back(*d.values[r]);
      }
    }
    if (!diffs.empty()) {
      d.mean = mean(diffs);
      d.stddev = sample_std(diffs);
    }
    deltas.push_back(std::move(d));
  }
  return deltas;
}

namespace {

std::string format_cell(const ResultCell& cell) {
  if (!cell.mean) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f \xC2\xB1 %.4f", *cell.mean, cell.stddev.value_or(0.0));
  std::string out = buf;
  if (cell.significance == Significance::p01) {
    out += "**";
  } else if (cell.significance == Significance::p05) {
    out += "*";
  }
  return out;
}

}  // namespace

std::string emit_table(const ExperimentResult& result, TableFormat format) {
  std::vector<std::string> level_labels;
  for (const auto& key : result.levels) {
    level_labels.push_back(key.label(result.bias_axis, result.second_axis));
  }

  if (format == TableFormat::csv) {
    std::ostringstream out;
    out << "dataset,sensitive,model,metric";
    for (const auto& label : level_labels) out << ',' << csv::escape_field(label);
    out << '\n';
    for (std::size_t mi = 0; mi < result.metrics.size(); ++mi) {
      out << result.dataset_id << ',' << result.sensitive_name << ',' << result.model_name << ','
          << metric_name(result.metrics[mi]);
      for (std::size_t pi = 0; pi < result.levels.size(); ++pi) {
        out << ',' << csv::escape_field(format_cell(result.cells[pi][mi]));
      }
      out << '\n';
    }
    return out.str();
  }

  // Aligned text table.
  std::vector<std::vector<std::string>> grid;
  std::vector<std::string> header{"metric"};
  header.insert(header.end(), level_labels.begin(), level_labels.end());
  grid.push_back(header);
  for (std::size_t mi = 0; mi < result.metrics.size(); ++mi) {
    std::vector<std::string> row{metric_name(result.metrics[mi])};
    for (std::size_t pi = 0; pi < result.levels.size(); ++pi) {
      row.push_back(format_cell(result.cells[pi][mi]));
    }
    grid.push_back(row);
  }
  std::vector<std::size_t> widths(grid[0].size(), 0);
  auto display_width = [](const std::string& s) {
    // The plus-minus sign is two bytes but one column.
    std::size_t w = 0;
    for (unsigned char c : s) w += (c & 0xC0) != 0x80;
    return w;
  };
  for (const auto& row : grid) {
    for (std::size_t i = 0; i < row.size(); ++i) widths[i] = std::max(widths[i], display_width(row[i]));
  }
  std::ostringstream out;
  out << result.dataset_id << " / " << result.sensitive_name << " / " << result.model_name << "\n";
  for (const auto& row : grid) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      out << row[i] << std::string(widths[i] - display_width(row[i]) + 2, ' ');
    }
    out << '\n';
  }
  return out.str();
}

std::string repetitions_csv(const ExperimentResult& result) {
  std::ostringstream out;
  out << "repetition,seed,level,second_level,metric,value\n";
  char buf[64];
  for (std::size_t rep = 0; rep < result.repetition_seeds.size(); ++rep) {
    for (std::size_t pi = 0; pi < result.levels.size(); ++pi) {
      for (std::size_t mi = 0; mi < result.metrics.size(); ++mi) {
        out << rep << ',' << result.repetition_seeds[rep] << ',' << format_level(result.levels[pi].level1)
            << ',';
        if (result.levels[pi].level2) out << format_level(*result.levels[pi].level2);
        out << ',' << metric_name(result.metrics[mi]) << ',';
        const auto& v = result.cells[pi][mi].values[rep];
        if (v) {
          std::snprintf(buf, sizeof(buf), "%.17g", *v);
          out << buf;
        } else {
          out << "NA";
        }
        out << '\n';
      }
    }
  }
  return out.str();
}

namespace {

std::string now_iso8601_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::io_error, "cannot open " + path.string() + " for writing");
  out << content;
  if (!out) fail(Errc::io_error, "write failed for " + path.string());
}

json meta_json(const ExperimentConfig& config, GridMode mode, const std::string& status,
               const ExperimentResult* result) {
  json j{{"artifact_version", "0.1.0"},
         {"status", status},
         {"grid_mode", mode == GridMode::fairness ? "fairness" : "detection"},
         {"base_seed", config.base_seed},
         {"paired_seeds", true},
         {"created_at", now_iso8601_utc()}};
  if (result) {
    j["repetition_seeds"] = result->repetition_seeds;
    j["wall_time_seconds"] = result->wall_time_seconds;
    j["notes"] = result->notes;
  }
  return j;
}

}  // namespace

ExperimentResult run_experiment_to_dir(const ExperimentConfig& config, const TabularDataset& dataset,
                                       GridMode mode, const std::string& out_dir, int threads) {
  config.validate(mode);
  const fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(Errc::io_error, "cannot create " + out_dir + ": " + ec.message());

  write_text_file(dir / "config.json", config.to_json());
  write_text_file(dir / "meta.json", meta_json(config, mode, "incomplete", nullptr).dump(2) + "\n");

  try {
    ExperimentResult result = run_grid(config, dataset, mode, threads);
    write_text_file(dir / "summary.csv", emit_table(result, TableFormat::csv));
    write_text_file(dir / "repetitions.csv", repetitions_csv(result));
    write_text_file(dir / "meta.json", meta_json(config, mode, "complete", &result).dump(2) + "\n");
    return result;
  } catch (...) {
    // Leave no partial tables behind; the incomplete marker stays.
    fs::remove(dir / "summary.csv", ec);
    fs::remove(dir / "repetitions.csv", ec);
    throw;
  }
}

}  // namespace biaslens
