#include "biaslens/detect.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "biaslens/encode.hpp"
#include "biaslens/error.hpp"
#include "biaslens/rng.hpp"

namespace biaslens {

using nlohmann::json;

double representation_difference(BinaryVec s) {
  if (s.empty()) fail(Errc::invalid_argument, "empty sensitive vector");
  std::size_t advantaged = 0;
  for (auto v : s) advantaged += v;
  const std::size_t disadvantaged = s.size() - advantaged;
  return (static_cast<double>(advantaged) - static_cast<double>(disadvantaged)) /
         static_cast<double>(s.size());
}

double delta_xauc(ScoreVec scores, BinaryVec labels, BinaryVec s) {
  return xauc(scores, labels, s, 1, 0) - xauc(scores, labels, s, 0, 1);
}

double delta_wauc(ScoreVec scores, BinaryVec labels, BinaryVec s) {
  std::vector<double> scores_a, scores_d;
  std::vector<std::uint8_t> labels_a, labels_d;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (s[i]) {
      scores_a.push_back(scores[i]);
      labels_a.push_back(labels[i]);
    } else {
      scores_d.push_back(scores[i]);
      labels_d.push_back(labels[i]);
    }
  }
  auto group_auc = [](const std::vector<double>& sc, const std::vector<std::uint8_t>& lb,
                      const char* group) {
    try {
      return auc(sc, lb);
    } catch (const Error& e) {
      if (e.code() == Errc::missing_class) {
        fail(Errc::missing_class_in_group, std::string("group ") + group + " lacks a class");
      }
      throw;
    }
  };
  return group_auc(scores_a, labels_a, "a") - group_auc(scores_d, labels_d, "d");
}

double separation_difference(ScoreVec scores, BinaryVec labels, BinaryVec s) {
  return 0.5 * (delta_xauc(scores, labels, s) + delta_wauc(scores, labels, s));
}

double sensitive_auc(const TabularDataset& dataset, const SplitIndices& split,
                     const TrainConfig& config) {
  auto has_both_groups = [&](const std::vector<std::size_t>& part) {
    bool a = false, d = false;
    for (std::size_t i : part) (dataset.s()[i] ? a : d) = true;
    return a && d;
  };
  if (!has_both_groups(split.train) || !has_both_groups(split.test)) {
    fail(Errc::missing_group, "both groups must appear in the train and evaluation parts");
  }

  const Encoder encoder = Encoder::fit(dataset, split.train);
  const EncodedMatrix train = encoder.transform(dataset, split.train);
  const EncodedMatrix eval = encoder.transform(dataset, split.test);

  const TrainedClassifier h = train_model(train.features, train.s, config);
  const Eigen::VectorXd scores = h.predict_proba(eval.features);
  const std::vector<double> score_vec(scores.data(), scores.data() + scores.size());
  return auc(score_vec, eval.s);
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

template <typename Fn>
auto annotate(const char* measure, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.code(), std::string("while computing ") + measure + ": " + e.what());
  }
}

}  // namespace

DataBiasProfile build_profile(const TabularDataset& dataset, const std::string& sensitive_name,
                              const ProfileConfig& config, std::uint64_t seed) {
  const auto& declared = dataset.schema()[dataset.sensitive_col()].name;
  if (!sensitive_name.empty() && sensitive_name != declared) {
    fail(Errc::schema_mismatch, "dataset's sensitive column is '" + declared + "', requested '" +
                                    sensitive_name + "'");
  }

  DataBiasProfile profile;
  profile.dataset_id = config.dataset_id;
  profile.sensitive_name = declared;
  profile.seed = seed;
  profile.split_fractions = config.split_fractions;

  TrainConfig digest_config = config.model;
  digest_config.seed = 0;  // the digest identifies hyperparameters; the seed is its own field
  profile.model_config_digest = digest_config.digest();

  profile.rd = annotate("rd", [&] { return representation_difference(dataset.s()); });

  const SplitIndices split =
      stratified_split(dataset, config.split_fractions, rng::derive_seed(seed, "profile/split"));

  const Encoder encoder = Encoder::fit(dataset, split.train);
  const EncodedMatrix train = encoder.transform(dataset, split.train);
  const EncodedMatrix eval = encoder.transform(dataset, split.test);

  {
    TrainConfig g_config = config.model;
    g_config.seed = rng::derive_seed(seed, "profile/g");
    const TrainedClassifier g =
        annotate("sd", [&] { return train_model(train.features, train.y, g_config); });
    const Eigen::VectorXd scores = g.predict_proba(eval.features);
    const std::vector<double> score_vec(scores.data(), scores.data() + scores.size());
    profile.delta_xauc = annotate("delta_xauc", [&] { return delta_xauc(score_vec, eval.y, eval.s); });
    profile.delta_wauc = annotate("delta_wauc", [&] { return delta_wauc(score_vec, eval.y, eval.s); });
    profile.sd = 0.5 * (profile.delta_xauc + profile.delta_wauc);
  }
  {
    TrainConfig h_config = config.model;
    h_config.seed = rng::derive_seed(seed, "profile/h");
    const TrainedClassifier h =
        annotate("sauc", [&] { return train_model(train.features, train.s, h_config); });
    const Eigen::VectorXd scores = h.predict_proba(eval.features);
    const std::vector<double> score_vec(scores.data(), scores.data() + scores.size());
    profile.sauc = annotate("sauc", [&] { return auc(score_vec, eval.s); });
  }

  profile.created_at = now_iso8601_utc();
  return profile;
}

std::string DataBiasProfile::to_json() const {
  json j{{"version", kProfileVersion},
         {"dataset_id", dataset_id},
         {"sensitive_name", sensitive_name},
         {"rd", rd},
         {"delta_xauc", delta_xauc},
         {"delta_wauc", delta_wauc},
         {"sd", sd},
         {"sauc", sauc},
         {"model_config_digest", model_config_digest},
         {"seed", seed},
         {"split_fractions", split_fractions},
         {"created_at", created_at}};
  return j.dump(2) + "\n";
}

DataBiasProfile DataBiasProfile::from_json(const std::string& text) {
  json j = json::parse(text);
  const std::string version = j.value("version", "");
  if (version != kProfileVersion) {
    fail(Errc::schema_mismatch, "profile version '" + version + "' is not '" + kProfileVersion + "'");
  }
  DataBiasProfile p;
  p.dataset_id = j.at("dataset_id").get<std::string>();
  p.sensitive_name = j.at("sensitive_name").get<std::string>();
  p.rd = j.at("rd").get<double>();
  p.delta_xauc = j.at("delta_xauc").get<double>();
  p.delta_wauc = j.at("delta_wauc").get<double>();
  p.sd = j.at("sd").get<double>();
  p.sauc = j.at("sauc").get<double>();
  p.model_config_digest = j.at("model_config_digest").get<std::string>();
  p.seed = j.at("seed").get<std::uint64_t>();
  const auto fr = j.at("split_fractions").get<std::vector<double>>();
  if (fr.size() != 3) fail(Errc::schema_mismatch, "split_fractions must have three entries");
  p.split_fractions = {fr[0], fr[1], fr[2]};
  p.created_at = j.value("created_at", "");
  if (p.sd != 0.5 * (p.delta_xauc + p.delta_wauc)) {
    fail(Errc::schema_mismatch, "sd field does not equal the mean of delta_xauc and delta_wauc");
  }
  if (p.sauc < 0.0 || p.sauc > 1.0 || p.rd < -1.0 || p.rd > 1.0) {
    fail(Errc::schema_mismatch, "profile measures out of range");
  }
  return p;
}

DataBiasProfile DataBiasProfile::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io_error, "cannot open profile " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

ProfileDiff compare_profiles(const DataBiasProfile& p1, const DataBiasProfile& p2,
                             const CompareThresholds& thresholds) {
  ProfileDiff d;
  d.rd = p1.rd - p2.rd;
  d.delta_xauc = p1.delta_xauc - p2.delta_xauc;
  d.delta_wauc = p1.delta_wauc - p2.delta_wauc;
  d.sd = p1.sd - p2.sd;
  d.sauc = p1.sauc - p2.sauc;
  if (d.sauc > thresholds.sauc_gap) d.classifications.push_back("stronger-proxy");
  if (d.sauc < -thresholds.sauc_gap) d.classifications.push_back("weaker-proxy");
  if (d.sd > thresholds.sd_gap) d.classifications.push_back("more-label-bias");
  if (d.sd < -thresholds.sd_gap) d.classifications.push_back("less-label-bias");
  if (d.rd > thresholds.rd_gap) d.classifications.push_back("more-underrepresented");
  if (d.rd < -thresholds.rd_gap) d.classifications.push_back("less-underrepresented");
  return d;
}

std::string ProfileDiff::to_json() const {
  json j{{"rd", rd},
         {"delta_xauc", delta_xauc},
         {"delta_wauc", delta_wauc},
         {"sd", sd},
         {"sauc", sauc},
         {"classifications", classifications}};
  return j.dump(2) + "\n";
}

std::string radar_svg(const std::vector<DataBiasProfile>& profiles) {
  constexpr double cx = 220.0, cy = 210.0, radius = 150.0;
  constexpr double kPi = 3.14159265358979323846;
  // RD on top, SD lower right, sAUC lower left.
  const double angles[3] = {-kPi / 2, kPi / 6, 5 * kPi / 6};
  const char* axis_labels[3] = {"RD", "SD", "sAUC"};
  static const char* kColors[] = {"#c0392b", "#2980b9", "#27ae60", "#8e44ad", "#d35400", "#16a085"};

  auto point = [&](int axis, double value) {
    const double r = radius * std::clamp(value, 0.0, 1.0);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f,%.2f", cx + r * std::cos(angles[axis]),
                  cy + r * std::sin(angles[axis]));
    return std::string(buf);
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"440\" height=\"420\" "
         "viewBox=\"0 0 440 420\">\n";
  svg << "  <rect width=\"440\" height=\"420\" fill=\"white\"/>\n";
  for (double ring : {0.25, 0.5, 0.75, 1.0}) {
    svg << "  <polygon points=\"" << point(0, ring) << " " << point(1, ring) << " " << point(2, ring)
        << "\" fill=\"none\" stroke=\"#cccccc\" stroke-width=\"1\"/>\n";
  }
  for (int axis = 0; axis < 3; ++axis) {
    svg << "  <line x1=\"" << cx << "\" y1=\"" << cy << "\" x2=\""
        << cx + radius * std::cos(angles[axis]) << "\" y2=\"" << cy + radius * std::sin(angles[axis])
        << "\" stroke=\"#999999\" stroke-width=\"1\" class=\"axis\"/>\n";
    const double lx = cx + (radius + 18) * std::cos(angles[axis]);
    const double ly = cy + (radius + 18) * std::sin(angles[axis]);
    svg << "  <text x=\"" << lx << "\" y=\"" << ly
        << "\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">" << axis_labels[axis]
        << "</text>\n";
  }
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    const auto& p = profiles[i];
    const double values[3] = {(p.rd + 1.0) / 2.0, (p.sd + 1.0) / 2.0, p.sauc};
    const char* color = kColors[i % (sizeof(kColors) / sizeof(kColors[0]))];
    svg << "  <polygon points=\"" << point(0, values[0]) << " " << point(1, values[1]) << " "
        << point(2, values[2]) << "\" fill=\"" << color << "\" fill-opacity=\"0.25\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    svg << "  <text x=\"16\" y=\"" << 24 + 18 * i
        << "\" font-family=\"sans-serif\" font-size=\"13\" fill=\"" << color << "\">" << p.dataset_id
        << " (" << p.sensitive_name << ")</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace biaslens
