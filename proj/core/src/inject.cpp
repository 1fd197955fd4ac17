#include "biaslens/inject.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "biaslens/error.hpp"
#include "biaslens/rng.hpp"
#include "biaslens/synthetic.hpp"

namespace biaslens {

using nlohmann::json;

const char* bias_kind_name(BiasKind k) {
  switch (k) {
    case BiasKind::underrepresentation: return "underrepresentation";
    case BiasKind::label_flip: return "label_flip";
    case BiasKind::proxy_add: return "proxy_add";
    case BiasKind::proxy_drop: return "proxy_drop";
  }
  return "?";
}

BiasKind bias_kind_from_name(const std::string& s) {
  if (s == "underrepresentation") return BiasKind::underrepresentation;
  if (s == "label_flip") return BiasKind::label_flip;
  if (s == "proxy_add") return BiasKind::proxy_add;
  if (s == "proxy_drop") return BiasKind::proxy_drop;
  fail(Errc::invalid_argument, "unknown bias kind '" + s + "'");
}

BiasSpec BiasSpec::underrepresentation(double u, std::uint64_t seed) {
  if (u < 0.0 || u > 1.0) fail(Errc::invalid_argument, "underrepresentation factor must be in [0, 1]");
  return {.kind = BiasKind::underrepresentation, .u = u, .seed = seed};
}

BiasSpec BiasSpec::label_flip(double f, std::uint64_t seed) {
  if (f < 0.0 || f > 1.0) fail(Errc::invalid_argument, "flip factor must be in [0, 1]");
  return {.kind = BiasKind::label_flip, .f = f, .seed = seed};
}

BiasSpec BiasSpec::proxy_add(double rho, std::uint64_t seed) {
  if (rho <= 0.0 || rho > 1.0) {
    fail(Errc::invalid_argument, "proxy correlation must be in (0, 1]; model 'no proxy' as no injection");
  }
  return {.kind = BiasKind::proxy_add, .rho = rho, .seed = seed};
}

BiasSpec BiasSpec::proxy_drop(int k, std::uint64_t seed) {
  if (k < 1) fail(Errc::invalid_argument, "proxy drop count must be >= 1");
  return {.kind = BiasKind::proxy_drop, .k = k, .seed = seed};
}

double BiasSpec::level() const {
  switch (kind) {
    case BiasKind::underrepresentation: return u;
    case BiasKind::label_flip: return f;
    case BiasKind::proxy_add: return rho;
    case BiasKind::proxy_drop: return static_cast<double>(k);
  }
  return 0.0;
}

std::string injection_report_to_json(const InjectionReport& report) {
  json j{{"kind", bias_kind_name(report.kind)},
         {"rows_removed", report.rows_removed},
         {"labels_flipped", report.labels_flipped},
         {"columns_added", report.columns_added},
         {"columns_dropped", report.columns_dropped}};
  if (report.realized_corr) j["realized_corr"] = *report.realized_corr;
  return j.dump(2) + "\n";
}

std::size_t round_count(double value) {
  return static_cast<std::size_t>(std::llround(value));
}

std::pair<std::vector<std::size_t>, InjectionReport> underrepresent(const TabularDataset& dataset,
                                                                    std::span<const std::size_t> target_indices,
                                                                    double u, std::uint64_t seed) {
  if (u < 0.0 || u > 1.0) fail(Errc::invalid_argument, "underrepresentation factor must be in [0, 1]");
  InjectionReport report;
  report.kind = BiasKind::underrepresentation;

  // Positions (within target_indices) of disadvantaged rows.
  std::vector<std::size_t> d_positions;
  for (std::size_t p = 0; p < target_indices.size(); ++p) {
    const std::size_t row = target_indices[p];
    if (row >= dataset.n()) fail(Errc::invalid_argument, "index out of range");
    if (dataset.s()[row] == 0) d_positions.push_back(p);
  }

  const std::size_t keep_count = round_count((1.0 - u) * static_cast<double>(d_positions.size()));
  rng::Engine eng(rng::derive_seed(seed, "inject/underrepresent"));
  const auto kept_of_d = eng.sample_positions(d_positions.size(), keep_count);

  std::vector<bool> keep_position(target_indices.size(), true);
  for (std::size_t p : d_positions) keep_position[p] = false;
  for (std::size_t j : kept_of_d) keep_position[d_positions[j]] = true;

  std::vector<std::size_t> survivors;
  survivors.reserve(target_indices.size() - (d_positions.size() - keep_count));
  for (std::size_t p = 0; p < target_indices.size(); ++p) {
    if (keep_position[p]) survivors.push_back(target_indices[p]);
  }
  report.rows_removed = d_positions.size() - keep_count;
  return {std::move(survivors), report};
}

std::pair<TabularDataset, InjectionReport> flip_labels(const TabularDataset& dataset,
                                                       std::span<const std::size_t> target_indices, double f,
                                                       std::uint64_t seed) {
  if (f < 0.0 || f > 1.0) fail(Errc::invalid_argument, "flip factor must be in [0, 1]");
  InjectionReport report;
  report.kind = BiasKind::label_flip;

  std::vector<std::size_t> eligible;  // disadvantaged positives
  for (std::size_t row : target_indices) {
    if (row >= dataset.n()) fail(Errc::invalid_argument, "index out of range");
    if (dataset.s()[row] == 0 && dataset.y()[row] == 1) eligible.push_back(row);
  }

  const std::size_t flip_count = round_count(f * static_cast<double>(eligible.size()));
  rng::Engine eng(rng::derive_seed(seed, "inject/flip"));
  const auto chosen = eng.sample_positions(eligible.size(), flip_count);

  std::vector<std::size_t> rows_to_flip;
  rows_to_flip.reserve(flip_count);
  for (std::size_t j : chosen) rows_to_flip.push_back(eligible[j]);

  report.labels_flipped = rows_to_flip.size();
  return {dataset.with_flipped_targets(rows_to_flip), report};
}

std::pair<TabularDataset, InjectionReport> add_proxy(const TabularDataset& dataset, double rho,
                                                     std::uint64_t seed) {
  if (rho <= 0.0 || rho > 1.0) {
    fail(Errc::invalid_argument, "proxy correlation must be in (0, 1]; model 'no proxy' as no injection");
  }
  const double p = dataset.advantaged_share();
  if (p <= 0.0 || p >= 1.0) fail(Errc::degenerate_sensitive, "all rows belong to the same group");

  const double std_dev = proxy_noise_std(rho, p);
  rng::Engine eng(rng::derive_seed(seed, "inject/proxy"));

  std::vector<double> column(dataset.n());
  for (std::size_t i = 0; i < dataset.n(); ++i) {
    const double noise = std_dev > 0.0 ? std_dev * eng.normal() : 0.0;
    column[i] = static_cast<double>(dataset.s()[i]) + noise;
  }

  // Pick a column name that does not collide with the schema.
  std::string name = "proxy_feature";
  for (int suffix = 2;; ++suffix) {
    bool taken = false;
    for (const auto& c : dataset.schema()) taken |= (c.name == name);
    if (!taken) break;
    name = "proxy_feature_" + std::to_string(suffix);
  }

  // Realized Pearson correlation between the new column and s.
  double mean_c = 0.0;
  for (double v : column) mean_c += v;
  mean_c /= static_cast<double>(column.size());
  double cov = 0.0, var_c = 0.0, var_s = 0.0;
  for (std::size_t i = 0; i < column.size(); ++i) {
    const double dc = column[i] - mean_c;
    const double ds = static_cast<double>(dataset.s()[i]) - p;
    cov += dc * ds;
    var_c += dc * dc;
    var_s += ds * ds;
  }

  InjectionReport report;
  report.kind = BiasKind::proxy_add;
  report.columns_added.push_back(name);
  report.realized_corr = var_c > 0.0 ? cov / std::sqrt(var_c * var_s) : 1.0;
  return {dataset.with_numeric_column(name, column), report};
}

ProxyDropResult drop_strongest_proxy(const EncodedMatrix& matrix, int k,
                                     std::span<const std::size_t> corr_rows) {
  if (k < 1) fail(Errc::invalid_argument, "proxy drop count must be >= 1");

  // Row subset used for the correlation estimates.
  std::vector<std::size_t> rows;
  if (corr_rows.empty()) {
    rows.resize(matrix.n());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  } else {
    rows.assign(corr_rows.begin(), corr_rows.end());
  }

  double s_mean = 0.0;
  for (std::size_t r : rows) s_mean += matrix.s[r];
  s_mean /= static_cast<double>(rows.size());
  double s_var = 0.0;
  for (std::size_t r : rows) {
    const double d = matrix.s[r] - s_mean;
    s_var += d * d;
  }

  std::vector<bool> dropped(matrix.m(), false);
  ProxyDropResult out;
  out.report.kind = BiasKind::proxy_drop;

  auto abs_corr = [&](std::size_t col) {
    double mean = 0.0;
    for (std::size_t r : rows) mean += matrix.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(col));
    mean /= static_cast<double>(rows.size());
    double cov = 0.0, var = 0.0;
    for (std::size_t r : rows) {
      const double dx = matrix.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(col)) - mean;
      cov += dx * (matrix.s[r] - s_mean);
      var += dx * dx;
    }
    if (var <= 0.0 || s_var <= 0.0) return 0.0;
    return std::abs(cov / std::sqrt(var * s_var));
  };

  for (int iter = 0; iter < k; ++iter) {
    std::size_t best_col = matrix.m();
    double best = -1.0;
    for (std::size_t c = 0; c < matrix.m(); ++c) {
      if (dropped[c]) continue;
      const double a = abs_corr(c);
      if (a > best) {  // ties keep the lowest column index
        best = a;
        best_col = c;
      }
    }
    if (best_col == matrix.m()) fail(Errc::no_features_left, "no feature columns remain to drop");

    // Indicator blocks fall together with their source column.
    const std::string& source = matrix.source_names[best_col];
    for (std::size_t c = 0; c < matrix.m(); ++c) {
      if (!dropped[c] && matrix.source_names[c] == source) {
        dropped[c] = true;
        out.dropped_encoded.push_back(matrix.feature_names[c]);
      }
    }
    out.dropped_sources.push_back(source);
  }

  std::vector<std::size_t> drop_cols;
  for (std::size_t c = 0; c < matrix.m(); ++c) {
    if (dropped[c]) drop_cols.push_back(c);
  }
  out.reduced = matrix.drop_columns(drop_cols);
  out.report.columns_dropped = out.dropped_sources;
  return out;
}

}  // namespace biaslens
