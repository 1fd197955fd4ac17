#include "biaslens/encode.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "biaslens/error.hpp"

namespace biaslens {

namespace {

double parse_numeric_cell(const std::string& raw, const std::string& column) {
  char* end = nullptr;
  errno = 0;
  double v = std::strtod(raw.c_str(), &end);
  if (errno != 0 || end == raw.c_str() || !std::isfinite(v)) {
    fail(Errc::unmappable_value, "non-numeric value '" + raw + "' in numeric column '" + column + "'");
  }
  return v;
}

}  // namespace

EncodedMatrix EncodedMatrix::select_rows(std::span<const std::size_t> rows) const {
  EncodedMatrix out;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
  out.y.resize(rows.size());
  out.s.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.features.row(static_cast<Eigen::Index>(i)) = features.row(static_cast<Eigen::Index>(rows[i]));
    out.y[i] = y[rows[i]];
    out.s[i] = s[rows[i]];
  }
  out.feature_names = feature_names;
  out.source_names = source_names;
  return out;
}

EncodedMatrix EncodedMatrix::drop_columns(const std::vector<std::size_t>& cols) const {
  std::vector<bool> drop(m(), false);
  for (std::size_t c : cols) drop.at(c) = true;
  std::vector<std::size_t> keep;
  for (std::size_t c = 0; c < m(); ++c) {
    if (!drop[c]) keep.push_back(c);
  }
  EncodedMatrix out;
  out.features.resize(features.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) {
    out.features.col(static_cast<Eigen::Index>(i)) = features.col(static_cast<Eigen::Index>(keep[i]));
    out.feature_names.push_back(feature_names[keep[i]]);
    out.source_names.push_back(source_names[keep[i]]);
  }
  out.y = y;
  out.s = s;
  return out;
}

Encoder Encoder::fit(const TabularDataset& dataset, std::span<const std::size_t> fit_indices) {
  if (fit_indices.empty()) fail(Errc::empty_fit_set, "encoder fit set is empty");
  for (std::size_t i : fit_indices) {
    if (i >= dataset.n()) fail(Errc::invalid_argument, "fit index out of range");
  }

  Encoder enc;
  for (const auto& c : dataset.schema()) enc.schema_names_.push_back(c.name);

  for (std::size_t col : dataset.feature_columns()) {
    const auto& spec = dataset.schema()[col];
    ColumnPlan plan;
    plan.name = spec.name;
    plan.kind = spec.kind;
    if (spec.kind == ColumnKind::numeric) {
      // Population mean/stddev over non-missing fit cells.
      double sum = 0.0;
      std::size_t count = 0;
      for (std::size_t i : fit_indices) {
        const auto& raw = dataset.cell(i, col);
        if (is_missing_value(raw)) continue;
        sum += parse_numeric_cell(raw, spec.name);
        ++count;
      }
      plan.mean = count > 0 ? sum / static_cast<double>(count) : 0.0;
      double sq = 0.0;
      for (std::size_t i : fit_indices) {
        const auto& raw = dataset.cell(i, col);
        if (is_missing_value(raw)) continue;
        const double d = parse_numeric_cell(raw, spec.name) - plan.mean;
        sq += d * d;
      }
      plan.stddev = count > 0 ? std::sqrt(sq / static_cast<double>(count)) : 1.0;
      if (plan.stddev == 0.0) {
        plan.stddev = 1.0;
        enc.warnings_.push_back("numeric column '" + spec.name + "' is constant on the fit set; stddev set to 1");
      }
    } else {
      std::set<std::string> seen;
      for (std::size_t i : fit_indices) {
        const auto& raw = dataset.cell(i, col);
        if (is_missing_value(raw)) continue;
        seen.insert(raw);
      }
      plan.categories.assign(seen.begin(), seen.end());
    }
    enc.plans_.push_back(std::move(plan));
  }
  return enc;
}

std::size_t Encoder::output_width() const {
  std::size_t m = 0;
  for (const auto& p : plans_) m += p.kind == ColumnKind::numeric ? 1 : p.categories.size();
  return m;
}

EncodedMatrix Encoder::transform(const TabularDataset& dataset) const {
  std::vector<std::size_t> all(dataset.n());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return transform(dataset, all);
}

EncodedMatrix Encoder::transform(const TabularDataset& dataset, std::span<const std::size_t> rows) const {
  // The dataset must expose the columns the encoder was fitted on, in order.
  std::vector<std::string> names;
  for (const auto& c : dataset.schema()) names.push_back(c.name);
  if (names != schema_names_) {
    fail(Errc::schema_mismatch, "dataset schema does not match the encoder's fitted schema");
  }

  EncodedMatrix out;
  const std::size_t m = output_width();
  out.features.setZero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(m));
  out.y.resize(rows.size());
  out.s.resize(rows.size());
  out.feature_names.reserve(m);
  out.source_names.reserve(m);
  for (const auto& p : plans_) {
    if (p.kind == ColumnKind::numeric) {
      out.feature_names.push_back(p.name);
      out.source_names.push_back(p.name);
    } else {
      for (const auto& cat : p.categories) {
        out.feature_names.push_back(p.name + "=" + cat);
        out.source_names.push_back(p.name);
      }
    }
  }

  const auto feature_cols = dataset.feature_columns();
  if (feature_cols.size() != plans_.size()) {
    fail(Errc::schema_mismatch, "feature column count changed since encoder fit");
  }

  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::size_t row = rows[r];
    if (row >= dataset.n()) fail(Errc::invalid_argument, "row index out of range");
    out.y[r] = dataset.y()[row];
    out.s[r] = dataset.s()[row];
    std::size_t offset = 0;
    for (std::size_t pi = 0; pi < plans_.size(); ++pi) {
      const auto& plan = plans_[pi];
      const std::string& raw = dataset.cell(row, feature_cols[pi]);
      if (plan.kind == ColumnKind::numeric) {
        // Missing numeric cells take the fit-set mean, i.e. 0 after scaling.
        double v = is_missing_value(raw) ? plan.mean : parse_numeric_cell(raw, plan.name);
        out.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(offset)) =
            (v - plan.mean) / plan.stddev;
        offset += 1;
      } else {
        if (!is_missing_value(raw)) {
          auto it = std::lower_bound(plan.categories.begin(), plan.categories.end(), raw);
          if (it != plan.categories.end() && *it == raw) {
            const std::size_t k = static_cast<std::size_t>(it - plan.categories.begin());
            out.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(offset + k)) = 1.0;
          }
          // Unseen categories leave the whole block at zero.
        }
        offset += plan.categories.size();
      }
    }
  }
  return out;
}

Encoder fit_encoder(const TabularDataset& dataset, std::span<const std::size_t> fit_indices) {
  return Encoder::fit(dataset, fit_indices);
}

EncodedMatrix encode(const TabularDataset& dataset, const Encoder& encoder) {
  return encoder.transform(dataset);
}

}  // namespace biaslens
