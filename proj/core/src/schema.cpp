#include "biaslens/schema.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "biaslens/error.hpp"

namespace biaslens {

using nlohmann::json;

const char* role_name(ColumnRole r) {
  switch (r) {
    case ColumnRole::feature: return "feature";
    case ColumnRole::target: return "target";
    case ColumnRole::sensitive: return "sensitive";
    case ColumnRole::ignored: return "ignored";
  }
  return "?";
}

const char* kind_name(ColumnKind k) {
  return k == ColumnKind::numeric ? "numeric" : "categorical";
}

ColumnRole role_from_name(const std::string& s) {
  if (s == "feature") return ColumnRole::feature;
  if (s == "target") return ColumnRole::target;
  if (s == "sensitive") return ColumnRole::sensitive;
  if (s == "ignored") return ColumnRole::ignored;
  fail(Errc::schema_mismatch, "unknown column role '" + s + "'");
}

ColumnKind kind_from_name(const std::string& s) {
  if (s == "numeric") return ColumnKind::numeric;
  if (s == "categorical") return ColumnKind::categorical;
  fail(Errc::schema_mismatch, "unknown column kind '" + s + "'");
}

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::optional<double> parse_number(const std::string& raw) {
  const std::string t = trim(raw);
  if (t.empty()) return std::nullopt;
  char* end = nullptr;
  errno = 0;
  double v = std::strtod(t.c_str(), &end);
  if (errno != 0 || end != t.c_str() + t.size()) return std::nullopt;
  return v;
}

}  // namespace

ValueMatcher ValueMatcher::parse(const std::string& spec) {
  ValueMatcher m;
  m.spec_ = spec;
  const std::string t = trim(spec);
  auto try_predicate = [&](const char* prefix, Op op) {
    if (t.rfind(prefix, 0) != 0) return false;
    auto num = parse_number(t.substr(std::string(prefix).size()));
    if (!num) fail(Errc::schema_mismatch, "bad numeric predicate '" + spec + "'");
    m.op_ = op;
    m.threshold_ = *num;
    return true;
  };
  if (try_predicate(">=", Op::ge) || try_predicate("<=", Op::le) || try_predicate(">", Op::gt) ||
      try_predicate("<", Op::lt)) {
    return m;
  }
  m.op_ = Op::any_of;
  std::stringstream ss(spec);
  std::string part;
  while (std::getline(ss, part, '|')) m.literals_.push_back(trim(part));
  if (m.literals_.empty()) m.literals_.push_back("");
  return m;
}

bool ValueMatcher::matches(const std::string& raw) const {
  if (op_ == Op::any_of) {
    const std::string t = trim(raw);
    return std::find(literals_.begin(), literals_.end(), t) != literals_.end();
  }
  auto v = parse_number(raw);
  if (!v) return false;
  switch (op_) {
    case Op::gt: return *v > threshold_;
    case Op::ge: return *v >= threshold_;
    case Op::lt: return *v < threshold_;
    case Op::le: return *v <= threshold_;
    default: return false;
  }
}

std::optional<std::string> ValueMatcher::representative() const {
  if (op_ != Op::any_of || literals_.empty()) return std::nullopt;
  return literals_.front();
}

bool is_missing_value(const std::string& raw) {
  const std::string t = trim(raw);
  return t.empty() || t == "?" || t == "NA" || t == "N/A" || t == "nan" || t == "NaN";
}

std::vector<ColumnSpec> schema_from_json_text(const std::string& text) {
  json j = json::parse(text);
  if (!j.is_array()) fail(Errc::schema_mismatch, "schema JSON must be an array of column objects");
  std::vector<ColumnSpec> schema;
  for (const auto& item : j) {
    ColumnSpec c;
    c.name = item.at("name").get<std::string>();
    c.role = role_from_name(item.at("role").get<std::string>());
    c.kind = kind_from_name(item.at("kind").get<std::string>());
    c.positive_value = item.value("positive_value", "");
    c.negative_value = item.value("negative_value", "");
    c.advantaged_value = item.value("advantaged_value", "");
    c.disadvantaged_value = item.value("disadvantaged_value", "");
    schema.push_back(std::move(c));
  }
  return schema;
}

std::vector<ColumnSpec> schema_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io_error, "cannot open schema file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return schema_from_json_text(ss.str());
}

std::string schema_to_json_text(const std::vector<ColumnSpec>& schema) {
  json arr = json::array();
  for (const auto& c : schema) {
    json item{{"name", c.name}, {"role", role_name(c.role)}, {"kind", kind_name(c.kind)}};
    if (!c.positive_value.empty()) item["positive_value"] = c.positive_value;
    if (!c.negative_value.empty()) item["negative_value"] = c.negative_value;
    if (!c.advantaged_value.empty()) item["advantaged_value"] = c.advantaged_value;
    if (!c.disadvantaged_value.empty()) item["disadvantaged_value"] = c.disadvantaged_value;
    arr.push_back(std::move(item));
  }
  return arr.dump(2) + "\n";
}

void schema_to_json_file(const std::vector<ColumnSpec>& schema, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(Errc::io_error, "cannot open " + path + " for writing");
  out << schema_to_json_text(schema);
}

namespace {

void validate_schema(const std::vector<ColumnSpec>& schema, std::size_t* target_col,
                     std::size_t* sensitive_col) {
  std::size_t targets = 0, sensitives = 0;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const auto& c = schema[i];
    const bool is_target = c.role == ColumnRole::target;
    const bool is_sensitive = c.role == ColumnRole::sensitive;
    if (is_target) {
      ++targets;
      *target_col = i;
    }
    if (is_sensitive) {
      ++sensitives;
      *sensitive_col = i;
    }
    if (is_target != !c.positive_value.empty()) {
      fail(Errc::schema_mismatch, "column '" + c.name + "': positive_value present iff role=target");
    }
    if (is_sensitive != !c.advantaged_value.empty()) {
      fail(Errc::schema_mismatch, "column '" + c.name + "': advantaged_value present iff role=sensitive");
    }
  }
  if (targets != 1) fail(Errc::schema_mismatch, "schema must declare exactly one target column");
  if (sensitives != 1) fail(Errc::schema_mismatch, "schema must declare exactly one sensitive column");
}

}  // namespace

TabularDataset TabularDataset::create(std::vector<ColumnSpec> schema, std::vector<csv::Row> rows) {
  TabularDataset d;
  validate_schema(schema, &d.target_col_, &d.sensitive_col_);
  if (rows.empty()) fail(Errc::empty_dataset, "dataset must contain at least one row");
  for (const auto& r : rows) {
    if (r.size() != schema.size()) {
      fail(Errc::schema_mismatch, "row width " + std::to_string(r.size()) + " does not match schema width " +
                                      std::to_string(schema.size()));
    }
  }
  d.schema_ = std::move(schema);
  d.rows_ = std::move(rows);
  d.derive_binary_columns();
  return d;
}

void TabularDataset::derive_binary_columns() {
  const auto& target_spec = schema_[target_col_];
  const auto& sens_spec = schema_[sensitive_col_];
  ValueMatcher pos = ValueMatcher::parse(target_spec.positive_value);
  std::optional<ValueMatcher> neg;
  if (!target_spec.negative_value.empty()) neg = ValueMatcher::parse(target_spec.negative_value);
  ValueMatcher adv = ValueMatcher::parse(sens_spec.advantaged_value);
  std::optional<ValueMatcher> dis;
  if (!sens_spec.disadvantaged_value.empty()) dis = ValueMatcher::parse(sens_spec.disadvantaged_value);

  y_.resize(rows_.size());
  s_.resize(rows_.size());
  std::map<std::string, std::size_t> negative_counts;
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const std::string& ty = rows_[i][target_col_];
    const std::string& ts = rows_[i][sensitive_col_];
    if (is_missing_value(ty)) {
      fail(Errc::unmappable_value, "row " + std::to_string(i) + ": missing target value");
    }
    if (is_missing_value(ts)) {
      fail(Errc::unmappable_value, "row " + std::to_string(i) + ": missing sensitive value");
    }
    if (pos.matches(ty)) {
      y_[i] = 1;
    } else if (!neg || neg->matches(ty)) {
      y_[i] = 0;
      negative_counts[ty]++;
    } else {
      fail(Errc::unmappable_value,
           "target value '" + ty + "' matches neither positive_value nor negative_value");
    }
    if (adv.matches(ts)) {
      s_[i] = 1;
    } else if (!dis || dis->matches(ts)) {
      s_[i] = 0;
    } else {
      fail(Errc::unmappable_value,
           "sensitive value '" + ts + "' matches neither advantaged_value nor disadvantaged_value");
    }
  }

  // The raw literal used when a label is flipped to negative: the declared
  // negative class if it names literals, otherwise the most frequent negative
  // value observed (ties broken lexicographically).
  if (neg) {
    if (auto rep = neg->representative()) negative_literal_ = *rep;
  }
  if (negative_literal_.empty()) {
    std::size_t best = 0;
    for (const auto& [value, count] : negative_counts) {
      if (count > best) {
        best = count;
        negative_literal_ = value;
      }
    }
  }
  if (negative_literal_.empty()) negative_literal_ = "not_" + target_spec.positive_value;
}

std::vector<std::size_t> TabularDataset::feature_columns() const {
  std::vector<std::size_t> cols;
  for (std::size_t i = 0; i < schema_.size(); ++i) {
    if (schema_[i].role == ColumnRole::feature) cols.push_back(i);
  }
  return cols;
}

double TabularDataset::advantaged_share() const {
  std::size_t count = 0;
  for (auto v : s_) count += v;
  return static_cast<double>(count) / static_cast<double>(s_.size());
}

TabularDataset TabularDataset::with_flipped_targets(const std::vector<std::size_t>& row_indices) const {
  TabularDataset d = *this;
  for (std::size_t r : row_indices) {
    d.rows_[r][target_col_] = negative_literal_;
    d.y_[r] = 0;
  }
  return d;
}

TabularDataset TabularDataset::with_numeric_column(const std::string& name,
                                                   const std::vector<double>& values) const {
  if (values.size() != n()) fail(Errc::shape_mismatch, "column length does not match row count");
  for (const auto& c : schema_) {
    if (c.name == name) fail(Errc::schema_mismatch, "column '" + name + "' already exists");
  }
  TabularDataset d = *this;
  ColumnSpec spec;
  spec.name = name;
  spec.role = ColumnRole::feature;
  spec.kind = ColumnKind::numeric;
  d.schema_.push_back(spec);
  std::ostringstream oss;
  for (std::size_t i = 0; i < values.size(); ++i) {
    oss.str("");
    oss.precision(17);
    oss << values[i];
    d.rows_[i].push_back(oss.str());
  }
  return d;
}

TabularDataset TabularDataset::without_columns(const std::vector<std::string>& names) const {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < schema_.size(); ++i) {
    const bool drop = std::find(names.begin(), names.end(), schema_[i].name) != names.end();
    if (drop && schema_[i].role != ColumnRole::feature) {
      fail(Errc::invalid_argument, "cannot drop non-feature column '" + schema_[i].name + "'");
    }
    if (!drop) keep.push_back(i);
  }
  TabularDataset d;
  for (std::size_t i : keep) d.schema_.push_back(schema_[i]);
  d.rows_.reserve(rows_.size());
  for (const auto& r : rows_) {
    csv::Row nr;
    nr.reserve(keep.size());
    for (std::size_t i : keep) nr.push_back(r[i]);
    d.rows_.push_back(std::move(nr));
  }
  validate_schema(d.schema_, &d.target_col_, &d.sensitive_col_);
  d.y_ = y_;
  d.s_ = s_;
  d.negative_literal_ = negative_literal_;
  return d;
}

TabularDataset TabularDataset::select_rows(std::span<const std::size_t> indices) const {
  if (indices.empty()) fail(Errc::empty_dataset, "row selection is empty");
  TabularDataset d;
  d.schema_ = schema_;
  d.target_col_ = target_col_;
  d.sensitive_col_ = sensitive_col_;
  d.negative_literal_ = negative_literal_;
  d.rows_.reserve(indices.size());
  d.y_.reserve(indices.size());
  d.s_.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= n()) fail(Errc::invalid_argument, "row index out of range");
    d.rows_.push_back(rows_[i]);
    d.y_.push_back(y_[i]);
    d.s_.push_back(s_[i]);
  }
  return d;
}

TabularDataset load_csv(const std::string& path, const std::vector<ColumnSpec>& schema,
                        LoadReport* report) {
  std::size_t target_col = 0, sensitive_col = 0;
  validate_schema(schema, &target_col, &sensitive_col);

  csv::Table table = csv::read_file(path);
  if (table.header.size() != schema.size()) {
    fail(Errc::missing_column, "header has " + std::to_string(table.header.size()) + " columns, schema has " +
                                   std::to_string(schema.size()));
  }
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (trim(table.header[i]) != schema[i].name) {
      fail(Errc::missing_column,
           "header column '" + table.header[i] + "' does not match schema column '" + schema[i].name + "'");
    }
  }

  std::vector<csv::Row> kept;
  kept.reserve(table.rows.size());
  std::size_t rejected = 0;
  for (auto& row : table.rows) {
    if (row.size() != schema.size()) {
      fail(Errc::schema_mismatch, "row with " + std::to_string(row.size()) + " cells in " + path);
    }
    if (is_missing_value(row[target_col]) || is_missing_value(row[sensitive_col])) {
      ++rejected;
      continue;
    }
    kept.push_back(std::move(row));
  }
  if (report) {
    report->rows_read = table.rows.size();
    report->rows_rejected = rejected;
  }
  if (kept.empty()) fail(Errc::empty_dataset, "no usable rows in " + path);
  return TabularDataset::create(schema, std::move(kept));
}

void save_csv(const TabularDataset& dataset, const std::string& path) {
  csv::Row header;
  for (const auto& c : dataset.schema()) header.push_back(c.name);
  csv::write_file(path, header, dataset.rows());
}

}  // namespace biaslens
