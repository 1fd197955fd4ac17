#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "biaslens/fetch.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <sstream>

#include "biaslens/csv.hpp"
#include "biaslens/error.hpp"

namespace biaslens {

namespace fs = std::filesystem;

namespace {

struct DatasetSource {
  std::string name;
  std::string default_base;  // scheme://host
  std::string path;          // request path
  std::string raw_filename;
};

const std::vector<DatasetSource>& sources() {
  static const std::vector<DatasetSource> kSources = {
      {"adult", "https://archive.ics.uci.edu", "/ml/machine-learning-databases/adult/adult.data",
       "adult.data"},
      {"german", "https://archive.ics.uci.edu",
       "/ml/machine-learning-databases/statlog/german/german.data", "german.data"},
      {"compas", "https://raw.githubusercontent.com",
       "/propublica/compas-analysis/master/compas-scores-two-years.csv", "compas-scores-two-years.csv"},
      {"crime", "https://archive.ics.uci.edu",
       "/ml/machine-learning-databases/communities/communities.data", "communities.data"},
  };
  return kSources;
}

const DatasetSource& source_for(const std::string& name) {
  for (const auto& s : sources()) {
    if (s.name == name) return s;
  }
  std::string known;
  for (const auto& s : sources()) known += (known.empty() ? "" : ", ") + s.name;
  fail(Errc::invalid_argument, "unknown dataset '" + name + "' (known: " + known + ")");
}

std::string trim_copy(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

void download(const std::string& base, const std::string& path, const fs::path& dest) {
  const fs::path part = dest.string() + ".part";
  std::error_code ec;
  fs::remove(part, ec);

  std::string body;
  {
    std::unique_ptr<httplib::Client> client;
    try {
      client = std::make_unique<httplib::Client>(base);
    } catch (const std::exception& e) {
      fail(Errc::network_error, "cannot reach " + base + ": " + e.what());
    }
    client->set_follow_location(true);
    client->set_connection_timeout(20, 0);
    client->set_read_timeout(60, 0);
    auto res = client->Get(path);
    if (!res) {
      fail(Errc::network_error, "download from " + base + path + " failed: " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
      fail(Errc::network_error,
           "download from " + base + path + " failed with HTTP " + std::to_string(res->status));
    }
    body = std::move(res->body);
  }
  if (body.empty()) fail(Errc::network_error, "download from " + base + path + " returned an empty body");

  {
    std::ofstream out(part, std::ios::binary);
    if (!out) fail(Errc::io_error, "cannot write " + part.string());
    out << body;
    if (!out) {
      fs::remove(part, ec);
      fail(Errc::io_error, "write failed for " + part.string());
    }
  }
  fs::rename(part, dest, ec);
  if (ec) {
    fs::remove(part, ec);
    fail(Errc::io_error, "cannot move download into place: " + dest.string());
  }
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

// ---- adult ----------------------------------------------------------------

const std::vector<std::string>& adult_columns() {
  static const std::vector<std::string> kCols = {
      "age",          "workclass",    "fnlwgt",       "education", "education-num",
      "marital-status", "occupation", "relationship", "race",      "sex",
      "capital-gain", "capital-loss", "hours-per-week", "native-country", "income"};
  return kCols;
}

void normalize_adult(const fs::path& raw, const fs::path& csv_path) {
  std::ifstream in(raw);
  if (!in) fail(Errc::io_error, "cannot open " + raw.string());
  std::vector<csv::Row> rows;
  std::string line;
  while (std::getline(in, line)) {
    line = trim_copy(line);
    if (line.empty() || line.front() == '|') continue;  // test-file preamble
    csv::Row row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(trim_copy(cell));
    if (row.size() != adult_columns().size()) continue;
    // The test portion of the dataset suffixes labels with a period.
    std::string& label = row.back();
    if (!label.empty() && label.back() == '.') label.pop_back();
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(Errc::empty_dataset, "no data rows in " + raw.string());
  csv::write_file(csv_path.string(), adult_columns(), rows);
}

std::vector<ColumnSpec> adult_schema(const std::string& variant) {
  const bool marital = variant == "marital-status";
  std::vector<ColumnSpec> schema;
  auto add = [&](const std::string& name, ColumnKind kind) {
    schema.push_back({.name = name, .role = ColumnRole::feature, .kind = kind});
  };
  add("age", ColumnKind::numeric);
  add("workclass", ColumnKind::categorical);
  add("fnlwgt", ColumnKind::numeric);
  add("education", ColumnKind::categorical);
  add("education-num", ColumnKind::numeric);
  if (marital) {
    ColumnSpec c{.name = "marital-status", .role = ColumnRole::sensitive, .kind = ColumnKind::categorical};
    c.advantaged_value = "Married-civ-spouse|Married-AF-spouse|Married-spouse-absent";
    schema.push_back(c);
  } else {
    add("marital-status", ColumnKind::categorical);
  }
  add("occupation", ColumnKind::categorical);
  add("relationship", ColumnKind::categorical);
  add("race", ColumnKind::categorical);
  if (marital) {
    add("sex", ColumnKind::categorical);
  } else {
    ColumnSpec c{.name = "sex", .role = ColumnRole::sensitive, .kind = ColumnKind::categorical};
    c.advantaged_value = "Male";
    c.disadvantaged_value = "Female";
    schema.push_back(c);
  }
  add("capital-gain", ColumnKind::numeric);
  add("capital-loss", ColumnKind::numeric);
  add("hours-per-week", ColumnKind::numeric);
  add("native-country", ColumnKind::categorical);
  {
    ColumnSpec c{.name = "income", .role = ColumnRole::target, .kind = ColumnKind::categorical};
    c.positive_value = ">50K";
    c.negative_value = "<=50K";
    schema.push_back(c);
  }
  return schema;
}

// ---- german ---------------------------------------------------------------

const std::vector<std::string>& german_columns() {
  static const std::vector<std::string> kCols = {
      "status",        "duration",       "credit_history", "purpose",
      "amount",        "savings",        "employment_duration", "installment_rate",
      "personal_status_sex", "other_debtors", "present_residence", "property",
      "age",           "other_installment_plans", "housing", "number_credits",
      "job",           "people_liable",  "telephone",      "foreign_worker",
      "credit_risk"};
  return kCols;
}

void normalize_german(const fs::path& raw, const fs::path& csv_path) {
  std::ifstream in(raw);
  if (!in) fail(Errc::io_error, "cannot open " + raw.string());
  std::vector<csv::Row> rows;
  std::string line;
  while (std::getline(in, line)) {
    auto tokens = split_ws(line);
    if (tokens.size() != german_columns().size()) continue;
    rows.push_back(std::move(tokens));
  }
  if (rows.empty()) fail(Errc::empty_dataset, "no data rows in " + raw.string());
  csv::write_file(csv_path.string(), german_columns(), rows);
}

std::vector<ColumnSpec> german_schema() {
  std::vector<ColumnSpec> schema;
  auto add = [&](const std::string& name, ColumnKind kind, ColumnRole role = ColumnRole::feature) {
    schema.push_back({.name = name, .role = role, .kind = kind});
  };
  add("status", ColumnKind::categorical);
  add("duration", ColumnKind::numeric);
  add("credit_history", ColumnKind::categorical);
  add("purpose", ColumnKind::categorical);
  add("amount", ColumnKind::numeric);
  add("savings", ColumnKind::categorical);
  add("employment_duration", ColumnKind::categorical);
  add("installment_rate", ColumnKind::categorical);
  add("personal_status_sex", ColumnKind::categorical, ColumnRole::ignored);
  add("other_debtors", ColumnKind::categorical);
  add("present_residence", ColumnKind::categorical);
  add("property", ColumnKind::categorical);
  {
    ColumnSpec c{.name = "age", .role = ColumnRole::sensitive, .kind = ColumnKind::numeric};
    c.advantaged_value = ">25";
    c.disadvantaged_value = "<=25";
    schema.push_back(c);
  }
  add("other_installment_plans", ColumnKind::categorical);
  add("housing", ColumnKind::categorical);
  add("number_credits", ColumnKind::categorical);
  add("job", ColumnKind::categorical);
  add("people_liable", ColumnKind::categorical);
  add("telephone", ColumnKind::categorical);
  add("foreign_worker", ColumnKind::categorical, ColumnRole::ignored);
  {
    ColumnSpec c{.name = "credit_risk", .role = ColumnRole::target, .kind = ColumnKind::categorical};
    c.positive_value = "1";  // good credit
    c.negative_value = "2";
    schema.push_back(c);
  }
  return schema;
}

// ---- compas ---------------------------------------------------------------

std::optional<double> parse_timestamp(const std::string& raw) {
  if (raw.empty()) return std::nullopt;
  std::tm tm{};
  std::istringstream ss(raw);
  ss >> std::get_time(&tm, "%Y-%m-%d %H:%M:%S");
  if (ss.fail()) {
    ss.clear();
    ss.str(raw);
    ss >> std::get_time(&tm, "%Y-%m-%d");
    if (ss.fail()) return std::nullopt;
  }
  return static_cast<double>(timegm(&tm));
}

std::string day_difference(const std::string& from, const std::string& to) {
  const auto a = parse_timestamp(from);
  const auto b = parse_timestamp(to);
  if (!a || !b) return "";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.0f", std::round((*b - *a) / 86400.0));
  return buf;
}

const std::vector<std::string>& compas_columns() {
  static const std::vector<std::string> kCols = {"race",         "age",          "c_charge_degree",
                                                 "diff_custody", "diff_jail",    "sex",
                                                 "priors_count", "length_of_stay", "v_score_text",
                                                 "two_year_recid"};
  return kCols;
}

void normalize_compas(const fs::path& raw, const fs::path& csv_path) {
  csv::Table table = csv::read_file(raw.string());
  auto col = [&](const std::string& name) {
    for (std::size_t i = 0; i < table.header.size(); ++i) {
      if (table.header[i] == name) return i;
    }
    fail(Errc::missing_column, "compas download lacks column '" + name + "'");
  };
  const std::size_t race = col("race"), age = col("age"), degree = col("c_charge_degree");
  const std::size_t in_custody = col("in_custody"), out_custody = col("out_custody");
  const std::size_t jail_in = col("c_jail_in"), jail_out = col("c_jail_out");
  const std::size_t sex = col("sex"), priors = col("priors_count");
  const std::size_t v_score = col("v_score_text"), recid = col("two_year_recid");

  std::vector<csv::Row> rows;
  for (const auto& r : table.rows) {
    // The audit compares Caucasian and African-American defendants only.
    if (r[race] != "Caucasian" && r[race] != "African-American") continue;
    csv::Row out;
    out.push_back(r[race]);
    out.push_back(r[age]);
    out.push_back(r[degree]);
    out.push_back(day_difference(r[in_custody], r[out_custody]));
    out.push_back(day_difference(r[jail_in], r[jail_out]));
    out.push_back(r[sex]);
    out.push_back(r[priors]);
    out.push_back(day_difference(r[jail_in], r[jail_out]));
    out.push_back(r[v_score]);
    out.push_back(r[recid]);
    rows.push_back(std::move(out));
  }
  if (rows.empty()) fail(Errc::empty_dataset, "no usable rows in " + raw.string());
  csv::write_file(csv_path.string(), compas_columns(), rows);
}

std::vector<ColumnSpec> compas_schema() {
  std::vector<ColumnSpec> schema;
  {
    ColumnSpec c{.name = "race", .role = ColumnRole::sensitive, .kind = ColumnKind::categorical};
    c.advantaged_value = "Caucasian";
    c.disadvantaged_value = "African-American";
    schema.push_back(c);
  }
  auto add = [&](const std::string& name, ColumnKind kind) {
    schema.push_back({.name = name, .role = ColumnRole::feature, .kind = kind});
  };
  add("age", ColumnKind::numeric);
  add("c_charge_degree", ColumnKind::categorical);
  add("diff_custody", ColumnKind::numeric);
  add("diff_jail", ColumnKind::numeric);
  add("sex", ColumnKind::categorical);
  add("priors_count", ColumnKind::numeric);
  add("length_of_stay", ColumnKind::numeric);
  add("v_score_text", ColumnKind::categorical);
  {
    // Positive class is the desirable outcome: no reoffense within two years.
    ColumnSpec c{.name = "two_year_recid", .role = ColumnRole::target, .kind = ColumnKind::categorical};
    c.positive_value = "0";
    c.negative_value = "1";
    schema.push_back(c);
  }
  return schema;
}

// ---- crime ----------------------------------------------------------------

constexpr std::size_t kCrimeColumns = 128;

std::vector<std::string> crime_columns() {
  // First five columns are non-predictive identifiers, the last is the
  // violent crime rate; racePctWhite sits at index 8. Remaining columns get
  // positional names.
  std::vector<std::string> cols(kCrimeColumns);
  for (std::size_t i = 0; i < kCrimeColumns; ++i) cols[i] = "attr_" + std::to_string(i);
  cols[0] = "state";
  cols[1] = "county";
  cols[2] = "community";
  cols[3] = "communityname";
  cols[4] = "fold";
  cols[5] = "population";
  cols[6] = "householdsize";
  cols[7] = "racepctblack";
  cols[8] = "racePctWhite";
  cols[kCrimeColumns - 1] = "ViolentCrimesPerPop";
  return cols;
}

std::vector<ColumnSpec> crime_schema_static() {
  const auto cols = crime_columns();
  std::vector<ColumnSpec> schema;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    ColumnSpec c{.name = cols[i], .role = ColumnRole::feature, .kind = ColumnKind::numeric};
    if (i <= 4) {
      c.role = ColumnRole::ignored;
      c.kind = ColumnKind::categorical;
    }
    if (cols[i] == "racePctWhite") {
      // Majority-Caucasian communities form the advantaged group.
      c.role = ColumnRole::sensitive;
      c.advantaged_value = ">0.5";
      c.disadvantaged_value = "<=0.5";
    }
    if (cols[i] == "ViolentCrimesPerPop") {
      c.role = ColumnRole::target;  // positive class filled in at fetch time
    }
    schema.push_back(c);
  }
  return schema;
}

void normalize_crime(const fs::path& raw, const fs::path& csv_path, std::vector<ColumnSpec>* schema) {
  std::ifstream in(raw);
  if (!in) fail(Errc::io_error, "cannot open " + raw.string());
  std::vector<csv::Row> rows;
  std::string line;
  while (std::getline(in, line)) {
    line = trim_copy(line);
    if (line.empty()) continue;
    csv::Row row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(trim_copy(cell));
    if (row.size() != kCrimeColumns) continue;
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(Errc::empty_dataset, "no data rows in " + raw.string());
  csv::write_file(csv_path.string(), crime_columns(), rows);

  // Low violent-crime communities (at or below the median rate) form the
  // positive class; columns that are mostly missing are ignored.
  std::vector<double> target_values;
  for (const auto& r : rows) {
    if (!is_missing_value(r.back())) target_values.push_back(std::strtod(r.back().c_str(), nullptr));
  }
  if (target_values.empty()) fail(Errc::empty_dataset, "crime target column is entirely missing");
  std::sort(target_values.begin(), target_values.end());
  const double median = target_values[target_values.size() / 2];
  char buf[48];
  std::snprintf(buf, sizeof(buf), "<=%.6g", median);
  for (auto& c : *schema) {
    if (c.role == ColumnRole::target) {
      c.positive_value = buf;
      std::snprintf(buf, sizeof(buf), ">%.6g", median);
      c.negative_value = buf;
    }
  }
  for (std::size_t col = 0; col < kCrimeColumns; ++col) {
    auto& spec = (*schema)[col];
    if (spec.role != ColumnRole::feature) continue;
    std::size_t missing = 0;
    for (const auto& r : rows) missing += is_missing_value(r[col]);
    if (missing * 2 > rows.size()) spec.role = ColumnRole::ignored;
  }
}

}  // namespace

const std::vector<std::string>& known_datasets() {
  static const std::vector<std::string> kNames = [] {
    std::vector<std::string> names;
    for (const auto& s : sources()) names.push_back(s.name);
    return names;
  }();
  return kNames;
}

std::vector<ColumnSpec> bundled_schema(const std::string& dataset, const std::string& variant) {
  if (dataset == "adult") return adult_schema(variant.empty() ? "gender" : variant);
  if (dataset == "german") return german_schema();
  if (dataset == "compas") return compas_schema();
  if (dataset == "crime") return crime_schema_static();
  fail(Errc::invalid_argument, "no bundled schema for dataset '" + dataset + "'");
}

std::string sha256_file_hex(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io_error, "cannot open " + path);
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in.good()) {
    in.read(buf, sizeof(buf));
    EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream out;
  for (unsigned int i = 0; i < len; ++i) {
    out << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return out.str();
}

FetchResult fetch_dataset(const std::string& name, const std::string& out_dir,
                          const FetchOptions& options) {
  const DatasetSource& src = source_for(name);
  const fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(Errc::io_error, "cannot create " + out_dir + ": " + ec.message());

  FetchResult result;
  const fs::path raw = dir / src.raw_filename;
  const fs::path csv_path = dir / (name + ".csv");
  result.raw_path = raw.string();
  result.csv_path = csv_path.string();

  auto verify_checksum = [&] {
    if (options.checksum_sha256.empty()) return;
    const std::string actual = sha256_file_hex(raw.string());
    if (actual != options.checksum_sha256) {
      fail(Errc::checksum_mismatch,
           "sha256 of " + raw.string() + " is " + actual + ", expected " + options.checksum_sha256);
    }
  };

  std::vector<fs::path> schema_files;
  if (name == "adult") {
    schema_files = {dir / "adult.schema.json", dir / "adult.marital-status.schema.json"};
  } else {
    schema_files = {dir / (name + ".schema.json")};
  }

  bool all_present = fs::exists(raw) && fs::file_size(raw, ec) > 0 && fs::exists(csv_path);
  for (const auto& p : schema_files) all_present = all_present && fs::exists(p);
  if (all_present) {
    verify_checksum();
    result.skipped = true;
    for (const auto& p : schema_files) result.schema_paths.push_back(p.string());
    return result;
  }

  const std::string base = options.base_url.empty() ? src.default_base : options.base_url;
  download(base, src.path, raw);
  verify_checksum();

  try {
    if (name == "adult") {
      normalize_adult(raw, csv_path);
      schema_to_json_file(adult_schema("gender"), schema_files[0].string());
      schema_to_json_file(adult_schema("marital-status"), schema_files[1].string());
    } else if (name == "german") {
      normalize_german(raw, csv_path);
      schema_to_json_file(german_schema(), schema_files[0].string());
    } else if (name == "compas") {
      normalize_compas(raw, csv_path);
      schema_to_json_file(compas_schema(), schema_files[0].string());
    } else if (name == "crime") {
      auto schema = crime_schema_static();
      normalize_crime(raw, csv_path, &schema);
      schema_to_json_file(schema, schema_files[0].string());
    }
  } catch (...) {
    // Do not leave a half-normalized dataset behind.
    fs::remove(raw, ec);
    fs::remove(csv_path, ec);
    for (const auto& p : schema_files) fs::remove(p, ec);
    throw;
  }

  for (const auto& p : schema_files) result.schema_paths.push_back(p.string());
  return result;
}

}  // namespace biaslens
