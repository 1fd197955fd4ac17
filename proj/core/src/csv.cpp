#include "biaslens/csv.hpp"

#include <fstream>
#include <sstream>

#include "biaslens/error.hpp"

namespace biaslens::csv {

namespace {

std::vector<Row> parse(std::istream& in) {
  std::vector<Row> records;
  Row current;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  bool record_started = false;

  auto end_field = [&] {
    current.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    records.push_back(std::move(current));
    current.clear();
    record_started = false;
  };

  char c;
  while (in.get(c)) {
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field += '"';
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        field_started = true;
        record_started = true;
        break;
      case ',':
        end_field();
        record_started = true;
        break;
      case '\r':
        break;
      case '\n':
        if (record_started || field_started || !field.empty() || !current.empty()) {
          end_record();
        }
        break;
      default:
        field += c;
        field_started = true;
        record_started = true;
        break;
    }
  }
  if (in_quotes) fail(Errc::io_error, "unterminated quoted field");
  if (record_started || !field.empty() || !current.empty()) end_record();
  return records;
}

}  // namespace

Table read_stream(std::istream& in) {
  auto records = parse(in);
  if (records.empty()) fail(Errc::empty_dataset, "no rows in CSV input");
  Table t;
  t.header = std::move(records.front());
  t.rows.assign(std::make_move_iterator(records.begin() + 1), std::make_move_iterator(records.end()));
  return t;
}

Table read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io_error, "cannot open " + path);
  return read_stream(in);
}

std::string escape_field(const std::string& field) {
  bool needs_quotes = field.find_first_of(",\"\n\r") != std::string::npos;
  if (!needs_quotes) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_file(const std::string& path, const Row& header, const std::vector<Row>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::io_error, "cannot open " + path + " for writing");
  auto write_row = [&](const Row& r) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i > 0) out << ',';
      out << escape_field(r[i]);
    }
    out << '\n';
  };
  write_row(header);
  for (const auto& r : rows) write_row(r);
  if (!out) fail(Errc::io_error, "write failed for " + path);
}

}  // namespace biaslens::csv
