#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace biaslens::csv {

using Row = std::vector<std::string>;

/// RFC-4180 style parsing: comma delimiter, double-quote escaping, quoted
/// fields may contain commas, quotes, and newlines. Accepts LF and CRLF.
struct Table {
  Row header;
  std::vector<Row> rows;
};

Table read_file(const std::string& path);
Table read_stream(std::istream& in);

std::string escape_field(const std::string& field);
void write_file(const std::string& path, const Row& header, const std::vector<Row>& rows);

}  // namespace biaslens::csv
