#pragma once

#include <string>
#include <vector>

#include "biaslens/schema.hpp"

namespace biaslens {

struct FetchOptions {
  /// Override of the default source, e.g. "http://127.0.0.1:8080" for tests.
  /// Request paths stay the same.
  std::string base_url;
  /// Optional sha256 pin for the raw download (hex, lowercase).
  std::string checksum_sha256;
};

struct FetchResult {
  std::string raw_path;
  std::string csv_path;
  std::vector<std::string> schema_paths;
  bool skipped = false;  // everything already present and verified
};

const std::vector<std::string>& known_datasets();

/// Downloads the named public benchmark dataset into out_dir, normalizes it
/// to a CSV with header row, and writes the matching schema file(s) beside
/// it. Idempotent: verified existing files are not re-downloaded. A failed
/// download leaves no partial files behind.
FetchResult fetch_dataset(const std::string& name, const std::string& out_dir,
                          const FetchOptions& options = {});

/// The built-in schema for a dataset, before any data-driven adjustments.
/// Variants: "gender" (default) and "marital-status" for adult.
std::vector<ColumnSpec> bundled_schema(const std::string& dataset, const std::string& variant = "");

std::string sha256_file_hex(const std::string& path);

}  // namespace biaslens
