#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "biaslens/encode.hpp"
#include "biaslens/schema.hpp"

namespace biaslens {

enum class BiasKind { underrepresentation, label_flip, proxy_add, proxy_drop };

const char* bias_kind_name(BiasKind k);
BiasKind bias_kind_from_name(const std::string& s);

/// A validated bias-injection request. Exactly the parameter matching the
/// kind is meaningful; the factory functions keep the invariant.
struct BiasSpec {
  BiasKind kind;
  double u = 0.0;    // underrepresentation factor
  double f = 0.0;    // flip factor
  double rho = 0.0;  // target proxy correlation
  int k = 0;         // features to drop
  std::uint64_t seed = 0;

  static BiasSpec underrepresentation(double u, std::uint64_t seed);
  static BiasSpec label_flip(double f, std::uint64_t seed);
  static BiasSpec proxy_add(double rho, std::uint64_t seed);
  static BiasSpec proxy_drop(int k, std::uint64_t seed);

  double level() const;
};

struct InjectionReport {
  BiasKind kind = BiasKind::underrepresentation;
  std::size_t rows_removed = 0;
  std::size_t labels_flipped = 0;
  std::vector<std::string> columns_added;
  std::vector<std::string> columns_dropped;
  std::optional<double> realized_corr;
};

std::string injection_report_to_json(const InjectionReport& report);

/// Drops a u-fraction of the disadvantaged rows among target_indices; rows
/// with s=a always survive. Survivor order matches the input order.
std::pair<std::vector<std::size_t>, InjectionReport> underrepresent(const TabularDataset& dataset,
                                                                    std::span<const std::size_t> target_indices,
                                                                    double u, std::uint64_t seed);

/// Flips round(f * count) of the positive disadvantaged labels among
/// target_indices to negative. Returns a new dataset; the input is untouched.
std::pair<TabularDataset, InjectionReport> flip_labels(const TabularDataset& dataset,
                                                       std::span<const std::size_t> target_indices, double f,
                                                       std::uint64_t seed);

/// Appends a numeric column equal to the binary sensitive indicator plus
/// Gaussian noise sized so the population correlation with s is rho.
std::pair<TabularDataset, InjectionReport> add_proxy(const TabularDataset& dataset, double rho,
                                                     std::uint64_t seed);

struct ProxyDropResult {
  EncodedMatrix reduced;
  std::vector<std::string> dropped_encoded;  // encoded column names, drop order
  std::vector<std::string> dropped_sources;  // distinct source columns, drop order
  InjectionReport report;
};

/// Iteratively removes the encoded feature column most correlated (absolute
/// Pearson) with the sensitive indicator, k times. Indicator columns from the
/// same categorical source fall together in one iteration. When corr_rows is
/// non-empty, correlations are computed on that row subset only.
ProxyDropResult drop_strongest_proxy(const EncodedMatrix& matrix, int k,
                                     std::span<const std::size_t> corr_rows = {});

/// Rounding convention for fractional counts: half away from zero.
std::size_t round_count(double value);

}  // namespace biaslens
