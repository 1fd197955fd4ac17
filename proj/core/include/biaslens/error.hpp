#pragma once

#include <stdexcept>
#include <string>

namespace biaslens {

/// Error codes for every failure mode the library can signal.
enum class Errc {
  missing_column,
  unmappable_value,
  empty_dataset,
  empty_fit_set,
  schema_mismatch,
  degenerate_sensitive,
  no_features_left,
  non_finite_loss,
  shape_mismatch,
  missing_class,
  no_positives_in_group,
  missing_group,
  missing_class_in_group,
  empty_pair_set,
  degenerate_sample,
  network_error,
  checksum_mismatch,
  io_error,
  invalid_argument,
};

const char* errc_name(Errc c);

/// Exception carrying a typed error code. Callers branch on code(), messages
/// are for humans.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace biaslens
