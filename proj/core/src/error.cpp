#include "biaslens/error.hpp"

namespace biaslens {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::missing_column: return "MissingColumn";
    case Errc::unmappable_value: return "UnmappableValue";
    case Errc::empty_dataset: return "EmptyDataset";
    case Errc::empty_fit_set: return "EmptyFitSet";
    case Errc::schema_mismatch: return "SchemaMismatch";
    case Errc::degenerate_sensitive: return "DegenerateSensitive";
    case Errc::no_features_left: return "NoFeaturesLeft";
    case Errc::non_finite_loss: return "NonFiniteLoss";
    case Errc::shape_mismatch: return "ShapeMismatch";
    case Errc::missing_class: return "MissingClass";
    case Errc::no_positives_in_group: return "NoPositivesInGroup";
    case Errc::missing_group: return "MissingGroup";
    case Errc::missing_class_in_group: return "MissingClassInGroup";
    case Errc::empty_pair_set: return "EmptyPairSet";
    case Errc::degenerate_sample: return "DegenerateSample";
    case Errc::network_error: return "NetworkError";
    case Errc::checksum_mismatch: return "ChecksumMismatch";
    case Errc::io_error: return "IoError";
    case Errc::invalid_argument: return "InvalidArgument";
  }
  return "UnknownError";
}

}  // namespace biaslens
