#include "cgm/error.hpp"

namespace cgm {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::io: return "Io";
    case Errc::malformed_header: return "MalformedHeader";
    case Errc::unsupported_layout: return "UnsupportedLayout";
    case Errc::count_mismatch: return "CountMismatch";
    case Errc::malformed_data: return "MalformedData";
    case Errc::invalid_intrinsics: return "InvalidIntrinsics";
    case Errc::wrong_maxval: return "WrongMaxval";
    case Errc::truncated_payload: return "TruncatedPayload";
    case Errc::missing_intrinsics: return "MissingIntrinsics";
    case Errc::invalid_params: return "InvalidParams";
    case Errc::malformed_row: return "MalformedRow";
    case Errc::split_leak: return "SplitLeak";
    case Errc::bad_test_quality: return "BadTestQuality";
    case Errc::shape_mismatch: return "ShapeMismatch";
    case Errc::empty_split: return "EmptySplit";
    case Errc::unreadable_frame: return "UnreadableFrame";
    case Errc::diverged_loss: return "DivergedLoss";
    case Errc::version_mismatch: return "VersionMismatch";
    case Errc::corrupt_weights: return "CorruptWeights";
    case Errc::empty_input: return "EmptyInput";
    case Errc::non_positive_truth: return "NonPositiveTruth";
    case Errc::negative_value: return "NegativeValue";
    case Errc::missing_round: return "MissingRound";
  }
  return "Unknown";
}

}  // namespace cgm
