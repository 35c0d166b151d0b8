#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cgm {

enum class Errc {
  io,
  malformed_header,
  unsupported_layout,
  count_mismatch,
  malformed_data,
  invalid_intrinsics,
  wrong_maxval,
  truncated_payload,
  missing_intrinsics,
  invalid_params,
  malformed_row,
  split_leak,
  bad_test_quality,
  shape_mismatch,
  empty_split,
  unreadable_frame,
  diverged_loss,
  version_mismatch,
  corrupt_weights,
  empty_input,
  non_positive_truth,
  negative_value,
  missing_round,
};

std::string_view to_string(Errc code) noexcept;

/// Exception carrying a machine-checkable error kind.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  [[nodiscard]] Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace cgm
