#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace zeus {

enum class ErrorCode {
  invalid_argument,
  invalid_grid,
  log_snr_undefined,
  degenerate_parameterization,
  shape_error,
  singular_conversion,
  invalid_mixture,
  invalid_state,
  singular_score,
  trace_desync,
  trace_format_error,
  past_end_of_trajectory,
  reference_requires_oracle,
  invalid_plan,
  history_underflow,
  gls_singular,
  invalid_metric,
  config_error,
  io_error,
  unknown_axis,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

  ErrorCode code() const noexcept { return code_; }
  /// Message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace zeus
