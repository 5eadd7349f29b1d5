#include "zeus/error.hpp"

#include <string>

#include "zeus/types.hpp"

namespace zeus {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::invalid_grid: return "invalid-grid";
    case ErrorCode::log_snr_undefined: return "log-snr-undefined";
    case ErrorCode::degenerate_parameterization: return "degenerate-parameterization";
    case ErrorCode::shape_error: return "shape-error";
    case ErrorCode::singular_conversion: return "singular-conversion";
    case ErrorCode::invalid_mixture: return "invalid-mixture";
    case ErrorCode::invalid_state: return "invalid-state";
    case ErrorCode::singular_score: return "singular-score";
    case ErrorCode::trace_desync: return "trace-desync";
    case ErrorCode::trace_format_error: return "trace-format-error";
    case ErrorCode::past_end_of_trajectory: return "past-end-of-trajectory";
    case ErrorCode::reference_requires_oracle: return "reference-requires-oracle";
    case ErrorCode::invalid_plan: return "invalid-plan";
    case ErrorCode::history_underflow: return "history-underflow";
    case ErrorCode::gls_singular: return "gls-singular";
    case ErrorCode::invalid_metric: return "invalid-metric";
    case ErrorCode::config_error: return "config-error";
    case ErrorCode::io_error: return "io-error";
    case ErrorCode::unknown_axis: return "unknown-axis";
  }
  return "unknown-error";
}

void require_same_size(std::size_t a, std::size_t b, const char* where) {
  if (a != b) {
    throw Error(ErrorCode::shape_error, std::string(where) + ": dimension " +
                                            std::to_string(a) + " vs " + std::to_string(b));
  }
}

}  // namespace zeus
