#include "dronelight/error.hpp"

#include <string>

#include "dronelight/label.hpp"

namespace dronelight {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kIo: return "io_error";
    case ErrorCode::kFormat: return "format_error";
    case ErrorCode::kNoGesture: return "no_gesture";
    case ErrorCode::kSignalTooShort: return "signal_too_short";
    case ErrorCode::kBadLength: return "bad_length";
    case ErrorCode::kEmptyCounts: return "empty_counts";
    case ErrorCode::kMissingClass: return "missing_class";
    case ErrorCode::kTooFewPerClass: return "too_few_per_class";
    case ErrorCode::kUnknownLabel: return "unknown_label";
    case ErrorCode::kFrameTooLow: return "frame_too_low";
    case ErrorCode::kDivergence: return "divergence";
    case ErrorCode::kPortInUse: return "port_in_use";
    case ErrorCode::kInternal: return "internal";
  }
  return "internal";
}

std::optional<Label> parse_label(std::string_view text) noexcept {
  for (Label label : kAllLabels) {
    if (text == to_string(label)) return label;
  }
  return std::nullopt;
}

Label require_label(std::string_view text) {
  if (auto label = parse_label(text)) return *label;
  throw Error(ErrorCode::kUnknownLabel,
              "unknown letter '" + std::string(text) + "' (valid letters: S, K, O, L, J)");
}

}  // namespace dronelight
