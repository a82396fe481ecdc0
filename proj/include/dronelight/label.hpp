#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace dronelight {

/// The five letters, in canonical order. The numeric value is the class index.
enum class Label : std::uint8_t { S = 0, K = 1, O = 2, L = 3, J = 4 };

inline constexpr std::size_t kLabelCount = 5;
inline constexpr std::array<Label, kLabelCount> kAllLabels = {Label::S, Label::K, Label::O,
                                                              Label::L, Label::J};

using ClassCounts = std::array<std::uint32_t, kLabelCount>;

constexpr std::size_t index_of(Label label) noexcept { return static_cast<std::size_t>(label); }

constexpr char to_char(Label label) noexcept {
  constexpr char kNames[] = {'S', 'K', 'O', 'L', 'J'};
  return kNames[index_of(label)];
}

constexpr std::string_view to_string(Label label) noexcept {
  constexpr std::string_view kNames[] = {"S", "K", "O", "L", "J"};
  return kNames[index_of(label)];
}

std::optional<Label> parse_label(std::string_view text) noexcept;

/// Like parse_label but throws Error(kUnknownLabel) naming the valid letters.
Label require_label(std::string_view text);

}  // namespace dronelight
