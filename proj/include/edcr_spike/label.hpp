#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace edcr_spike {

// Binary class of a day: price spike or not.
enum class Label : std::uint8_t { no = 0, spike = 1 };

using LabelVec = std::vector<Label>;

constexpr std::string_view to_string(Label l) { return l == Label::spike ? "spike" : "no"; }

constexpr Label other(Label l) { return l == Label::spike ? Label::no : Label::spike; }

std::optional<Label> parse_label(std::string_view token);

// Number of entries equal to `l`.
std::size_t count_label(std::span<const Label> v, Label l);

}  // namespace edcr_spike
