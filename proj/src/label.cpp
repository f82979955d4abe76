#include "edcr_spike/label.hpp"

#include <algorithm>

namespace edcr_spike {

std::optional<Label> parse_label(std::string_view token) {
  if (token == "1" || token == "spike") return Label::spike;
  if (token == "0" || token == "no") return Label::no;
  return std::nullopt;
}

std::size_t count_label(std::span<const Label> v, Label l) {
  return static_cast<std::size_t>(std::count(v.begin(), v.end(), l));
}

}  // namespace edcr_spike
