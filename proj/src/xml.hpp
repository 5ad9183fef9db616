#pragma once

// Small non-validating XML reader for the EDA pad-list dialect. Handles
// declarations, processing instructions, comments, CDATA, a DOCTYPE without
// an internal subset, attributes and the predefined/numeric entities.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace padkit::xml {

struct Element {
  std::string name;
  std::vector<std::pair<std::string, std::string>> attributes;
  std::vector<Element> children;
  std::size_t offset = 0;

  std::optional<std::string> attribute(std::string_view key) const {
    for (const auto& [k, v] : attributes) {
      if (k == key) return v;
    }
    return std::nullopt;
  }
};

/// Throws padkit::ParseError carrying the byte offset of the problem.
Element parse(std::string_view text);

/// Escape text for use inside a double-quoted attribute value.
std::string escape_attribute(std::string_view text);

}  // namespace padkit::xml
