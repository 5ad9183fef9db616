#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace padkit {

/// Minimal s-expression tree: a node is either an atom (bare or quoted) or
/// a list.
struct SExpr {
  enum class Kind { atom, string, list };

  Kind kind = Kind::list;
  std::string text;
  std::vector<SExpr> items;
  std::size_t offset = 0;

  bool is_list() const { return kind == Kind::list; }
  /// Head symbol of a list, or empty.
  std::string_view head() const;
  /// First child list whose head equals `name`, or nullptr.
  const SExpr* find(std::string_view name) const;
};

/// Parse exactly one expression (surrounding whitespace allowed). Throws
/// ParseError with the byte offset on malformed input.
SExpr parse_sexpr(std::string_view text);

/// Quote a string for output, escaping backslashes and double quotes.
std::string quote_sexpr(std::string_view text);

}  // namespace padkit
