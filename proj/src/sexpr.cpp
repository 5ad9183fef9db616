#include "padkit/sexpr.hpp"

#include "padkit/errors.hpp"

namespace padkit {
namespace {

constexpr int kMaxDepth = 512;

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

class Reader {
 public:
  explicit Reader(std::string_view text) : s_(text) {}

  SExpr read_one() {
    skip_space();
    if (pos_ >= s_.size()) throw ParseError("empty s-expression", pos_);
    SExpr e = expr(0);
    skip_space();
    if (pos_ < s_.size()) throw ParseError("trailing content after s-expression", pos_);
    return e;
  }

 private:
  void skip_space() {
    while (pos_ < s_.size() && is_space(s_[pos_])) ++pos_;
  }

  SExpr expr(int depth) {
    if (depth > kMaxDepth) throw ParseError("s-expression nested too deeply", pos_);
    SExpr e;
    e.offset = pos_;
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      for (;;) {
        skip_space();
        if (pos_ >= s_.size()) throw ParseError("unterminated list", e.offset);
        if (s_[pos_] == ')') {
          ++pos_;
          return e;
        }
        e.items.push_back(expr(depth + 1));
      }
    }
    if (c == ')') throw ParseError("unexpected ')'", pos_);
    if (c == '"') {
      e.kind = SExpr::Kind::string;
      ++pos_;
      for (;;) {
        if (pos_ >= s_.size()) throw ParseError("unterminated string", e.offset);
        const char d = s_[pos_++];
        if (d == '"') return e;
        if (d == '\\') {
          if (pos_ >= s_.size()) throw ParseError("unterminated escape", pos_);
          const char esc = s_[pos_++];
          e.text += esc == 'n' ? '\n' : esc;
        } else {
          e.text += d;
        }
      }
    }
    e.kind = SExpr::Kind::atom;
    while (pos_ < s_.size() && !is_space(s_[pos_]) && s_[pos_] != '(' && s_[pos_] != ')' &&
           s_[pos_] != '"') {
      e.text += s_[pos_++];
    }
    return e;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string_view SExpr::head() const {
  if (kind != Kind::list || items.empty() || items[0].kind != Kind::atom) return {};
  return items[0].text;
}

const SExpr* SExpr::find(std::string_view name) const {
  for (const auto& item : items) {
    if (item.head() == name) return &item;
  }
  return nullptr;
}

SExpr parse_sexpr(std::string_view text) { return Reader(text).read_one(); }

std::string quote_sexpr(std::string_view text) {
  std::string out = "\"";
  for (char c : text) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace padkit
