#include "padkit/format.hpp"

#include <array>
#include <charconv>
#include <cmath>

namespace padkit {
namespace {

std::string strip_negative_zero(std::string s) {
  if (!s.empty() && s[0] == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

}  // namespace

std::string format_fixed(double value, int decimals) {
  std::array<char, 512> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::fixed,
                           decimals);
  if (res.ec != std::errc{}) return "0";
  return strip_negative_zero(std::string(buf.data(), res.ptr));
}

std::string format_trimmed(double value, int max_decimals) {
  std::string s = format_fixed(value, max_decimals);
  if (s.find('.') != std::string::npos) {
    while (!s.empty() && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
  }
  return strip_negative_zero(s);
}

std::string format_shortest(double value) {
  std::array<char, 512> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::fixed);
  if (res.ec != std::errc{}) return "0";
  return strip_negative_zero(std::string(buf.data(), res.ptr));
}

bool parse_number(const std::string& text, double& out) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  auto res = std::from_chars(first, last, out);
  return res.ec == std::errc{} && res.ptr == last && std::isfinite(out);
}

}  // namespace padkit
