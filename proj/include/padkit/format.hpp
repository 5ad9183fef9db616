#pragma once

#include <string>

namespace padkit {

/// Fixed notation with exactly `decimals` digits after the point; "-0" is
/// written as "0". Locale-independent.
std::string format_fixed(double value, int decimals);

/// Rounded to at most `max_decimals` digits, trailing zeros (and a bare
/// point) removed: 1.270 -> "1.27", 5.40 -> "5.4", 2.0 -> "2".
std::string format_trimmed(double value, int max_decimals);

/// Shortest fixed-notation text that parses back to the same double.
std::string format_shortest(double value);

/// Parse a complete decimal number; false on trailing garbage or non-finite.
bool parse_number(const std::string& text, double& out);

}  // namespace padkit
