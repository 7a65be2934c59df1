#pragma once

#include <string>
#include <string_view>

namespace l4r {

std::string_view trim(std::string_view s) noexcept;
std::string ascii_lower(std::string_view s);

/// Decodes UTF-8 into code points. Invalid bytes decode to U+FFFD.
std::u32string utf8_decode(std::string_view s);
std::string utf8_encode(std::u32string_view s);

/// Simple case folding for ASCII, Latin-1, Latin Extended-A, Greek and
/// Cyrillic. Characters outside those blocks pass through unchanged.
char32_t lower_code_point(char32_t c) noexcept;
std::u32string lower(std::u32string_view s);
std::string utf8_lower(std::string_view s);

/// Fixed notation with at most `max_decimals` places, trailing zeros trimmed
/// but at least one digit after the point ("50.0", "49.9935"). Negative zero
/// prints as "0.0".
std::string format_decimal(double v, int max_decimals = 7);

/// Lowercase hex SHA-256 of the bytes.
std::string sha256_hex(std::string_view bytes);

}  // namespace l4r
