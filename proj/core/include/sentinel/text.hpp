#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace sentinel::text {

/// Replaces invalid UTF-8 sequences with U+FFFD. Valid input is returned unchanged.
std::string sanitize_utf8(std::string_view bytes);

std::string to_lower_ascii(std::string_view s);

std::string_view trim(std::string_view s);
std::string_view trim_left(std::string_view s);
std::string_view trim_right(std::string_view s);

/// Splits on '\n'. A trailing newline yields a trailing empty element.
std::vector<std::string_view> split_lines(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Collapses whitespace runs to a single space and trims.
std::string normalize_whitespace(std::string_view s);

bool is_hex_sha(std::string_view s);

bool starts_with_ci(std::string_view s, std::string_view prefix);

} // namespace sentinel::text
