#pragma once

#include <string>
#include <string_view>
#include <vector>

// ASCII-only helpers shared by the parsers and matchers. Non-ASCII bytes
// pass through unchanged.
namespace fans::text {

std::string to_lower(std::string_view s);
std::string_view trim(std::string_view s) noexcept;
bool is_blank(std::string_view s) noexcept;
bool starts_with_icase(std::string_view s, std::string_view prefix) noexcept;
bool contains_icase(std::string_view haystack, std::string_view needle) noexcept;

std::vector<std::string> split_any(std::string_view s, std::string_view delimiters);
std::vector<std::string> split_whitespace(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Collapse every whitespace run to one space and trim the ends.
std::string collapse_whitespace(std::string_view s);

std::string replace_all(std::string_view s, std::string_view from, std::string_view to);

}  // namespace fans::text
