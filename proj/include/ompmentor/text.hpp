#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ompmentor::text {

/// Lowercases ASCII and the Latin-1 letters (À..Þ) used by Spanish content.
std::string to_lower(std::string_view utf8);

std::string_view trim(std::string_view s);
std::vector<std::string> split_whitespace(std::string_view s);
/// Splits on '\n'; a trailing newline does not add an empty line.
std::vector<std::string> split_lines(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view separator);

bool starts_with_ci(std::string_view s, std::string_view prefix);

}  // namespace ompmentor::text
