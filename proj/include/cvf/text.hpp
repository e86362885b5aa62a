#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cvf {

// Lowercase, trim, and collapse internal whitespace runs to a single space.
std::string normalize_answer(std::string_view text);

// Lowercase; apostrophes are deleted and every other ASCII punctuation
// character becomes whitespace; split on whitespace.
std::vector<std::string> tokenize(std::string_view text);

std::string join_tokens(const std::vector<std::string>& tokens);

/// Parses a count from a normalized answer. Accepts digit strings "0".."99"
/// and the English words "zero".."twenty". Everything else is not a number.
std::optional<int> parse_count(std::string_view answer);

}  // namespace cvf
