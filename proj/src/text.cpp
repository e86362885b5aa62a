#include "cvf/text.hpp"

#include <array>
#include <cctype>

namespace cvf {
namespace {

constexpr std::array<std::string_view, 21> kNumberWords = {
    "zero",    "one",     "two",       "three",    "four",     "five",    "six",
    "seven",   "eight",   "nine",      "ten",      "eleven",   "twelve",  "thirteen",
    "fourteen", "fifteen", "sixteen",  "seventeen", "eighteen", "nineteen", "twenty"};

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

}  // namespace

std::string normalize_answer(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(lower(c));
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  for (char c : text) {
    if (c == '\'') continue;
    if (is_space(c) || std::ispunct(static_cast<unsigned char>(c))) {
      flush();
      continue;
    }
    current.push_back(lower(c));
  }
  flush();
  return tokens;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

std::optional<int> parse_count(std::string_view answer) {
  const std::string a = normalize_answer(answer);
  if (a.empty()) return std::nullopt;
  if (a.size() <= 2 && std::isdigit(static_cast<unsigned char>(a.front())) &&
      std::isdigit(static_cast<unsigned char>(a.back()))) {
    return std::stoi(a);
  }
  for (std::size_t i = 0; i < kNumberWords.size(); ++i) {
    if (a == kNumberWords[i]) return static_cast<int>(i);
  }
  return std::nullopt;
}

}  // namespace cvf
