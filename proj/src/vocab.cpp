#include "cvf/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "cvf/error.hpp"
#include "cvf/text.hpp"

namespace cvf {
namespace {

constexpr std::string_view kDefaultVocabulary = R"(# Object-referral vocabulary: canonical COCO name, then words that refer to it.
# Canonical names of all categories are added implicitly.
person: man, woman, player, child, girl, boy, people, lady, guy, kid, he, she, biker
bicycle: bike, cycle
fire hydrant: hydrant, hydrate, hydra
wine glass: wine, glass, beverage, drink
donut: doughnut, dough, eating, food, fruit
chair: furniture, seat
)";

bool plural_of(const std::string& token, const std::string& word) {
  if (token.size() == word.size() + 1) {
    return token.back() == 's' && token.compare(0, word.size(), word) == 0;
  }
  if (token.size() == word.size() + 2) {
    return token.compare(token.size() - 2, 2, "es") == 0 &&
           token.compare(0, word.size(), word) == 0;
  }
  return false;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::string VocabRule::phrase() const { return join_tokens(tokens); }

VocabularyTable::VocabularyTable(std::vector<VocabRule> rules, std::string source)
    : rules_(std::move(rules)), source_(std::move(source)) {
  std::sort(rules_.begin(), rules_.end(), [](const VocabRule& a, const VocabRule& b) {
    if (a.tokens.size() != b.tokens.size()) return a.tokens.size() > b.tokens.size();
    return a.tokens < b.tokens;
  });
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    by_first_token_[rules_[i].tokens.front()].push_back(i);
  }
}

std::vector<std::size_t> VocabularyTable::candidates(const std::string& token) const {
  std::vector<std::size_t> out;
  auto add = [&](const std::string& key) {
    if (auto it = by_first_token_.find(key); it != by_first_token_.end()) {
      out.insert(out.end(), it->second.begin(), it->second.end());
    }
  };
  add(token);
  if (token.size() > 1 && token.back() == 's') add(token.substr(0, token.size() - 1));
  if (token.size() > 2 && token.compare(token.size() - 2, 2, "es") == 0) {
    add(token.substr(0, token.size() - 2));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

VocabularyTable parse_vocabulary(std::istream& in, const CategoryTable& categories,
                                 std::string source) {
  std::vector<VocabRule> rules;
  std::map<std::vector<std::string>, int> seen;  // phrase -> defining line (0 = canonical)

  auto add_rule = [&](std::vector<std::string> tokens, CategoryId cat, int line) {
    if (tokens.empty()) {
      throw Error(ErrorKind::validation, source + ":" + std::to_string(line) + ": empty phrase");
    }
    auto [it, inserted] = seen.emplace(tokens, line);
    if (!inserted) {
      const std::string first = it->second == 0 ? "a canonical category name"
                                                : "line " + std::to_string(it->second);
      throw Error(ErrorKind::validation, source + ":" + std::to_string(line) + ": phrase '" +
                                             join_tokens(tokens) + "' duplicates " + first);
    }
    rules.push_back({std::move(tokens), cat, line});
  };

  for (const auto& c : categories.entries()) add_rule(tokenize(c.name), c.id, 0);

  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto colon = line.find(':');
    const std::string name = trim(std::string_view(line).substr(0, colon));
    const Category* cat = categories.find_by_name(name);
    if (cat == nullptr) {
      throw Error(ErrorKind::validation,
                  source + ":" + std::to_string(lineno) + ": unknown category '" + name + "'");
    }
    if (colon == std::string::npos) continue;
    std::stringstream rest(line.substr(colon + 1));
    std::string synonym;
    while (std::getline(rest, synonym, ',')) {
      if (trim(synonym).empty()) continue;
      add_rule(tokenize(synonym), cat->id, lineno);
    }
  }
  return VocabularyTable(std::move(rules), std::move(source));
}

VocabularyTable load_vocabulary(const std::filesystem::path& path,
                                const CategoryTable& categories) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open vocabulary " + path.string());
  return parse_vocabulary(in, categories, path.string());
}

std::string_view default_vocabulary_text() { return kDefaultVocabulary; }

VocabularyTable default_vocabulary(const CategoryTable& categories) {
  std::istringstream in{std::string(kDefaultVocabulary)};
  return parse_vocabulary(in, categories, "<default>");
}

std::set<CategoryId> QaObjectSet::question_categories() const {
  std::set<CategoryId> out;
  for (const auto& m : matched) {
    if (m.source == "question") out.insert(m.category_id);
  }
  return out;
}

std::vector<PhraseMatch> match_phrases(const std::vector<std::string>& tokens,
                                       const VocabularyTable& table, std::string_view source) {
  std::vector<PhraseMatch> out;
  const auto& rules = table.rules();
  std::size_t i = 0;
  while (i < tokens.size()) {
    const VocabRule* best = nullptr;
    bool best_exact = false;
    for (std::size_t r : table.candidates(tokens[i])) {
      const VocabRule& rule = rules[r];
      const std::size_t n = rule.tokens.size();
      if (best != nullptr && n < best->tokens.size()) break;  // candidates are longest-first
      if (i + n > tokens.size()) continue;
      bool ok = true;
      for (std::size_t k = 0; k + 1 < n && ok; ++k) ok = tokens[i + k] == rule.tokens[k];
      if (!ok) continue;
      const std::string& last = tokens[i + n - 1];
      const bool exact = last == rule.tokens.back();
      if (!exact && !plural_of(last, rule.tokens.back())) continue;
      if (best == nullptr || (exact && !best_exact)) {
        best = &rule;
        best_exact = exact;
      }
    }
    if (best == nullptr) {
      ++i;
      continue;
    }
    const std::size_t n = best->tokens.size();
    std::vector<std::string> text(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                  tokens.begin() + static_cast<std::ptrdiff_t>(i + n));
    out.push_back({best->phrase(), join_tokens(text), best->category_id, std::string(source), i});
    i += n;
  }
  return out;
}

QaObjectSet extract_qa_objects(std::string_view question_text, std::string_view answer_text,
                               const VocabularyTable& table) {
  QaObjectSet set;
  for (auto& m : match_phrases(tokenize(question_text), table, "question")) {
    set.matched.push_back(std::move(m));
  }
  for (auto& m : match_phrases(tokenize(answer_text), table, "answer")) {
    set.matched.push_back(std::move(m));
  }
  for (const auto& m : set.matched) set.categories.insert(m.category_id);
  return set;
}

}  // namespace cvf
