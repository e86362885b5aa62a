#pragma once

#include <filesystem>
#include <istream>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cvf/coco.hpp"

namespace cvf {

struct VocabRule {
  std::vector<std::string> tokens;  // lowercase, nonempty
  CategoryId category_id = 0;
  int line = 0;  // 0 for implicit canonical-name rules

  std::string phrase() const;
};

/// Phrase -> category mapping used to find the objects a question or answer
/// refers to. Rules are kept longest-phrase-first, then lexicographic, so the
/// order of the source file never matters.
class VocabularyTable {
 public:
  VocabularyTable() = default;
  VocabularyTable(std::vector<VocabRule> rules, std::string source);

  const std::vector<VocabRule>& rules() const noexcept { return rules_; }
  const std::string& source() const noexcept { return source_; }

  // Candidate rules whose first token may match `token` (exact or naive plural).
  std::vector<std::size_t> candidates(const std::string& token) const;

 private:
  std::vector<VocabRule> rules_;
  std::string source_;
  std::unordered_map<std::string, std::vector<std::size_t>> by_first_token_;
};

// File format: one category per line, "canonical name: synonym, synonym, ...".
// Blank lines and lines starting with '#' are ignored. Every category in
// `categories` also maps its own canonical name. Throws Error(validation)
// naming the line for unknown categories and duplicate phrases.
VocabularyTable parse_vocabulary(std::istream& in, const CategoryTable& categories,
                                 std::string source);
VocabularyTable load_vocabulary(const std::filesystem::path& path, const CategoryTable& categories);

// The default mapping rows, plus every canonical name.
std::string_view default_vocabulary_text();
VocabularyTable default_vocabulary(const CategoryTable& categories);

struct PhraseMatch {
  std::string phrase;  // rule phrase
  std::string text;    // matched tokens as they appeared
  CategoryId category_id = 0;
  std::string source;  // "question" or "answer"
  std::size_t token_index = 0;

  friend bool operator==(const PhraseMatch&, const PhraseMatch&) = default;
};

struct QaObjectSet {
  std::int64_t question_id = 0;
  std::set<CategoryId> categories;   // O_QA
  std::vector<PhraseMatch> matched;  // audit trail

  std::set<CategoryId> question_categories() const;
};

// Greedy longest-phrase-first scan of one token stream.
std::vector<PhraseMatch> match_phrases(const std::vector<std::string>& tokens,
                                       const VocabularyTable& table, std::string_view source);

// Question and answer are scanned independently and unioned.
QaObjectSet extract_qa_objects(std::string_view question_text, std::string_view answer_text,
                               const VocabularyTable& table);

}  // namespace cvf
