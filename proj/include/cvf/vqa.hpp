#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cvf {

using QuestionId = std::int64_t;

inline constexpr int kDefaultAnswersPerQuestion = 10;

struct IqaTriplet {
  QuestionId question_id = 0;
  std::int64_t image_id = 0;
  std::string question_text;
  std::vector<std::string> answers;  // normalized
  std::string question_type;
  std::string majority_answer;
  bool uniform = false;
  bool counting = false;
  std::optional<int> numeric_answer;

  friend bool operator==(const IqaTriplet&, const IqaTriplet&) = default;
};

// Derives majority/uniform/counting/numeric fields from raw answers.
// Majority = most frequent normalized answer, ties to the lexicographically smallest.
IqaTriplet make_triplet(QuestionId question_id, std::int64_t image_id, std::string question_text,
                        std::span<const std::string> raw_answers, std::string question_type);

// True iff the normalized question has the token "many" or the phrase
// "number of", and the majority answer parses as a count.
bool detect_counting(std::string_view question_text, std::string_view majority_answer);

// Joins a VQA questions file and annotations file by question_id. An
// answers_per_question of 0 disables the answer-count check.
std::vector<IqaTriplet> load_questions_and_answers(
    const std::filesystem::path& questions_path, const std::filesystem::path& annotations_path,
    int answers_per_question = kDefaultAnswersPerQuestion);

std::vector<IqaTriplet> filter_uniform(std::span<const IqaTriplet> triplets);

struct CorpusSplit {
  std::string name;
  std::vector<QuestionId> question_ids;  // input order
};

struct SplitResult {
  CorpusSplit test;
  CorpusSplit val;
};

// Image-level split: images are ranked by a seeded hash of their id and the
// first round(ratio * n_images) go to test. Throws Error(validation) unless
// 0 < ratio < 1.
SplitResult split_val(std::span<const IqaTriplet> triplets, double ratio, std::uint64_t seed);

}  // namespace cvf
