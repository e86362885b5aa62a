#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cvf/io.hpp"
#include "cvf/select.hpp"
#include "cvf/vqa.hpp"

namespace cvf {

/// A model's answers keyed by record id: the question_id (as a decimal
/// string) for originals, the edit_id for edited records.
struct PredictionSet {
  std::string model_name;
  std::map<std::string, std::string> entries;  // normalized answers

  const std::string* find(const std::string& id) const;
};

// Line-delimited {"id": <int|string>, "answer": <string>}. Duplicate ids are an
// Error(integrity).
PredictionSet load_predictions(const std::filesystem::path& path, std::string model_name);

enum class FlipOutcome { consistent, pos_to_neg, neg_to_pos, neg_to_neg };

std::string_view to_string(FlipOutcome outcome);

// Invariant edit: the answer should not change.
FlipOutcome classify_iv(std::string_view orig_pred, std::string_view edit_pred,
                        std::string_view ground_truth);

// Covariant edit: the edited count should be one less than the original
// prediction. Non-numeric predictions are never correct and never consistent.
FlipOutcome classify_cv(std::string_view orig_pred, std::string_view edit_pred, int ground_truth_n);

struct FlipCounts {
  std::size_t pairs = 0;
  std::size_t consistent = 0;
  std::size_t pos_to_neg = 0;
  std::size_t neg_to_pos = 0;
  std::size_t neg_to_neg = 0;

  void add(FlipOutcome outcome);
  std::size_t flipped() const { return pos_to_neg + neg_to_pos + neg_to_neg; }
  double percent(std::size_t count) const {
    return pairs == 0 ? 0.0 : 100.0 * static_cast<double>(count) / static_cast<double>(pairs);
  }
  double flipped_percent() const { return percent(flipped()); }

  friend bool operator==(const FlipCounts&, const FlipCounts&) = default;
};

// Bins of 1% of image area over (0, 10%]; the last slot collects larger areas.
inline constexpr std::size_t kAreaBins = 10;
std::size_t area_bin(std::size_t area_pixels, std::size_t image_pixels);

inline constexpr std::size_t kDefaultAnswerVocabulary = 3000;

// Chance (in percent) that an uninformed perturbation turns a wrong answer
// into the right one: error_rate / vocabulary_size.
double random_flip_baseline(std::size_t answer_vocab_size, double orig_error_rate);

struct ConsistencyReport {
  EditMode mode = EditMode::iv;
  std::string model_name;
  std::size_t n_orig = 0;          // eligible originals with a prediction
  std::size_t n_orig_correct = 0;
  FlipCounts overall;
  std::map<std::string, FlipCounts> per_question_type;
  std::array<FlipCounts, kAreaBins + 1> per_area_bin{};
  std::size_t missing_orig = 0;    // pairs dropped: no original prediction
  std::size_t missing_edit = 0;    // pairs dropped: no edited prediction
  std::size_t orig_without_prediction = 0;
  std::size_t non_numeric = 0;     // CV pairs with a non-numeric prediction
  std::size_t answer_vocab_size = kDefaultAnswerVocabulary;
  std::string pair_digest;         // SHA-256 over the matched (question, edit) pairs
  std::vector<std::string> flipped_edit_ids;

  double accuracy_orig() const {
    return n_orig == 0 ? 0.0
                       : 100.0 * static_cast<double>(n_orig_correct) / static_cast<double>(n_orig);
  }
  double random_baseline() const {
    return random_flip_baseline(answer_vocab_size, 1.0 - accuracy_orig() / 100.0);
  }
};

struct ReportOptions {
  std::string model_name;
  std::size_t answer_vocab_size = kDefaultAnswerVocabulary;
};

// Accuracy is measured over the uniform (IV) or uniform counting (CV)
// triplets given; flips over every manifest record of `mode` whose two
// predictions exist. Throws Error(empty) when no pair survives.
ConsistencyReport compute_report(const PredictionSet& orig, const PredictionSet& edit,
                                 std::span<const EditRecord> manifest,
                                 std::span<const IqaTriplet> triplets, EditMode mode,
                                 const ReportOptions& options = {});

json report_to_json(const ConsistencyReport& report);
ConsistencyReport report_from_json(const json& doc);

// Two-decimal tables in the layout of the accuracy/flip summaries.
std::string format_report(const ConsistencyReport& report);

// Value as printed with two decimals, in hundredths (17.895 -> 1790).
long long to_hundredths(double value);

enum class Label { yes, no, ambiguous };

std::string_view to_string(Label label);
Label parse_label(std::string_view text);  // Error(validation) otherwise

// user -> edit_id -> label
using LabelTable = std::map<std::string, std::map<std::string, Label>>;

struct LabelShares {
  std::size_t yes = 0;
  std::size_t no = 0;
  std::size_t ambiguous = 0;
  std::size_t missing = 0;
  std::size_t items = 0;

  double percent(std::size_t n) const {
    return items == 0 ? 0.0 : 100.0 * static_cast<double>(n) / static_cast<double>(items);
  }

  friend bool operator==(const LabelShares&, const LabelShares&) = default;
};

struct AgreementReport {
  std::size_t items = 0;  // union of every user's labeled items
  std::vector<std::pair<std::string, LabelShares>> users;
  LabelShares all_users;  // every user gave this label
  LabelShares any_user;   // at least one user gave this label

  bool empty() const { return items == 0; }
  friend bool operator==(const AgreementReport&, const AgreementReport&) = default;
};

// Per-user shares use the shared item universe as denominator; an item a user
// did not label counts as missing for that user.
AgreementReport agreement_stats(const LabelTable& labels);

json agreement_to_json(const AgreementReport& report);
std::string format_agreement_table(const AgreementReport& report);

}  // namespace cvf
