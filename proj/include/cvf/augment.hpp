#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cvf/consistency.hpp"
#include "cvf/select.hpp"
#include "cvf/vqa.hpp"

namespace cvf {

/// A question-type split: questions whose normalized tokens start with any of
/// the prefixes, or (when `counting` is set) counting questions.
struct QuestionTypeFilter {
  std::string name;
  std::vector<std::string> prefixes;
  bool counting = false;
};

// "what color is the", "is there a", "is this a", "how many", plus "counting".
std::vector<QuestionTypeFilter> default_question_filters();
std::optional<QuestionTypeFilter> find_question_filter(std::string_view name);

std::vector<IqaTriplet> filter_question_type(std::span<const IqaTriplet> triplets,
                                             const QuestionTypeFilter& filter);

enum class Composition { real, real_iv, real_cv, real_cv_iv };

std::string_view to_string(Composition composition);  // "real", "real+IV", ...
Composition parse_composition(std::string_view text);

struct AugmentationManifest {
  std::string name;
  Composition composition = Composition::real;
  bool strict = false;
  std::vector<QuestionId> real_question_ids;  // ascending
  std::vector<std::string> edit_ids;          // ascending, unique
};

// Throws Error(integrity) listing edits whose question is not in the subset.
// Strict manifests keep only edits with zero overlap.
AugmentationManifest build_manifest(std::string name, std::span<const IqaTriplet> subset,
                                    std::span<const EditRecord> edits, Composition composition,
                                    bool strict);

// Edits whose question belongs to the subset.
std::vector<EditRecord> edits_for_subset(std::span<const IqaTriplet> subset,
                                         std::span<const EditRecord> edits);

// Header line, then one {"kind": "real"|"edit", "id": ...} line per member.
void write_augmentation_manifest(const std::filesystem::path& path,
                                 const AugmentationManifest& manifest);

struct RelativeEntry {
  std::string scope;  // "overall" or a question type
  double flips_base = 0;
  double flips_aug = 0;
  double accuracy_base = 0;
  double accuracy_aug = 0;
  std::optional<double> flip_reduction_relative;  // undefined when flips_base == 0
  double accuracy_delta = 0;                       // percentage points
};

struct RelativeSummary {
  std::string model_name;
  std::vector<RelativeEntry> entries;
};

// Throws Error(validation) when the two reports were not computed over the
// same pairs.
RelativeSummary relative_summary(const ConsistencyReport& base, const ConsistencyReport& aug);

json relative_summary_to_json(const RelativeSummary& summary);
std::string format_relative_summary(const RelativeSummary& summary);

}  // namespace cvf
