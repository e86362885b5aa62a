#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cvf/coco.hpp"
#include "cvf/mask.hpp"
#include "cvf/vocab.hpp"
#include "cvf/vqa.hpp"

namespace cvf {

enum class EditMode { iv, cv };

std::string_view to_string(EditMode mode);  // "IV" / "CV"
EditMode parse_edit_mode(std::string_view text);

// How the QA side of the overlap score is formed when several categories are
// mentioned: one mask over all of them, or the worst score over each one.
enum class QaMaskMode { union_all, per_category_max };

struct SelectionConfig {
  double area_threshold = 0.10;
  double iv_overlap_threshold = 0.10;
  double cv_overlap_threshold = 0.0;
  int dilate_radius = 3;
  bool strict_iv = false;  // IV overlap must be exactly zero
  bool dilate_target = true;
  bool dilate_qa = true;
  QaMaskMode qa_mask = QaMaskMode::union_all;

  // Throws Error(validation) for thresholds outside [0, 1] or a negative radius.
  void validate() const;
};

struct EditRecord {
  std::string edit_id;
  QuestionId question_id = 0;
  std::int64_t image_id = 0;
  EditMode mode = EditMode::iv;
  CategoryId target_category_id = 0;
  std::string target_category;
  std::vector<InstanceId> removed_instance_ids;
  Mask removal_mask;  // undilated union of removed instances
  std::string expected_answer;
  OverlapScore overlap;
  std::size_t area_pixels = 0;  // largest instance (IV) or the removed instance (CV)
  std::vector<PhraseMatch> provenance;
  std::string question;
  std::string question_type;
  std::string file_name;

  double overlap_value() const { return overlap.value(); }
  double area() const {
    return removal_mask.size() == 0
               ? 0.0
               : static_cast<double>(area_pixels) / static_cast<double>(removal_mask.size());
  }
};

// "<question_id:012>-<iv|cv>-<category:04>-<all|instance_id:08>"
std::string make_edit_id(QuestionId question, EditMode mode, CategoryId category,
                         std::optional<InstanceId> instance);

// Everything selection needs to know about one image.
struct ImageContext {
  const ImageRecord& image;
  const ImageObjects& objects;
  const InstanceMasks& masks;
  const CategoryTable& categories;
};

// Invariant edits: one record per category present in the image but not
// mentioned by the QA, whose largest instance is below the area threshold and
// whose dilated mask overlaps the dilated QA-object mask below the overlap
// threshold. Non-uniform triplets yield nothing. Throws Error(integrity) when
// an instance mask is missing.
std::vector<EditRecord> select_iv(const IqaTriplet& triplet, const ImageContext& image,
                                  const QaObjectSet& qa, const SelectionConfig& config);

struct CvSelection {
  std::vector<EditRecord> records;
  std::string skip_reason;  // empty unless the whole triplet was skipped
};

// Covariant edits for counting questions: one record per instance of the
// counted category that is small enough and isolated from the other instances.
CvSelection select_cv(const IqaTriplet& triplet, const ImageContext& image, const QaObjectSet& qa,
                      const SelectionConfig& config);

// Counts mirroring the real / realNE / edit partition of a selection run.
struct ManifestSummary {
  std::size_t real = 0;     // eligible triplets examined
  std::size_t real_ne = 0;  // eligible triplets yielding no edit
  std::size_t edits = 0;
  std::map<std::string, std::size_t> skipped;  // reason -> count

  friend bool operator==(const ManifestSummary&, const ManifestSummary&) = default;
};

struct SelectionRun {
  std::vector<EditRecord> records;  // edit_id ascending
  ManifestSummary summary;
};

// Runs one mode over a corpus. Triplets whose image is absent from the corpus
// are counted under the "image not in corpus" skip reason.
SelectionRun run_selection(EditMode mode, const CocoCorpus& corpus, const ImageObjectIndex& index,
                           std::span<const IqaTriplet> triplets, const VocabularyTable& vocab,
                           const SelectionConfig& config);

inline constexpr int kManifestSchemaVersion = 1;

json edit_to_json(const EditRecord& record);
EditRecord edit_from_json(const json& row);

// Line-delimited manifest sorted by edit_id. Returns the number of lines.
std::size_t emit_manifest(std::vector<EditRecord> records, const std::filesystem::path& path);
std::vector<EditRecord> load_manifest(const std::filesystem::path& path);

json summary_to_json(const ManifestSummary& summary);
std::string format_summary(const ManifestSummary& summary, EditMode mode);

}  // namespace cvf
