#include "cvf/augment.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>
#include <unordered_set>

#include "cvf/error.hpp"
#include "cvf/text.hpp"

namespace cvf {

std::vector<QuestionTypeFilter> default_question_filters() {
  return {
      {"what color is the", {"what color is the"}, false},
      {"is there a", {"is there a"}, false},
      {"is this a", {"is this a"}, false},
      {"how many", {"how many"}, false},
      {"counting", {}, true},
  };
}

std::optional<QuestionTypeFilter> find_question_filter(std::string_view name) {
  for (auto& f : default_question_filters()) {
    if (f.name == name) return f;
  }
  return std::nullopt;
}

std::vector<IqaTriplet> filter_question_type(std::span<const IqaTriplet> triplets,
                                             const QuestionTypeFilter& filter) {
  std::vector<std::vector<std::string>> prefixes;
  for (const auto& p : filter.prefixes) {
    auto tokens = tokenize(p);
    if (!tokens.empty()) prefixes.push_back(std::move(tokens));
  }
  std::vector<IqaTriplet> out;
  for (const auto& t : triplets) {
    bool keep = filter.counting && detect_counting(t.question_text, t.majority_answer);
    if (!keep && !prefixes.empty()) {
      const auto tokens = tokenize(t.question_text);
      for (const auto& p : prefixes) {
        if (tokens.size() >= p.size() && std::equal(p.begin(), p.end(), tokens.begin())) {
          keep = true;
          break;
        }
      }
    }
    if (keep) out.push_back(t);
  }
  return out;
}

std::string_view to_string(Composition c) {
  switch (c) {
    case Composition::real: return "real";
    case Composition::real_iv: return "real+IV";
    case Composition::real_cv: return "real+CV";
    case Composition::real_cv_iv: return "real+CV+IV";
  }
  return "real";
}

Composition parse_composition(std::string_view text) {
  std::string t = normalize_answer(text);
  if (t == "real") return Composition::real;
  if (t == "real+iv") return Composition::real_iv;
  if (t == "real+cv") return Composition::real_cv;
  if (t == "real+cv+iv" || t == "real+iv+cv") return Composition::real_cv_iv;
  throw Error(ErrorKind::validation, "unknown composition '" + std::string(text) +
                                         "' (expected real, real+IV, real+CV or real+CV+IV)");
}

std::vector<EditRecord> edits_for_subset(std::span<const IqaTriplet> subset,
                                         std::span<const EditRecord> edits) {
  std::unordered_set<QuestionId> ids;
  for (const auto& t : subset) ids.insert(t.question_id);
  std::vector<EditRecord> out;
  for (const auto& e : edits) {
    if (ids.count(e.question_id)) out.push_back(e);
  }
  return out;
}

AugmentationManifest build_manifest(std::string name, std::span<const IqaTriplet> subset,
                                    std::span<const EditRecord> edits, Composition composition,
                                    bool strict) {
  AugmentationManifest m;
  m.name = std::move(name);
  m.composition = composition;
  m.strict = strict;

  std::set<QuestionId> real;
  for (const auto& t : subset) real.insert(t.question_id);
  m.real_question_ids.assign(real.begin(), real.end());

  std::vector<std::string> dangling;
  for (const auto& e : edits) {
    if (!real.count(e.question_id)) dangling.push_back(e.edit_id);
  }
  if (!dangling.empty()) {
    std::string list;
    for (const auto& d : dangling) list += (list.empty() ? "" : ",") + d;
    throw Error(ErrorKind::integrity, "edits reference questions outside the subset: " + list);
  }

  const bool want_iv = composition == Composition::real_iv || composition == Composition::real_cv_iv;
  const bool want_cv = composition == Composition::real_cv || composition == Composition::real_cv_iv;
  std::set<std::string> chosen;
  for (const auto& e : edits) {
    const bool wanted = e.mode == EditMode::iv ? want_iv : want_cv;
    if (!wanted) continue;
    if (strict && !e.overlap.is_zero()) continue;
    chosen.insert(e.edit_id);
  }
  m.edit_ids.assign(chosen.begin(), chosen.end());
  return m;
}

void write_augmentation_manifest(const std::filesystem::path& path,
                                 const AugmentationManifest& m) {
  std::vector<json> rows;
  rows.push_back({{"kind", "header"},
                  {"name", m.name},
                  {"composition", std::string(to_string(m.composition))},
                  {"strict", m.strict},
                  {"real", m.real_question_ids.size()},
                  {"edit", m.edit_ids.size()}});
  for (auto id : m.real_question_ids) rows.push_back({{"kind", "real"}, {"id", id}});
  for (const auto& id : m.edit_ids) rows.push_back({{"kind", "edit"}, {"id", id}});
  write_jsonl_file(path, rows);
}

namespace {

RelativeEntry entry(std::string scope, const FlipCounts& base, const FlipCounts& aug,
                    double acc_base, double acc_aug) {
  RelativeEntry e;
  e.scope = std::move(scope);
  e.flips_base = base.flipped_percent();
  e.flips_aug = aug.flipped_percent();
  e.accuracy_base = acc_base;
  e.accuracy_aug = acc_aug;
  if (e.flips_base > 0) e.flip_reduction_relative = (e.flips_base - e.flips_aug) / e.flips_base;
  e.accuracy_delta = acc_aug - acc_base;
  return e;
}

}  // namespace

RelativeSummary relative_summary(const ConsistencyReport& base, const ConsistencyReport& aug) {
  if (base.mode != aug.mode) {
    throw Error(ErrorKind::validation, "reports cover different edit modes");
  }
  if (base.overall.pairs != aug.overall.pairs || base.pair_digest != aug.pair_digest) {
    throw Error(ErrorKind::validation, "reports were computed over different pair sets");
  }
  for (const auto& [type, c] : base.per_question_type) {
    auto it = aug.per_question_type.find(type);
    if (it == aug.per_question_type.end() || it->second.pairs != c.pairs) {
      throw Error(ErrorKind::validation, "question type '" + type + "' differs between reports");
    }
  }
  RelativeSummary s;
  s.model_name = aug.model_name.empty() ? base.model_name : aug.model_name;
  s.entries.push_back(
      entry("overall", base.overall, aug.overall, base.accuracy_orig(), aug.accuracy_orig()));
  for (const auto& [type, c] : base.per_question_type) {
    // Accuracy is only tracked overall.
    s.entries.push_back(entry(type, c, aug.per_question_type.at(type), base.accuracy_orig(),
                              aug.accuracy_orig()));
  }
  return s;
}

json relative_summary_to_json(const RelativeSummary& s) {
  json doc;
  doc["model"] = s.model_name;
  doc["entries"] = json::array();
  for (const auto& e : s.entries) {
    doc["entries"].push_back(
        {{"scope", e.scope},
         {"flips_base", e.flips_base},
         {"flips_aug", e.flips_aug},
         {"accuracy_base", e.accuracy_base},
         {"accuracy_aug", e.accuracy_aug},
         {"flip_reduction_relative",
          e.flip_reduction_relative ? json(*e.flip_reduction_relative) : json(nullptr)},
         {"accuracy_delta", e.accuracy_delta}});
  }
  return doc;
}

std::string format_relative_summary(const RelativeSummary& s) {
  std::ostringstream out;
  out << "Relative change (" << (s.model_name.empty() ? "model" : s.model_name)
      << "), augmented vs. real-only\n";
  char buf[512];
  std::snprintf(buf, sizeof buf, "%-24s %16s %12s %18s %12s\n", "scope", "flipped", "reduction",
                "accuracy", "delta");
  out << buf;
  for (const auto& e : s.entries) {
    char red[32];
    if (e.flip_reduction_relative) {
      std::snprintf(red, sizeof red, "%.1f%%", 100.0 * *e.flip_reduction_relative);
    } else {
      std::snprintf(red, sizeof red, "undefined");
    }
    char flips[48], acc[48];
    std::snprintf(flips, sizeof flips, "%.2f->%.2f", e.flips_base, e.flips_aug);
    std::snprintf(acc, sizeof acc, "%.2f->%.2f", e.accuracy_base, e.accuracy_aug);
    std::snprintf(buf, sizeof buf, "%-24s %16s %12s %18s %+12.2f\n",
                  e.scope.empty() ? "(none)" : e.scope.c_str(), flips, red, acc, e.accuracy_delta);
    out << buf;
  }
  return out.str();
}

}  // namespace cvf
