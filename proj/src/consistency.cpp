#include "cvf/consistency.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <unordered_map>

#include "cvf/error.hpp"
#include "cvf/text.hpp"

namespace cvf {

const std::string* PredictionSet::find(const std::string& id) const {
  auto it = entries.find(id);
  return it == entries.end() ? nullptr : &it->second;
}

PredictionSet load_predictions(const std::filesystem::path& path, std::string model_name) {
  PredictionSet set;
  set.model_name = std::move(model_name);
  std::size_t line = 0;
  for (const auto& row : read_jsonl_file(path)) {
    ++line;
    const std::string where = path.string() + " record " + std::to_string(line);
    auto id = row.find("id");
    std::string key;
    if (id != row.end() && id->is_number_integer()) {
      key = std::to_string(id->get<std::int64_t>());
    } else if (id != row.end() && id->is_string()) {
      key = id->get<std::string>();
    } else {
      throw Error(ErrorKind::parse, where + ".id: expected integer or string");
    }
    if (!set.entries.emplace(key, normalize_answer(get_string(row, "answer", where))).second) {
      throw Error(ErrorKind::integrity, where + ": duplicate prediction id " + key);
    }
  }
  return set;
}

std::string_view to_string(FlipOutcome outcome) {
  switch (outcome) {
    case FlipOutcome::consistent: return "consistent";
    case FlipOutcome::pos_to_neg: return "pos->neg";
    case FlipOutcome::neg_to_pos: return "neg->pos";
    case FlipOutcome::neg_to_neg: return "neg->neg";
  }
  return "consistent";
}

FlipOutcome classify_iv(std::string_view orig_pred, std::string_view edit_pred,
                        std::string_view ground_truth) {
  const std::string orig = normalize_answer(orig_pred);
  const std::string edit = normalize_answer(edit_pred);
  const std::string gt = normalize_answer(ground_truth);
  if (edit == orig) return FlipOutcome::consistent;
  if (orig == gt) return FlipOutcome::pos_to_neg;
  if (edit == gt) return FlipOutcome::neg_to_pos;
  return FlipOutcome::neg_to_neg;
}

FlipOutcome classify_cv(std::string_view orig_pred, std::string_view edit_pred,
                        int ground_truth_n) {
  const auto orig = parse_count(orig_pred);
  const auto edit = parse_count(edit_pred);
  if (orig && edit && *edit == *orig - 1) return FlipOutcome::consistent;
  if (orig && *orig == ground_truth_n) return FlipOutcome::pos_to_neg;
  if (edit && *edit == ground_truth_n - 1) return FlipOutcome::neg_to_pos;
  return FlipOutcome::neg_to_neg;
}

void FlipCounts::add(FlipOutcome outcome) {
  ++pairs;
  switch (outcome) {
    case FlipOutcome::consistent: ++consistent; break;
    case FlipOutcome::pos_to_neg: ++pos_to_neg; break;
    case FlipOutcome::neg_to_pos: ++neg_to_pos; break;
    case FlipOutcome::neg_to_neg: ++neg_to_neg; break;
  }
}

std::size_t area_bin(std::size_t area_pixels, std::size_t image_pixels) {
  if (image_pixels == 0 || area_pixels == 0) return 0;
  // ceil(100 * a / total) - 1, in integers.
  const std::size_t percent_ceiling = (100 * area_pixels + image_pixels - 1) / image_pixels;
  return std::min(percent_ceiling - 1, kAreaBins);
}

double random_flip_baseline(std::size_t answer_vocab_size, double orig_error_rate) {
  if (answer_vocab_size == 0) throw Error(ErrorKind::validation, "answer vocabulary size must be >= 1");
  if (!(orig_error_rate >= 0.0 && orig_error_rate <= 1.0)) {
    throw Error(ErrorKind::validation, "error rate must lie in [0, 1]");
  }
  return 100.0 * orig_error_rate / static_cast<double>(answer_vocab_size);
}

ConsistencyReport compute_report(const PredictionSet& orig, const PredictionSet& edit,
                                 std::span<const EditRecord> manifest,
                                 std::span<const IqaTriplet> triplets, EditMode mode,
                                 const ReportOptions& options) {
  ConsistencyReport report;
  report.mode = mode;
  report.model_name = options.model_name.empty() ? orig.model_name : options.model_name;
  report.answer_vocab_size = options.answer_vocab_size;

  for (const auto& t : triplets) {
    const bool eligible = mode == EditMode::iv ? t.uniform : (t.uniform && t.counting);
    if (!eligible) continue;
    const std::string* pred = orig.find(std::to_string(t.question_id));
    if (pred == nullptr) {
      ++report.orig_without_prediction;
      continue;
    }
    ++report.n_orig;
    const bool correct = mode == EditMode::iv
                             ? *pred == t.majority_answer
                             : (parse_count(*pred) && parse_count(*pred) == t.numeric_answer);
    if (correct) ++report.n_orig_correct;
  }

  std::vector<std::string> pair_keys;
  for (const auto& r : manifest) {
    if (r.mode != mode) continue;
    const std::string* o = orig.find(std::to_string(r.question_id));
    const std::string* e = edit.find(r.edit_id);
    if (o == nullptr) {
      ++report.missing_orig;
      continue;
    }
    if (e == nullptr) {
      ++report.missing_edit;
      continue;
    }
    FlipOutcome outcome;
    if (mode == EditMode::iv) {
      outcome = classify_iv(*o, *e, r.expected_answer);
    } else {
      const auto expected = parse_count(r.expected_answer);
      if (!expected) {
        throw Error(ErrorKind::integrity, "CV record " + r.edit_id + " has a non-numeric answer");
      }
      if (!parse_count(*o) || !parse_count(*e)) ++report.non_numeric;
      outcome = classify_cv(*o, *e, *expected + 1);
    }
    report.overall.add(outcome);
    report.per_question_type[r.question_type].add(outcome);
    report.per_area_bin[area_bin(r.area_pixels, r.removal_mask.size())].add(outcome);
    if (outcome != FlipOutcome::consistent) report.flipped_edit_ids.push_back(r.edit_id);
    pair_keys.push_back(std::to_string(r.question_id) + "\t" + r.edit_id + "\n");
  }
  if (report.overall.pairs == 0) {
    throw Error(ErrorKind::empty, "no (original, edited) prediction pairs to compare");
  }
  std::sort(pair_keys.begin(), pair_keys.end());
  std::string all;
  for (const auto& k : pair_keys) all += k;
  report.pair_digest = sha256_hex(all);
  std::sort(report.flipped_edit_ids.begin(), report.flipped_edit_ids.end());
  return report;
}

namespace {

json counts_to_json(const FlipCounts& c) {
  return {{"pairs", c.pairs},
          {"consistent", c.consistent},
          {"pos_to_neg", c.pos_to_neg},
          {"neg_to_pos", c.neg_to_pos},
          {"neg_to_neg", c.neg_to_neg},
          {"flipped_pct", c.flipped_percent()},
          {"pos_to_neg_pct", c.percent(c.pos_to_neg)},
          {"neg_to_pos_pct", c.percent(c.neg_to_pos)},
          {"neg_to_neg_pct", c.percent(c.neg_to_neg)}};
}

FlipCounts counts_from_json(const json& j) {
  FlipCounts c;
  c.pairs = j.at("pairs").get<std::size_t>();
  c.consistent = j.at("consistent").get<std::size_t>();
  c.pos_to_neg = j.at("pos_to_neg").get<std::size_t>();
  c.neg_to_pos = j.at("neg_to_pos").get<std::size_t>();
  c.neg_to_neg = j.at("neg_to_neg").get<std::size_t>();
  if (c.consistent + c.flipped() != c.pairs) {
    throw Error(ErrorKind::integrity, "report counts do not partition their pairs");
  }
  return c;
}

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string pad(std::string s, std::size_t width, bool left = true) {
  if (s.size() >= width) return s;
  const std::string fill(width - s.size(), ' ');
  return left ? s + fill : fill + s;
}

}  // namespace

json report_to_json(const ConsistencyReport& r) {
  json doc;
  doc["mode"] = std::string(to_string(r.mode));
  doc["model"] = r.model_name;
  doc["n_orig"] = r.n_orig;
  doc["n_orig_correct"] = r.n_orig_correct;
  doc["accuracy_orig"] = r.accuracy_orig();
  doc["overall"] = counts_to_json(r.overall);
  doc["per_question_type"] = json::object();
  for (const auto& [type, c] : r.per_question_type) doc["per_question_type"][type] = counts_to_json(c);
  doc["per_area_bin"] = json::array();
  for (std::size_t b = 0; b < r.per_area_bin.size(); ++b) {
    json j = counts_to_json(r.per_area_bin[b]);
    j["bin"] = b < kAreaBins ? std::to_string(b) + "-" + std::to_string(b + 1) + "%"
                             : ">" + std::to_string(kAreaBins) + "%";
    doc["per_area_bin"].push_back(std::move(j));
  }
  doc["missing_orig"] = r.missing_orig;
  doc["missing_edit"] = r.missing_edit;
  doc["orig_without_prediction"] = r.orig_without_prediction;
  doc["non_numeric"] = r.non_numeric;
  doc["answer_vocab_size"] = r.answer_vocab_size;
  doc["random_baseline_pct"] = r.random_baseline();
  doc["pair_digest"] = r.pair_digest;
  doc["flipped_edit_ids"] = r.flipped_edit_ids;
  return doc;
}

ConsistencyReport report_from_json(const json& doc) {
  try {
    ConsistencyReport r;
    r.mode = parse_edit_mode(doc.at("mode").get<std::string>());
    r.model_name = doc.at("model").get<std::string>();
    r.n_orig = doc.at("n_orig").get<std::size_t>();
    r.n_orig_correct = doc.at("n_orig_correct").get<std::size_t>();
    r.overall = counts_from_json(doc.at("overall"));
    for (const auto& [type, j] : doc.at("per_question_type").items()) {
      r.per_question_type[type] = counts_from_json(j);
    }
    const json& bins = doc.at("per_area_bin");
    for (std::size_t b = 0; b < r.per_area_bin.size() && b < bins.size(); ++b) {
      r.per_area_bin[b] = counts_from_json(bins[b]);
    }
    r.missing_orig = doc.at("missing_orig").get<std::size_t>();
    r.missing_edit = doc.at("missing_edit").get<std::size_t>();
    r.orig_without_prediction = doc.value("orig_without_prediction", std::size_t{0});
    r.non_numeric = doc.at("non_numeric").get<std::size_t>();
    r.answer_vocab_size = doc.at("answer_vocab_size").get<std::size_t>();
    r.pair_digest = doc.at("pair_digest").get<std::string>();
    r.flipped_edit_ids = doc.at("flipped_edit_ids").get<std::vector<std::string>>();
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, std::string("consistency report: ") + e.what());
  }
}

long long to_hundredths(double value) { return std::llround(value * 100.0); }

std::string format_report(const ConsistencyReport& r) {
  std::ostringstream out;
  const std::string model = r.model_name.empty() ? "model" : r.model_name;
  out << "Accuracy-flipping on real data / " << to_string(r.mode) << " edits\n";
  out << pad("", 22) << pad(model + " (%)", 12, false) << "\n";
  out << pad("Accuracy orig", 22) << pad(fixed2(r.accuracy_orig()), 12, false) << "\n";
  out << pad("Predictions flipped", 22) << pad(fixed2(r.overall.flipped_percent()), 12, false)
      << "\n";
  out << pad("pos->neg", 22) << pad(fixed2(r.overall.percent(r.overall.pos_to_neg)), 12, false)
      << "\n";
  out << pad("neg->pos", 22) << pad(fixed2(r.overall.percent(r.overall.neg_to_pos)), 12, false)
      << "\n";
  out << pad("neg->neg", 22) << pad(fixed2(r.overall.percent(r.overall.neg_to_neg)), 12, false)
      << "\n";
  out << "pairs: " << r.overall.pairs << " (excluded: " << r.missing_orig
      << " without original prediction, " << r.missing_edit << " without edited prediction)\n";
  out << "originals scored: " << r.n_orig << " (" << r.orig_without_prediction
      << " without prediction)\n";
  if (r.mode == EditMode::cv) {
    out << "non-numeric predictions (counted as incorrect): " << r.non_numeric << "\n";
  }
  char baseline[64];
  std::snprintf(baseline, sizeof baseline, "%.5f", r.random_baseline());
  out << "random neg->pos baseline: " << baseline << "% (answer vocabulary "
      << r.answer_vocab_size << ")\n";

  out << "\nPer question type\n";
  out << pad("type", 24) << pad("pairs", 8, false) << pad("flipped", 10, false)
      << pad("pos->neg", 10, false) << pad("neg->pos", 10, false) << pad("neg->neg", 10, false)
      << "\n";
  auto row = [&](const std::string& name, const FlipCounts& c) {
    out << pad(name, 24) << pad(std::to_string(c.pairs), 8, false)
        << pad(fixed2(c.flipped_percent()), 10, false)
        << pad(fixed2(c.percent(c.pos_to_neg)), 10, false)
        << pad(fixed2(c.percent(c.neg_to_pos)), 10, false)
        << pad(fixed2(c.percent(c.neg_to_neg)), 10, false) << "\n";
  };
  for (const auto& [type, c] : r.per_question_type) row(type.empty() ? "(none)" : type, c);

  out << "\nFlip rate by removed-object area\n";
  out << pad("area", 24) << pad("pairs", 8, false) << pad("flipped", 10, false)
      << pad("pos->neg", 10, false) << pad("neg->pos", 10, false) << pad("neg->neg", 10, false)
      << "\n";
  for (std::size_t b = 0; b < r.per_area_bin.size(); ++b) {
    const std::string name = b < kAreaBins
                                 ? std::to_string(b) + "-" + std::to_string(b + 1) + "%"
                                 : ">" + std::to_string(kAreaBins) + "%";
    if (b == kAreaBins && r.per_area_bin[b].pairs == 0) continue;
    row(name, r.per_area_bin[b]);
  }
  return out.str();
}

std::string_view to_string(Label label) {
  switch (label) {
    case Label::yes: return "yes";
    case Label::no: return "no";
    case Label::ambiguous: return "ambiguous";
  }
  return "yes";
}

Label parse_label(std::string_view text) {
  const std::string t = normalize_answer(text);
  if (t == "yes" || t == "y") return Label::yes;
  if (t == "no" || t == "n") return Label::no;
  if (t == "ambiguous" || t == "a") return Label::ambiguous;
  throw Error(ErrorKind::validation, "label must be yes, no or ambiguous (got '" +
                                         std::string(text) + "')");
}

AgreementReport agreement_stats(const LabelTable& labels) {
  AgreementReport report;
  std::set<std::string> universe;
  for (const auto& [user, items] : labels) {
    for (const auto& [id, label] : items) universe.insert(id);
  }
  report.items = universe.size();
  report.all_users.items = report.any_user.items = report.items;

  for (const auto& [user, items] : labels) {
    LabelShares s;
    s.items = report.items;
    for (const auto& [id, label] : items) {
      if (label == Label::yes) ++s.yes;
      if (label == Label::no) ++s.no;
      if (label == Label::ambiguous) ++s.ambiguous;
    }
    s.missing = report.items - items.size();
    report.users.emplace_back(user, s);
  }

  for (const auto& id : universe) {
    std::size_t yes = 0, no = 0, amb = 0, missing = 0;
    for (const auto& [user, items] : labels) {
      auto it = items.find(id);
      if (it == items.end()) {
        ++missing;
        continue;
      }
      if (it->second == Label::yes) ++yes;
      if (it->second == Label::no) ++no;
      if (it->second == Label::ambiguous) ++amb;
    }
    const std::size_t n = labels.size();
    report.all_users.yes += yes == n;
    report.all_users.no += no == n;
    report.all_users.ambiguous += amb == n;
    report.any_user.yes += yes > 0;
    report.any_user.no += no > 0;
    report.any_user.ambiguous += amb > 0;
    report.any_user.missing += missing > 0;
    report.all_users.missing += missing == n;
  }
  return report;
}

json agreement_to_json(const AgreementReport& r) {
  auto shares = [](const LabelShares& s) {
    return json{{"yes", s.yes},
                {"no", s.no},
                {"ambiguous", s.ambiguous},
                {"missing", s.missing},
                {"items", s.items},
                {"yes_pct", s.percent(s.yes)},
                {"no_pct", s.percent(s.no)},
                {"ambiguous_pct", s.percent(s.ambiguous)},
                {"missing_pct", s.percent(s.missing)}};
  };
  json doc;
  doc["empty"] = r.empty();
  doc["items"] = r.items;
  doc["users"] = json::array();
  for (const auto& [user, s] : r.users) {
    json j = shares(s);
    j["user"] = user;
    doc["users"].push_back(std::move(j));
  }
  doc["all_users"] = shares(r.all_users);
  doc["any_user"] = shares(r.any_user);
  return doc;
}

std::string format_agreement_table(const AgreementReport& r) {
  std::vector<std::string> names;
  for (const auto& [user, s] : r.users) names.push_back(user);
  auto joined = [&](const char* op) {
    std::string out;
    for (const auto& n : names) out += (out.empty() ? "" : std::string(" ") + op + " ") + n;
    return out;
  };
  bool any_missing = false;
  for (const auto& [user, s] : r.users) any_missing |= s.missing > 0;

  const std::string inter = joined("∩");
  const std::string uni = joined("∪");
  std::size_t width = 8;
  for (const auto& n : names) width = std::max(width, n.size() + 2);
  // The set symbols are 3 bytes but one column wide.
  const std::size_t op_bytes = names.size() > 1 ? 2 * (names.size() - 1) : 0;
  width = std::max(width, inter.size() - op_bytes + 2);

  auto label_cell = [&](const std::string& s, std::size_t extra) {
    return s + std::string(width + extra - std::min(width + extra, s.size()), ' ');
  };
  std::ostringstream out;
  out << label_cell("", 0) << pad("Yes(%)", 10, false) << pad("No(%)", 10, false)
      << pad("Ambiguous(%)", 14, false);
  if (any_missing) out << pad("Missing(%)", 12, false);
  out << "\n";
  auto row = [&](const std::string& name, std::size_t extra, const LabelShares& s) {
    out << label_cell(name, extra) << pad(fixed2(s.percent(s.yes)), 10, false)
        << pad(fixed2(s.percent(s.no)), 10, false)
        << pad(fixed2(s.percent(s.ambiguous)), 14, false);
    if (any_missing) out << pad(fixed2(s.percent(s.missing)), 12, false);
    out << "\n";
  };
  for (const auto& [user, s] : r.users) row(user, 0, s);
  row(inter, op_bytes, r.all_users);
  row(uni, op_bytes, r.any_user);
  return out.str();
}

}  // namespace cvf
