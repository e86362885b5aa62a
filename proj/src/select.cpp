#include "cvf/select.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "cvf/error.hpp"
#include "cvf/io.hpp"

namespace cvf {

std::string_view to_string(EditMode mode) { return mode == EditMode::iv ? "IV" : "CV"; }

EditMode parse_edit_mode(std::string_view text) {
  if (text == "IV" || text == "iv") return EditMode::iv;
  if (text == "CV" || text == "cv") return EditMode::cv;
  throw Error(ErrorKind::validation, "unknown edit mode '" + std::string(text) + "'");
}

void SelectionConfig::validate() const {
  auto check = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error(ErrorKind::validation, std::string(name) + " must lie in [0, 1]");
    }
  };
  check(area_threshold, "area threshold");
  check(iv_overlap_threshold, "IV overlap threshold");
  check(cv_overlap_threshold, "CV overlap threshold");
  if (dilate_radius < 0) throw Error(ErrorKind::validation, "dilation radius must be >= 0");
}

std::string make_edit_id(QuestionId question, EditMode mode, CategoryId category,
                         std::optional<InstanceId> instance) {
  char buf[96];
  if (instance) {
    std::snprintf(buf, sizeof buf, "%012lld-%s-%04lld-%08lld", static_cast<long long>(question),
                  mode == EditMode::iv ? "iv" : "cv", static_cast<long long>(category),
                  static_cast<long long>(*instance));
  } else {
    std::snprintf(buf, sizeof buf, "%012lld-%s-%04lld-all", static_cast<long long>(question),
                  mode == EditMode::iv ? "iv" : "cv", static_cast<long long>(category));
  }
  return buf;
}

namespace {

const Mask& mask_of(const ImageContext& ctx, InstanceId id) {
  auto it = ctx.masks.find(id);
  if (it == ctx.masks.end()) {
    throw Error(ErrorKind::integrity, "missing mask for instance " + std::to_string(id) +
                                          " on image " + std::to_string(ctx.image.image_id));
  }
  return it->second;
}

Mask union_of(const ImageContext& ctx, std::span<const InstanceId> ids) {
  Mask out(ctx.image.width, ctx.image.height);
  auto ob = out.bits();
  for (InstanceId id : ids) {
    const Mask& m = mask_of(ctx, id);
    if (!m.same_shape(out)) {
      throw Error(ErrorKind::integrity, "mask of instance " + std::to_string(id) +
                                            " does not match image " +
                                            std::to_string(ctx.image.image_id));
    }
    const auto mb = m.bits();
    for (std::size_t i = 0; i < ob.size(); ++i) ob[i] |= mb[i];
  }
  return out;
}

const std::vector<InstanceId>& instances_of(const ImageContext& ctx, CategoryId cat) {
  static const std::vector<InstanceId> kNone;
  auto it = ctx.objects.instances.find(cat);
  return it == ctx.objects.instances.end() ? kNone : it->second;
}

// a / total < threshold, evaluated the same way everywhere.
bool below(std::size_t pixels, std::size_t total, double threshold) {
  return static_cast<double>(pixels) / static_cast<double>(total) < threshold;
}

EditRecord base_record(const IqaTriplet& t, const ImageContext& ctx, EditMode mode,
                       CategoryId cat) {
  EditRecord r;
  r.question_id = t.question_id;
  r.image_id = t.image_id;
  r.mode = mode;
  r.target_category_id = cat;
  r.target_category = ctx.categories.name_of(cat);
  r.question = t.question_text;
  r.question_type = t.question_type;
  r.file_name = ctx.image.file_name;
  return r;
}

}  // namespace

std::vector<EditRecord> select_iv(const IqaTriplet& triplet, const ImageContext& ctx,
                                  const QaObjectSet& qa, const SelectionConfig& config) {
  std::vector<EditRecord> out;
  if (!triplet.uniform) return out;
  const std::size_t total = static_cast<std::size_t>(ctx.image.width) *
                            static_cast<std::size_t>(ctx.image.height);
  auto maybe_dilate = [&](Mask m, bool on) { return on ? dilate(m, config.dilate_radius) : m; };

  std::vector<Mask> qa_masks;
  std::vector<InstanceId> qa_instances;
  for (CategoryId cat : qa.categories) {
    const auto& ids = instances_of(ctx, cat);
    if (ids.empty()) continue;
    if (config.qa_mask == QaMaskMode::per_category_max) {
      qa_masks.push_back(maybe_dilate(union_of(ctx, ids), config.dilate_qa));
    } else {
      qa_instances.insert(qa_instances.end(), ids.begin(), ids.end());
    }
  }
  if (!qa_instances.empty()) {
    qa_masks.push_back(maybe_dilate(union_of(ctx, qa_instances), config.dilate_qa));
  }

  for (CategoryId cat : ctx.objects.categories) {
    if (qa.categories.count(cat)) continue;
    const auto& ids = instances_of(ctx, cat);
    std::size_t largest = 0;
    for (InstanceId id : ids) largest = std::max(largest, mask_of(ctx, id).count());
    if (!below(largest, total, config.area_threshold)) continue;

    Mask removal = union_of(ctx, ids);
    const Mask target = maybe_dilate(removal, config.dilate_target);
    OverlapScore overlap;  // 0 when no QA object is in the image
    for (const Mask& q : qa_masks) {
      const OverlapScore s = overlap_score(target, q);
      if (overlap < s || overlap.qa_pixels == 0) overlap = s;
    }
    const bool keep = config.strict_iv ? overlap.is_zero()
                                       : overlap.value() < config.iv_overlap_threshold;
    if (!keep) continue;

    EditRecord r = base_record(triplet, ctx, EditMode::iv, cat);
    r.edit_id = make_edit_id(triplet.question_id, EditMode::iv, cat, std::nullopt);
    r.removed_instance_ids = ids;
    r.removal_mask = std::move(removal);
    r.expected_answer = triplet.majority_answer;
    r.overlap = overlap;
    r.area_pixels = largest;
    r.provenance = qa.matched;
    out.push_back(std::move(r));
  }
  return out;
}

CvSelection select_cv(const IqaTriplet& triplet, const ImageContext& ctx, const QaObjectSet& qa,
                      const SelectionConfig& config) {
  CvSelection result;
  if (!triplet.uniform || !triplet.counting || !triplet.numeric_answer) {
    result.skip_reason = "not a uniform counting triplet";
    return result;
  }
  const auto counted = qa.question_categories();
  if (counted.empty()) {
    result.skip_reason = "counted category unresolvable";
    return result;
  }
  if (counted.size() > 1) {
    result.skip_reason = "counted category ambiguous";
    return result;
  }
  const CategoryId cat = *counted.begin();
  const int n = *triplet.numeric_answer;
  const auto& ids = instances_of(ctx, cat);
  if (static_cast<int>(ids.size()) != n) {
    result.skip_reason = "instance count mismatch";
    return result;
  }

  const std::size_t total = static_cast<std::size_t>(ctx.image.width) *
                            static_cast<std::size_t>(ctx.image.height);
  std::vector<PhraseMatch> provenance;
  for (const auto& m : qa.matched) {
    if (m.source == "question" && m.category_id == cat) provenance.push_back(m);
  }

  for (InstanceId id : ids) {
    const Mask& inst = mask_of(ctx, id);
    const std::size_t pixels = inst.count();
    if (!below(pixels, total, config.area_threshold)) continue;

    std::vector<InstanceId> others;
    for (InstanceId o : ids) {
      if (o != id) others.push_back(o);
    }
    OverlapScore overlap;
    if (!others.empty()) {
      const Mask target = config.dilate_target ? dilate(inst, config.dilate_radius) : inst;
      Mask rest = union_of(ctx, others);
      if (config.dilate_qa) rest = dilate(rest, config.dilate_radius);
      overlap = overlap_score(target, rest);
    }
    if (!(overlap.value() <= config.cv_overlap_threshold)) continue;

    EditRecord r = base_record(triplet, ctx, EditMode::cv, cat);
    r.edit_id = make_edit_id(triplet.question_id, EditMode::cv, cat, id);
    r.removed_instance_ids = {id};
    r.removal_mask = inst;
    r.expected_answer = std::to_string(n - 1);
    r.overlap = overlap;
    r.area_pixels = pixels;
    r.provenance = provenance;
    result.records.push_back(std::move(r));
  }
  return result;
}

SelectionRun run_selection(EditMode mode, const CocoCorpus& corpus, const ImageObjectIndex& index,
                           std::span<const IqaTriplet> triplets, const VocabularyTable& vocab,
                           const SelectionConfig& config) {
  config.validate();
  SelectionRun run;
  std::map<std::int64_t, std::vector<const IqaTriplet*>> by_image;
  for (const auto& t : triplets) {
    const bool eligible = mode == EditMode::iv ? t.uniform : (t.uniform && t.counting);
    if (eligible) by_image[t.image_id].push_back(&t);
  }
  for (const auto& [image_id, group] : by_image) {
    run.summary.real += group.size();
    const ImageRecord* image = corpus.find_image(image_id);
    if (image == nullptr || !index.contains(image_id)) {
      run.summary.real_ne += group.size();
      run.summary.skipped["image not in corpus"] += group.size();
      continue;
    }
    const InstanceMasks masks = rasterize_image_instances(corpus, index, image_id);
    const ImageContext ctx{*image, index.at(image_id), masks, corpus.categories};
    for (const IqaTriplet* t : group) {
      QaObjectSet qa = extract_qa_objects(t->question_text, t->majority_answer, vocab);
      qa.question_id = t->question_id;
      std::vector<EditRecord> records;
      if (mode == EditMode::iv) {
        records = select_iv(*t, ctx, qa, config);
      } else {
        CvSelection cv = select_cv(*t, ctx, qa, config);
        if (!cv.skip_reason.empty()) run.summary.skipped[cv.skip_reason] += 1;
        records = std::move(cv.records);
      }
      if (records.empty()) ++run.summary.real_ne;
      for (auto& r : records) run.records.push_back(std::move(r));
    }
  }
  std::sort(run.records.begin(), run.records.end(),
            [](const EditRecord& a, const EditRecord& b) { return a.edit_id < b.edit_id; });
  run.summary.edits = run.records.size();
  return run;
}

json edit_to_json(const EditRecord& r) {
  json prov = json::array();
  for (const auto& m : r.provenance) {
    prov.push_back({{"phrase", m.phrase},
                    {"text", m.text},
                    {"category_id", m.category_id},
                    {"source", m.source},
                    {"token_index", m.token_index}});
  }
  return {
      {"schema_version", kManifestSchemaVersion},
      {"edit_id", r.edit_id},
      {"question_id", r.question_id},
      {"image_id", r.image_id},
      {"file_name", r.file_name},
      {"mode", std::string(to_string(r.mode))},
      {"target_category_id", r.target_category_id},
      {"target_category", r.target_category},
      {"removed_instance_ids", r.removed_instance_ids},
      {"removal_mask",
       {{"size", {r.removal_mask.height(), r.removal_mask.width()}},
        {"counts", rle_counts_to_string(encode_rle(r.removal_mask))}}},
      {"expected_answer", r.expected_answer},
      {"overlap", r.overlap.value()},
      {"overlap_fraction", {r.overlap.intersection, r.overlap.qa_pixels}},
      {"area", r.area()},
      {"area_pixels", r.area_pixels},
      {"question", r.question},
      {"question_type", r.question_type},
      {"provenance", prov},
  };
}

EditRecord edit_from_json(const json& row) {
  const std::string where = "manifest record";
  if (get_int(row, "schema_version", where) != kManifestSchemaVersion) {
    throw Error(ErrorKind::parse, "unsupported manifest schema version");
  }
  EditRecord r;
  r.edit_id = get_string(row, "edit_id", where);
  const std::string w = "manifest record " + r.edit_id;
  r.question_id = get_int(row, "question_id", w);
  r.image_id = get_int(row, "image_id", w);
  r.file_name = get_string(row, "file_name", w);
  r.mode = parse_edit_mode(get_string(row, "mode", w));
  r.target_category_id = get_int(row, "target_category_id", w);
  r.target_category = get_string(row, "target_category", w);
  for (const auto& id : get_array(row, "removed_instance_ids", w)) {
    r.removed_instance_ids.push_back(id.get<InstanceId>());
  }
  const json& mask = row.at("removal_mask");
  const json& size = get_array(mask, "size", w + ".removal_mask");
  const int h = size.at(0).get<int>();
  const int width = size.at(1).get<int>();
  r.removal_mask = decode_rle(rle_counts_from_string(get_string(mask, "counts", w)), width, h);
  r.expected_answer = get_string(row, "expected_answer", w);
  const json& frac = get_array(row, "overlap_fraction", w);
  r.overlap = {frac.at(0).get<std::size_t>(), frac.at(1).get<std::size_t>()};
  r.area_pixels = static_cast<std::size_t>(get_int(row, "area_pixels", w));
  r.question = get_string(row, "question", w);
  r.question_type = get_string(row, "question_type", w);
  for (const auto& m : get_array(row, "provenance", w)) {
    r.provenance.push_back({m.at("phrase").get<std::string>(), m.at("text").get<std::string>(),
                            m.at("category_id").get<CategoryId>(),
                            m.at("source").get<std::string>(),
                            m.at("token_index").get<std::size_t>()});
  }
  return r;
}

std::size_t emit_manifest(std::vector<EditRecord> records, const std::filesystem::path& path) {
  std::sort(records.begin(), records.end(),
            [](const EditRecord& a, const EditRecord& b) { return a.edit_id < b.edit_id; });
  std::vector<json> rows;
  rows.reserve(records.size());
  for (const auto& r : records) rows.push_back(edit_to_json(r));
  write_jsonl_file(path, rows);
  return rows.size();
}

std::vector<EditRecord> load_manifest(const std::filesystem::path& path) {
  std::vector<EditRecord> out;
  for (const auto& row : read_jsonl_file(path)) {
    try {
      out.push_back(edit_from_json(row));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::parse, path.string() + ": " + e.what());
    }
  }
  return out;
}

json summary_to_json(const ManifestSummary& s) {
  return {{"real", s.real}, {"realNE", s.real_ne}, {"edit", s.edits}, {"skipped", s.skipped}};
}

std::string format_summary(const ManifestSummary& s, EditMode mode) {
  std::ostringstream out;
  out << to_string(mode) << " selection: real=" << s.real << " realNE=" << s.real_ne
      << " edit=" << s.edits << "\n";
  for (const auto& [reason, n] : s.skipped) out << "  skipped (" << reason << "): " << n << "\n";
  return out.str();
}

}  // namespace cvf
