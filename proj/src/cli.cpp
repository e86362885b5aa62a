#include "cvf/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <sstream>

#include "cvf/augment.hpp"
#include "cvf/coco.hpp"
#include "cvf/consistency.hpp"
#include "cvf/error.hpp"
#include "cvf/inpaint.hpp"
#include "cvf/io.hpp"
#include "cvf/review.hpp"
#include "cvf/select.hpp"
#include "cvf/vocab.hpp"
#include "cvf/vqa.hpp"

namespace cvf {

namespace fs = std::filesystem;

namespace {

struct VqaInputs {
  std::string questions;
  std::string answers;
  int answers_per_question = kDefaultAnswersPerQuestion;

  void add_to(CLI::App* sub, bool required) {
    auto* q = sub->add_option("--questions", questions, "VQA questions JSON")->check(CLI::ExistingFile);
    auto* a = sub->add_option("--answers", answers, "VQA annotations JSON")->check(CLI::ExistingFile);
    if (required) {
      q->required();
      a->required();
    } else {
      q->needs(a);
      a->needs(q);
    }
    sub->add_option("--answers-per-question", answers_per_question,
                    "answers expected per question (0 disables the check)")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
  }

  std::vector<IqaTriplet> load() const {
    return load_questions_and_answers(questions, answers, answers_per_question);
  }
};

struct SelectOptions {
  std::string annotations;
  VqaInputs vqa;
  std::string vocab;
  std::string out;
  double area_threshold = 0.10;
  std::optional<double> overlap_threshold;
  bool strict = false;
  int dilate_radius = 3;
  std::string qa_mask = "union";
};

struct InpaintOptions {
  std::vector<std::string> manifests;
  std::string images;
  std::string out;
  std::string command;
  int jobs = 1;
};

struct ConsistencyOptions {
  std::string orig;
  std::string edit;
  std::string manifest;
  std::string mode = "iv";
  VqaInputs vqa;
  std::string model;
  std::size_t answer_vocab = kDefaultAnswerVocabulary;
  std::string out;
};

struct AugmentOptions {
  VqaInputs vqa;
  std::string iv_manifest;
  std::string cv_manifest;
  std::vector<std::string> types;
  bool strict = false;
  std::string out;
};

struct CompareOptions {
  std::string base;
  std::string aug;
  std::string out;
};

struct SampleOptions {
  std::vector<std::string> manifests;
  std::vector<std::string> flips;
  std::size_t cap = 100;
  std::uint64_t seed = 0;
  std::string out;
};

struct ServeOptions {
  std::vector<std::string> manifests;
  std::string sample;
  std::string images;
  std::string ui;
  std::string labels = "labels.jsonl";
  std::string host = "127.0.0.1";
  int port = 8080;
  std::vector<std::string> users;
  std::uint64_t seed = 0;
};

struct IngestOptions {
  std::string annotations;
  VqaInputs vqa;
  std::optional<double> split_ratio;
  std::uint64_t split_seed = 0;
  std::string out;
};

// Everything needed to reproduce a run: the effective option values, the tool
// version and a digest of every input file.
void write_provenance(const fs::path& out_dir, const CLI::App& sub,
                      const std::vector<fs::path>& inputs) {
  json config = json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_name();
    if (name == "--help" || name.empty()) continue;
    std::vector<std::string> values = opt->count() > 0 ? opt->results() : std::vector<std::string>{};
    if (values.empty() && !opt->get_default_str().empty()) values.push_back(opt->get_default_str());
    if (values.empty()) continue;
    config[name] = values.size() == 1 && opt->get_items_expected_max() <= 1 ? json(values.front())
                                                                             : json(values);
  }
  json digests = json::object();
  for (const auto& p : inputs) {
    if (!p.empty()) digests[p.string()] = sha256_file(p);
  }
  if (const char* cfg = std::getenv("CVF_CONFIG"); cfg != nullptr && *cfg != '\0' && fs::exists(cfg)) {
    digests[cfg] = sha256_file(cfg);
  }
  const json doc = {{"tool", "cvf"},
                    {"version", kToolVersion},
                    {"subcommand", sub.get_name()},
                    {"config", config},
                    {"inputs", digests}};
  write_text_file(out_dir / "provenance.json", doc.dump(2) + "\n");
}

fs::path prepare_out(const std::string& out) {
  fs::create_directories(out);
  return out;
}

std::vector<EditRecord> load_manifests(const std::vector<std::string>& paths) {
  std::vector<EditRecord> all;
  for (const auto& p : paths) {
    auto records = load_manifest(p);
    std::move(records.begin(), records.end(), std::back_inserter(all));
  }
  std::sort(all.begin(), all.end(),
            [](const EditRecord& a, const EditRecord& b) { return a.edit_id < b.edit_id; });
  for (std::size_t i = 1; i < all.size(); ++i) {
    if (all[i].edit_id == all[i - 1].edit_id) {
      throw Error(ErrorKind::integrity, "edit " + all[i].edit_id + " appears in more than one manifest");
    }
  }
  return all;
}

std::string slug(std::string_view name) {
  std::string s;
  for (char c : name) s.push_back(c == ' ' ? '-' : c);
  return s;
}

void run_ingest(const IngestOptions& o, const CLI::App& sub, std::ostream& out) {
  const CocoCorpus corpus = load_annotations(o.annotations);
  json stats = {{"categories", corpus.summary.categories},
                {"images", corpus.summary.images},
                {"instances", corpus.summary.instances},
                {"polygon_instances", corpus.summary.polygon_instances},
                {"rle_instances", corpus.summary.rle_instances}};
  out << "categories " << corpus.summary.categories << "\nimages " << corpus.summary.images
      << "\ninstances " << corpus.summary.instances << " (polygon "
      << corpus.summary.polygon_instances << ", rle " << corpus.summary.rle_instances << ")\n";
  std::optional<SplitResult> split;
  if (!o.vqa.questions.empty()) {
    const auto triplets = o.vqa.load();
    std::size_t uniform = 0, counting = 0, missing_image = 0;
    for (const auto& t : triplets) {
      if (t.uniform) ++uniform;
      if (t.uniform && t.counting) ++counting;
      if (!corpus.find_image(t.image_id)) ++missing_image;
    }
    stats["triplets"] = triplets.size();
    stats["uniform"] = uniform;
    stats["uniform_counting"] = counting;
    stats["triplets_without_image"] = missing_image;
    out << "triplets " << triplets.size() << " (uniform " << uniform << ", uniform counting "
        << counting << ", without image " << missing_image << ")\n";
    if (o.split_ratio) {
      split = split_val(triplets, *o.split_ratio, o.split_seed);
      stats["split"] = {{"test", split->test.question_ids.size()},
                        {"val", split->val.question_ids.size()}};
      out << "split test " << split->test.question_ids.size() << ", val "
          << split->val.question_ids.size() << "\n";
    }
  } else if (o.split_ratio) {
    throw Error(ErrorKind::usage, "--split-ratio needs --questions and --answers");
  }
  if (!o.out.empty()) {
    const fs::path dir = prepare_out(o.out);
    write_text_file(dir / "stats.json", stats.dump(2) + "\n");
    if (split) {
      const json doc = {{"seed", o.split_seed},
                        {"ratio", *o.split_ratio},
                        {"test", split->test.question_ids},
                        {"val", split->val.question_ids}};
      write_text_file(dir / "split.json", doc.dump() + "\n");
    }
    write_provenance(dir, sub, {o.annotations, o.vqa.questions, o.vqa.answers});
  }
}

void run_select(EditMode mode, const SelectOptions& o, const CLI::App& sub, std::ostream& out) {
  SelectionConfig config;
  config.area_threshold = o.area_threshold;
  config.dilate_radius = o.dilate_radius;
  if (mode == EditMode::iv) {
    if (o.overlap_threshold) config.iv_overlap_threshold = *o.overlap_threshold;
    config.strict_iv = o.strict;
  } else {
    if (o.overlap_threshold) config.cv_overlap_threshold = *o.overlap_threshold;
    if (o.strict) config.cv_overlap_threshold = 0.0;
  }
  config.qa_mask = o.qa_mask == "max" ? QaMaskMode::per_category_max : QaMaskMode::union_all;
  config.validate();

  const CocoCorpus corpus = load_annotations(o.annotations);
  const auto index = build_object_index(corpus.images, corpus.instances);
  const VocabularyTable vocab =
      o.vocab.empty() ? default_vocabulary(corpus.categories) : load_vocabulary(o.vocab, corpus.categories);
  const auto triplets = o.vqa.load();
  SelectionRun run = run_selection(mode, corpus, index, triplets, vocab, config);

  const fs::path dir = prepare_out(o.out);
  emit_manifest(std::move(run.records), dir / "manifest.jsonl");
  write_text_file(dir / "summary.json", summary_to_json(run.summary).dump(2) + "\n");
  const std::string text = format_summary(run.summary, mode);
  write_text_file(dir / "summary.txt", text);
  write_provenance(dir, sub, {o.annotations, o.vqa.questions, o.vqa.answers, o.vocab});
  out << text;
}

void run_inpaint(const InpaintOptions& o, const CLI::App& sub, std::ostream& out) {
  const CommandTemplate command(o.command);
  const auto records = load_manifests(o.manifests);
  const fs::path dir = prepare_out(o.out);
  JobLedger ledger(dir / kLedgerFileName);
  auto jobs = render_jobs(records, o.images, dir, ledger);
  jobs = invoke_tool(std::move(jobs), command, o.jobs, ledger);

  std::size_t done = 0, failed = 0;
  for (const auto& j : jobs) (j.status == JobStatus::done ? done : failed) += 1;
  write_text_file(dir / "status.json",
                  json({{"jobs", jobs.size()}, {"done", done}, {"failed", failed}}).dump(2) + "\n");
  std::vector<fs::path> inputs(o.manifests.begin(), o.manifests.end());
  write_provenance(dir, sub, inputs);
  out << "jobs " << jobs.size() << ", done " << done << ", failed " << failed << "\n";
  if (failed > 0) {
    throw Error(ErrorKind::io, std::to_string(failed) + " of " + std::to_string(jobs.size()) +
                                   " removal jobs failed; see " + ledger.path().string());
  }
}

void run_consistency(const ConsistencyOptions& o, const CLI::App& sub, std::ostream& out) {
  const EditMode mode = parse_edit_mode(o.mode);
  const PredictionSet orig = load_predictions(o.orig, o.model);
  const PredictionSet edit = load_predictions(o.edit, o.model);
  const auto manifest = load_manifest(o.manifest);
  const auto triplets = o.vqa.load();
  ReportOptions options;
  options.model_name = o.model;
  options.answer_vocab_size = o.answer_vocab;
  const ConsistencyReport report = compute_report(orig, edit, manifest, triplets, mode, options);

  const fs::path dir = prepare_out(o.out);
  write_text_file(dir / "report.json", report_to_json(report).dump(2) + "\n");
  const std::string text = format_report(report);
  write_text_file(dir / "report.txt", text);
  write_provenance(dir, sub, {o.orig, o.edit, o.manifest, o.vqa.questions, o.vqa.answers});
  out << text;
}

void run_augment(const AugmentOptions& o, const CLI::App& sub, std::ostream& out) {
  if (o.iv_manifest.empty() && o.cv_manifest.empty()) {
    throw Error(ErrorKind::usage, "augment-plan needs --iv-manifest and/or --cv-manifest");
  }
  std::vector<QuestionTypeFilter> filters;
  if (o.types.empty()) {
    filters = default_question_filters();
  } else {
    for (const auto& name : o.types) {
      auto f = find_question_filter(name);
      if (!f) throw Error(ErrorKind::validation, "unknown question type '" + name + "'");
      filters.push_back(*f);
    }
  }
  const auto triplets = o.vqa.load();
  std::vector<EditRecord> edits;
  if (!o.iv_manifest.empty()) edits = load_manifest(o.iv_manifest);
  if (!o.cv_manifest.empty()) {
    auto cv = load_manifest(o.cv_manifest);
    std::move(cv.begin(), cv.end(), std::back_inserter(edits));
  }

  std::vector<Composition> compositions = {Composition::real};
  if (!o.iv_manifest.empty()) compositions.push_back(Composition::real_iv);
  if (!o.cv_manifest.empty()) compositions.push_back(Composition::real_cv);
  if (!o.iv_manifest.empty() && !o.cv_manifest.empty()) compositions.push_back(Composition::real_cv_iv);

  const fs::path dir = prepare_out(o.out);
  json plans = json::array();
  char line[160];
  std::snprintf(line, sizeof line, "%-20s %-12s %8s %8s\n", "question type", "composition", "real",
                "edits");
  out << line;
  for (const auto& filter : filters) {
    const auto subset = filter_question_type(triplets, filter);
    const auto subset_edits = edits_for_subset(subset, edits);
    for (Composition c : compositions) {
      const auto manifest = build_manifest(filter.name, subset, subset_edits, c, o.strict);
      const fs::path file = dir / slug(filter.name) / (std::string(to_string(c)) + ".jsonl");
      fs::create_directories(file.parent_path());
      write_augmentation_manifest(file, manifest);
      plans.push_back({{"question_type", filter.name},
                       {"composition", std::string(to_string(c))},
                       {"strict", o.strict},
                       {"real", manifest.real_question_ids.size()},
                       {"edits", manifest.edit_ids.size()},
                       {"file", fs::relative(file, dir).string()}});
      std::snprintf(line, sizeof line, "%-20s %-12s %8zu %8zu\n", filter.name.c_str(),
                    std::string(to_string(c)).c_str(), manifest.real_question_ids.size(),
                    manifest.edit_ids.size());
      out << line;
    }
  }
  write_text_file(dir / "plans.json", plans.dump(2) + "\n");
  write_provenance(dir, sub, {o.vqa.questions, o.vqa.answers, o.iv_manifest, o.cv_manifest});
}

void run_compare(const CompareOptions& o, const CLI::App& sub, std::ostream& out) {
  const auto base = report_from_json(read_json_file(o.base));
  const auto aug = report_from_json(read_json_file(o.aug));
  const RelativeSummary summary = relative_summary(base, aug);
  const fs::path dir = prepare_out(o.out);
  write_text_file(dir / "relative.json", relative_summary_to_json(summary).dump(2) + "\n");
  const std::string text = format_relative_summary(summary);
  write_text_file(dir / "relative.txt", text);
  write_provenance(dir, sub, {o.base, o.aug});
  out << text;
}

void run_sample(const SampleOptions& o, const CLI::App& sub, std::ostream& out) {
  const auto records = load_manifests(o.manifests);
  std::vector<ConsistencyReport> reports;
  for (const auto& p : o.flips) reports.push_back(report_from_json(read_json_file(p)));
  const ReviewSample sample = build_sample(records, reports, o.cap, o.seed);
  const fs::path dir = prepare_out(o.out);
  write_sample(dir / "sample.jsonl", sample);
  std::vector<fs::path> inputs(o.manifests.begin(), o.manifests.end());
  inputs.insert(inputs.end(), o.flips.begin(), o.flips.end());
  write_provenance(dir, sub, inputs);
  out << "sampled " << sample.edit_ids.size() << " of " << records.size() << " edits\n";
}

void run_serve(const ServeOptions& o, std::ostream& out) {
  const auto records = load_manifests(o.manifests);
  std::optional<ReviewSample> sample;
  if (!o.sample.empty()) sample = load_sample(o.sample);
  LabelStore store(o.labels);
  ReviewService service(review_items(records, sample ? &*sample : nullptr), store, o.users, o.seed);
  ReviewServer server(service, o.images, o.ui);
  const int port = server.bind(o.host, o.port);
  if (port < 0) {
    throw Error(ErrorKind::io, "cannot bind " + o.host + ":" + std::to_string(o.port));
  }
  out << "serving on http://" << o.host << ":" << port << "/ (labels: " << o.labels << ")"
      << std::endl;
  if (!server.listen()) throw Error(ErrorKind::io, "server stopped unexpectedly");
}

int exit_code_for(ErrorKind kind) {
  return kind == ErrorKind::usage || kind == ErrorKind::validation ? 2 : 1;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Curation and evaluation of edited VQA data", "cvf"};
  app.set_version_flag("--version", kToolVersion);
  app.set_config("--config", "", "TOML/INI config file; flags override its values")
      ->envname("CVF_CONFIG");
  app.require_subcommand(1);
  app.fallthrough(false);

  std::function<void()> action;

  IngestOptions ingest;
  auto* s_ingest = app.add_subcommand("ingest-stats", "Validate inputs and print corpus statistics");
  s_ingest->add_option("--annotations", ingest.annotations, "COCO instances JSON")
      ->required()
      ->check(CLI::ExistingFile);
  ingest.vqa.add_to(s_ingest, false);
  s_ingest->add_option("--split-ratio", ingest.split_ratio, "fraction of images assigned to test")
      ->check(CLI::Range(0.0, 1.0));
  s_ingest->add_option("--split-seed", ingest.split_seed, "seed of the image split")
      ->capture_default_str();
  s_ingest->add_option("--out", ingest.out, "output directory for stats.json and split.json");

  SelectOptions sel_iv, sel_cv;
  auto add_select = [&](const char* name, const char* help, SelectOptions& o, double overlap_default) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--annotations", o.annotations, "COCO instances JSON")
        ->required()
        ->check(CLI::ExistingFile);
    o.vqa.add_to(sub, true);
    sub->add_option("--vocab", o.vocab, "object-referral vocabulary (default: built-in table)")
        ->check(CLI::ExistingFile);
    sub->add_option("--area-threshold", o.area_threshold,
                    "removed instances must cover less than this fraction of the image")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    sub->add_option("--overlap-threshold", o.overlap_threshold,
                    "overlap bound (default " + std::to_string(overlap_default).substr(0, 4) + ")")
        ->check(CLI::Range(0.0, 1.0));
    sub->add_flag("--strict", o.strict, "require zero overlap");
    sub->add_option("--dilate-radius", o.dilate_radius, "square dilation radius in pixels")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--qa-mask", o.qa_mask, "QA mask: union of all mentioned objects, or per-category max")
        ->capture_default_str()
        ->check(CLI::IsMember({"union", "max"}));
    sub->add_option("--out", o.out, "output directory")->required();
    return sub;
  };
  auto* s_iv = add_select("select-iv", "Select invariant (unrelated object) removals", sel_iv, 0.10);
  auto* s_cv = add_select("select-cv", "Select covariant (counted instance) removals", sel_cv, 0.0);

  InpaintOptions inpaint;
  auto* s_inpaint = app.add_subcommand("inpaint", "Write removal masks and run an external inpainter");
  s_inpaint->add_option("--manifest", inpaint.manifests, "edit manifest (repeatable)")
      ->required()
      ->check(CLI::ExistingFile);
  s_inpaint->add_option("--images", inpaint.images, "directory holding the source images")
      ->required();
  s_inpaint->add_option("--template", inpaint.command,
                        "shell command with {image}, {mask} and {out} placeholders")
      ->required();
  s_inpaint->add_option("--jobs", inpaint.jobs, "concurrent tool processes")
      ->capture_default_str()
      ->check(CLI::Range(1, 256));
  s_inpaint->add_option("--out", inpaint.out, "output directory")->required();

  ConsistencyOptions cons;
  auto* s_cons = app.add_subcommand("consistency", "Flip rates of a model on original vs. edited data");
  s_cons->add_option("--orig", cons.orig, "predictions on original questions")
      ->required()
      ->check(CLI::ExistingFile);
  s_cons->add_option("--edit", cons.edit, "predictions on edited records")
      ->required()
      ->check(CLI::ExistingFile);
  s_cons->add_option("--manifest", cons.manifest, "edit manifest")->required()->check(CLI::ExistingFile);
  s_cons->add_option("--mode", cons.mode, "edit mode")
      ->capture_default_str()
      ->check(CLI::IsMember({"iv", "cv", "IV", "CV"}));
  cons.vqa.add_to(s_cons, true);
  s_cons->add_option("--model", cons.model, "model name shown in the report");
  s_cons->add_option("--answer-vocab", cons.answer_vocab, "answer vocabulary size for the random baseline")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  s_cons->add_option("--out", cons.out, "output directory")->required();

  AugmentOptions aug;
  auto* s_aug = app.add_subcommand("augment-plan", "Build real / real+edit fine-tuning manifests");
  aug.vqa.add_to(s_aug, true);
  s_aug->add_option("--iv-manifest", aug.iv_manifest, "IV edit manifest")->check(CLI::ExistingFile);
  s_aug->add_option("--cv-manifest", aug.cv_manifest, "CV edit manifest")->check(CLI::ExistingFile);
  s_aug->add_option("--type", aug.types, "question type split (repeatable; default: all)");
  s_aug->add_flag("--strict", aug.strict, "keep only zero-overlap edits");
  s_aug->add_option("--out", aug.out, "output directory")->required();

  CompareOptions cmp;
  auto* s_cmp = app.add_subcommand("compare-reports", "Relative change of an augmented model vs. baseline");
  s_cmp->add_option("--base", cmp.base, "baseline report.json")->required()->check(CLI::ExistingFile);
  s_cmp->add_option("--aug", cmp.aug, "augmented report.json")->required()->check(CLI::ExistingFile);
  s_cmp->add_option("--out", cmp.out, "output directory")->required();

  SampleOptions smp;
  auto* s_smp = app.add_subcommand("sample-review", "Draw the edits shown to human reviewers");
  s_smp->add_option("--manifest", smp.manifests, "edit manifest (repeatable)")
      ->required()
      ->check(CLI::ExistingFile);
  s_smp->add_option("--flips", smp.flips, "restrict to edits flipped in this report.json (repeatable)")
      ->check(CLI::ExistingFile);
  s_smp->add_option("--cap", smp.cap, "edits per question type")->capture_default_str();
  s_smp->add_option("--seed", smp.seed, "sampling seed")->capture_default_str();
  s_smp->add_option("--out", smp.out, "output directory")->required();

  ServeOptions srv;
  auto* s_srv = app.add_subcommand("serve-review", "Serve the labeling API and UI");
  s_srv->add_option("--manifest", srv.manifests, "edit manifest (repeatable)")
      ->required()
      ->check(CLI::ExistingFile);
  s_srv->add_option("--sample", srv.sample, "sample.jsonl from sample-review")->check(CLI::ExistingFile);
  s_srv->add_option("--images", srv.images, "directory with the edited images")
      ->required()
      ->check(CLI::ExistingDirectory);
  s_srv->add_option("--ui", srv.ui, "directory with the UI bundle")->check(CLI::ExistingDirectory);
  s_srv->add_option("--labels", srv.labels, "label store")->capture_default_str();
  s_srv->add_option("--host", srv.host, "bind address")->capture_default_str();
  s_srv->add_option("--port", srv.port, "port (0 picks a free one)")
      ->capture_default_str()
      ->check(CLI::Range(0, 65535));
  s_srv->add_option("--users", srv.users, "allowed user ids (default: any)")->delimiter(',');
  s_srv->add_option("--seed", srv.seed, "session order seed")->capture_default_str();

  s_ingest->callback([&] { action = [&] { run_ingest(ingest, *s_ingest, out); }; });
  s_iv->callback([&] { action = [&] { run_select(EditMode::iv, sel_iv, *s_iv, out); }; });
  s_cv->callback([&] { action = [&] { run_select(EditMode::cv, sel_cv, *s_cv, out); }; });
  s_inpaint->callback([&] { action = [&] { run_inpaint(inpaint, *s_inpaint, out); }; });
  s_cons->callback([&] { action = [&] { run_consistency(cons, *s_cons, out); }; });
  s_aug->callback([&] { action = [&] { run_augment(aug, *s_aug, out); }; });
  s_cmp->callback([&] { action = [&] { run_compare(cmp, *s_cmp, out); }; });
  s_smp->callback([&] { action = [&] { run_sample(smp, *s_smp, out); }; });
  s_srv->callback([&] { action = [&] { run_serve(srv, out); }; });

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ValidationError& e) {
    err << "error[validation]: " << e.what() << "\n";
    return 2;
  } catch (const CLI::ParseError& e) {
    err << "error[usage]: " << e.what() << "\n";
    return 2;
  }

  try {
    if (action) action();
    return 0;
  } catch (const Error& e) {
    err << "error[" << to_string(e.kind()) << "]: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const fs::filesystem_error& e) {
    err << "error[io]: " << e.what() << "\n";
    return 1;
  } catch (const json::exception& e) {
    err << "error[parse]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error[internal]: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace cvf
