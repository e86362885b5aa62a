// Acceptance suite: one PASS/FAIL line per criterion. The exit status is the
// number of failed criteria.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "cvf/augment.hpp"
#include "cvf/consistency.hpp"
#include "cvf/error.hpp"
#include "cvf/mask.hpp"
#include "cvf/select.hpp"
#include "fixture_tables.hpp"
#include "oracles.hpp"
#include "pipeline.hpp"

namespace {

using Clock = std::chrono::steady_clock;
using oracle::Grid;

/// Keeps the first failure of a criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok && failure_.empty()) failure_ = what;
  }
  bool ok() const { return failure_.empty(); }
  const std::string& failure() const { return failure_; }

 private:
  std::string failure_;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

cvf::FlipOutcome from_letter(char c) {
  switch (c) {
    case 'C': return cvf::FlipOutcome::consistent;
    case 'P': return cvf::FlipOutcome::pos_to_neg;
    case 'N': return cvf::FlipOutcome::neg_to_pos;
    default: return cvf::FlipOutcome::neg_to_neg;
  }
}

// |a & b| and |b| counted pixel by pixel.
std::pair<std::size_t, std::size_t> overlap_counts(const Grid& a, const Grid& b) {
  std::size_t inter = 0, q = 0;
  for (std::size_t y = 0; y < b.size(); ++y)
    for (std::size_t x = 0; x < b[y].size(); ++x) {
      q += b[y][x] != 0;
      inter += b[y][x] != 0 && a[y][x] != 0;
    }
  return {inter, q};
}

Grid grid_union(const Grid& a, const Grid& b) {
  Grid out = a;
  for (std::size_t y = 0; y < a.size(); ++y)
    for (std::size_t x = 0; x < a[y].size(); ++x) out[y][x] = a[y][x] || b[y][x];
  return out;
}

// ---------------------------------------------------------------------------

Check overlap_oracle() {
  Check c;
  const auto start = Clock::now();
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> density(0.0, 0.6);
  for (int i = 0; i < 200; ++i) {
    const cvf::Mask t = oracle::random_mask(gen, 64, 64, density(gen));
    cvf::Mask q = oracle::random_mask(gen, 64, 64, density(gen));
    if (q.count() == 0) q.set(5, 5);
    const auto s = cvf::overlap_score(t, q);
    const double want = oracle::overlap(oracle::to_grid(t), oracle::to_grid(q));
    const auto counts = overlap_counts(oracle::to_grid(t), oracle::to_grid(q));
    c.expect(s.intersection == counts.first && s.qa_pixels == counts.second,
             "pair " + std::to_string(i) + ": counts differ from brute force");
    c.expect(std::abs(s.value() - want) <= 1e-12, "pair " + std::to_string(i) + ": value differs");
    c.expect(s.value() >= 0.0 && s.value() <= 1.0, "value outside [0, 1]");
    c.expect(cvf::overlap_score(q, q).value() == 1.0, "overlap of a mask with itself is not 1");
    cvf::Mask complement(64, 64);
    for (int y = 0; y < 64; ++y)
      for (int x = 0; x < 64; ++x)
        if (!q.get(x, y)) complement.set(x, y);
    c.expect(cvf::overlap_score(complement, q).value() == 0.0, "disjoint overlap is not 0");
  }
  bool threw = false;
  try {
    cvf::overlap_score(cvf::Mask(4, 4), cvf::Mask(4, 4));
  } catch (const cvf::Error& e) {
    threw = e.kind() == cvf::ErrorKind::empty;
  }
  c.expect(threw, "empty QA mask did not raise an empty error");
  c.expect(seconds_since(start) < 5.0, "slower than 5 s");
  return c;
}

Check rle_round_trip() {
  Check c;
  const auto start = Clock::now();
  std::mt19937_64 gen(77);
  std::uniform_int_distribution<int> side(1, 48);
  std::uniform_real_distribution<double> density(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const int w = side(gen), h = side(gen);
    const cvf::Mask m = oracle::random_mask(gen, w, h, density(gen));
    const auto counts = cvf::encode_rle(m);
    c.expect(counts == oracle::rle(oracle::to_grid(m)), "encode differs from the column-major oracle");
    c.expect(cvf::decode_rle(counts, w, h) == m, "decode(encode(m)) != m");
    c.expect(cvf::encode_rle(cvf::decode_rle(counts, w, h)) == counts, "encode(decode(c)) != c");
    c.expect(cvf::rle_counts_from_string(cvf::rle_counts_to_string(counts)) == counts,
             "compressed string round trip failed");
  }
  c.expect(seconds_since(start) < 5.0, "slower than 5 s");
  return c;
}

Check dilation_oracle() {
  Check c;
  std::mt19937_64 gen(5);
  std::uniform_int_distribution<int> side(1, 40), radius(0, 5);
  std::uniform_real_distribution<double> density(0.0, 0.1);
  for (int i = 0; i < 100; ++i) {
    const cvf::Mask m = oracle::random_mask(gen, side(gen), side(gen), density(gen));
    const int r = radius(gen);
    const cvf::Mask d = cvf::dilate(m, r);
    c.expect(oracle::to_grid(d) == oracle::dilate(oracle::to_grid(m), r),
             "mask " + std::to_string(i) + " differs from the Chebyshev brute force");
    c.expect(cvf::dilate(m, 0) == m, "radius 0 is not the identity");
    const cvf::Mask next = cvf::dilate(m, r + 1);
    c.expect(cvf::intersection_count(d, next) == d.count(), "dilation is not monotone in radius");
  }
  return c;
}

// ---------------------------------------------------------------------------
// Selection fuzzing over random synthetic corpora.

const std::vector<std::string> kNames = {"cat", "dog", "cup", "car", "kite"};

struct FuzzInstance {
  cvf::InstanceId id;
  cvf::CategoryId category;
  Grid grid;
};

struct FuzzImage {
  cvf::ImageId id;
  int w, h;
  std::vector<FuzzInstance> instances;
};

struct FuzzQuestion {
  cvf::IqaTriplet triplet;
  std::set<cvf::CategoryId> mentioned;
};

struct FuzzCorpus {
  std::vector<FuzzImage> images;
  std::vector<FuzzQuestion> questions;
  cvf::CocoCorpus corpus;
};

FuzzCorpus make_corpus(std::mt19937_64& gen) {
  auto uniform = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen); };
  FuzzCorpus fc;
  cvf::json doc;
  doc["categories"] = cvf::json::array();
  for (std::size_t i = 0; i < kNames.size(); ++i)
    doc["categories"].push_back({{"id", i + 1}, {"name", kNames[i]}});
  doc["images"] = cvf::json::array();
  doc["annotations"] = cvf::json::array();
  cvf::InstanceId next_instance = 1;
  cvf::QuestionId next_question = 1;

  const int n_images = uniform(1, 3);
  for (int im = 1; im <= n_images; ++im) {
    FuzzImage img{im, uniform(12, 40), uniform(12, 40), {}};
    doc["images"].push_back({{"id", im}, {"width", img.w}, {"height", img.h},
                             {"file_name", std::to_string(im) + ".png"}});
    const int n_inst = uniform(0, 6);
    for (int k = 0; k < n_inst; ++k) {
      FuzzInstance inst{next_instance++, uniform(1, static_cast<int>(kNames.size())), {}};
      cvf::json ann = {{"id", inst.id}, {"image_id", im}, {"category_id", inst.category}};
      const int x0 = uniform(0, img.w - 1), y0 = uniform(0, img.h - 1);
      const int x1 = std::min(img.w, x0 + uniform(1, img.w / 2)),
                y1 = std::min(img.h, y0 + uniform(1, img.h / 2));
      if (uniform(0, 2) == 0) {
        // Run-length blob: a rectangle with holes punched in.
        inst.grid = oracle::rect(img.w, img.h, x0, y0, x1, y1);
        for (int y = y0; y < y1; ++y)
          for (int x = x0; x < x1; ++x)
            if ((x + y) != x0 + y0 && uniform(0, 4) == 0) inst.grid[y][x] = 0;
        ann["segmentation"] = {{"size", {img.h, img.w}}, {"counts", oracle::rle(inst.grid)}};
        ann["iscrowd"] = 1;
      } else {
        const std::vector<double> poly = {double(x0), double(y0), double(x1), double(y0),
                                          double(x1), double(y1), double(x0), double(y1)};
        inst.grid = oracle::rasterize({poly}, img.w, img.h);
        ann["segmentation"] = {poly};
        ann["iscrowd"] = 0;
      }
      doc["annotations"].push_back(ann);
      img.instances.push_back(std::move(inst));
    }

    const int n_q = uniform(1, 3);
    for (int k = 0; k < n_q; ++k) {
      FuzzQuestion q;
      const int c1 = uniform(1, static_cast<int>(kNames.size()));
      const int c2 = uniform(1, static_cast<int>(kNames.size()));
      std::string text, answer;
      switch (uniform(0, 4)) {
        case 0:
          text = "Is there a " + kNames[c1 - 1] + "?";
          answer = uniform(0, 1) ? "yes" : "no";
          q.mentioned = {c1};
          break;
        case 1:
          text = "Is there a " + kNames[c1 - 1] + " and a " + (c2 == 2 ? "puppy" : kNames[c2 - 1]) + "?";
          answer = "yes";
          q.mentioned = {c1, c2};
          break;
        case 2:
          text = "What color is the " + kNames[c1 - 1] + "?";
          answer = "red";
          q.mentioned = {c1};
          break;
        case 3: {
          text = "How many " + kNames[c1 - 1] + "s are there?";
          int n = 0;
          for (const auto& inst : img.instances) n += inst.category == c1;
          answer = std::to_string(uniform(0, 2) ? n : uniform(0, 4));
          q.mentioned = {c1};
          break;
        }
        default:
          text = "Is it sunny?";
          answer = "yes";
          break;
      }
      std::vector<std::string> answers(10, answer);
      if (uniform(0, 9) == 0) answers[3] = "maybe";
      q.triplet = cvf::make_triplet(next_question++, im, text, answers, "");
      fc.questions.push_back(std::move(q));
    }
    fc.images.push_back(std::move(img));
  }
  fc.corpus = cvf::parse_annotations(doc);
  return fc;
}

struct OracleRecord {
  std::vector<cvf::InstanceId> removed;
  std::size_t area_pixels;
  std::string answer;
  double overlap;
  std::size_t overlap_intersection;
  Grid mask;
};

std::string oracle_edit_id(cvf::QuestionId q, bool iv, cvf::CategoryId cat, cvf::InstanceId inst) {
  char edit_id_buf[64];
  if (iv) {
    std::snprintf(edit_id_buf, sizeof edit_id_buf, "%012lld-iv-%04lld-all", (long long)q, (long long)cat);
  } else {
    std::snprintf(edit_id_buf, sizeof edit_id_buf, "%012lld-cv-%04lld-%08lld", (long long)q,
                  (long long)cat, (long long)inst);
  }
  return edit_id_buf;
}

// Expected records, recomputed from the raw instance grids.
std::map<std::string, OracleRecord> oracle_select(const FuzzCorpus& fc, bool iv,
                                                  const cvf::SelectionConfig& cfg) {
  std::map<std::string, OracleRecord> out;
  const int r = cfg.dilate_radius;
  for (const auto& q : fc.questions) {
    const auto& t = q.triplet;
    if (!t.uniform) continue;
    const FuzzImage& img = fc.images[static_cast<std::size_t>(t.image_id - 1)];
    const double total = double(img.w) * double(img.h);
    const Grid empty(static_cast<std::size_t>(img.h), std::vector<int>(static_cast<std::size_t>(img.w)));
    auto union_of_category = [&](cvf::CategoryId cat) {
      Grid g = empty;
      for (const auto& inst : img.instances)
        if (inst.category == cat) g = grid_union(g, inst.grid);
      return g;
    };
    std::set<cvf::CategoryId> present;
    for (const auto& inst : img.instances) present.insert(inst.category);

    if (iv) {
      std::vector<Grid> qa;
      Grid all = empty;
      bool any = false;
      for (auto cat : q.mentioned) {
        if (!present.count(cat)) continue;
        any = true;
        Grid g = union_of_category(cat);
        if (cfg.qa_mask == cvf::QaMaskMode::per_category_max) {
          qa.push_back(cfg.dilate_qa ? oracle::dilate(g, r) : g);
        } else {
          all = grid_union(all, g);
        }
      }
      if (any && cfg.qa_mask == cvf::QaMaskMode::union_all) qa.push_back(cfg.dilate_qa ? oracle::dilate(all, r) : all);
      for (auto cat : present) {
        if (q.mentioned.count(cat)) continue;
        std::size_t largest = 0;
        std::vector<cvf::InstanceId> ids;
        for (const auto& inst : img.instances)
          if (inst.category == cat) {
            largest = std::max(largest, oracle::count(inst.grid));
            ids.push_back(inst.id);
          }
        if (!(double(largest) / total < cfg.area_threshold)) continue;
        const Grid target = union_of_category(cat);
        const Grid td = cfg.dilate_target ? oracle::dilate(target, r) : target;
        double worst = 0.0;
        std::size_t any_inter = 0;
        for (const auto& g : qa) {
          const auto [inter, n] = overlap_counts(td, g);
          worst = std::max(worst, double(inter) / double(n));
          any_inter += inter;
        }
        const bool keep = cfg.strict_iv ? any_inter == 0 : worst < cfg.iv_overlap_threshold;
        if (!keep) continue;
        out[oracle_edit_id(t.question_id, true, cat, 0)] =
            OracleRecord{ids, largest, t.majority_answer, worst, any_inter, target};
      }
    } else {
      if (!t.counting || !t.numeric_answer || q.mentioned.size() != 1) continue;
      const auto cat = *q.mentioned.begin();
      std::vector<const FuzzInstance*> insts;
      for (const auto& inst : img.instances)
        if (inst.category == cat) insts.push_back(&inst);
      if (static_cast<int>(insts.size()) != *t.numeric_answer) continue;
      for (const auto* inst : insts) {
        const std::size_t pixels = oracle::count(inst->grid);
        if (!(double(pixels) / total < cfg.area_threshold)) continue;
        double value = 0.0;
        std::size_t inter = 0;
        if (insts.size() > 1) {
          Grid rest = empty;
          for (const auto* o : insts)
            if (o != inst) rest = grid_union(rest, o->grid);
          const auto counts = overlap_counts(cfg.dilate_target ? oracle::dilate(inst->grid, r) : inst->grid,
                                             cfg.dilate_qa ? oracle::dilate(rest, r) : rest);
          inter = counts.first;
          value = double(counts.first) / double(counts.second);
        }
        if (!(value <= cfg.cv_overlap_threshold)) continue;
        out[oracle_edit_id(t.question_id, false, cat, inst->id)] = OracleRecord{
            {inst->id}, pixels, std::to_string(*t.numeric_answer - 1), value, inter, inst->grid};
      }
    }
  }
  return out;
}

cvf::SelectionConfig random_config(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> area(0.01, 0.4), iv(0.0, 0.4);
  cvf::SelectionConfig cfg;
  cfg.area_threshold = area(gen);
  cfg.iv_overlap_threshold = iv(gen);
  cfg.cv_overlap_threshold = std::vector<double>{0.0, 0.0, 0.05, 0.3}[gen() % 4];
  cfg.dilate_radius = static_cast<int>(gen() % 4);
  cfg.strict_iv = gen() % 5 == 0;
  cfg.dilate_target = gen() % 6 != 0;
  cfg.dilate_qa = gen() % 6 != 0;
  cfg.qa_mask = gen() % 2 ? cvf::QaMaskMode::union_all : cvf::QaMaskMode::per_category_max;
  return cfg;
}

std::set<std::string> ids_of(const std::vector<cvf::EditRecord>& records) {
  std::set<std::string> out;
  for (const auto& r : records) out.insert(r.edit_id);
  return out;
}

Check selection_soundness() {
  Check c;
  // Fixture corpus against the hand enumeration.
  {
    const auto corpus = cvf::load_annotations(oracle::fixture("coco_fixture.json"));
    const auto index = cvf::build_object_index(corpus.images, corpus.instances);
    const auto triplets = cvf::load_questions_and_answers(oracle::fixture("vqa_questions.json"),
                                                          oracle::fixture("vqa_annotations.json"));
    const auto vocab = cvf::default_vocabulary(corpus.categories);
    for (bool iv : {true, false}) {
      const auto run = cvf::run_selection(iv ? cvf::EditMode::iv : cvf::EditMode::cv, corpus, index,
                                          triplets, vocab, {});
      const auto& want = iv ? fixture_tables::kIv : fixture_tables::kCv;
      c.expect(run.records.size() == want.size(), "fixture record count differs from the hand table");
      for (std::size_t i = 0; i < std::min(run.records.size(), want.size()); ++i) {
        const auto& got = run.records[i];
        c.expect(got.edit_id == want[i].edit_id && got.expected_answer == want[i].answer &&
                     got.removed_instance_ids == want[i].removed &&
                     got.area_pixels == want[i].area_pixels,
                 "fixture record " + want[i].edit_id + " differs from the hand table");
      }
    }
  }

  std::mt19937_64 gen(99);
  std::size_t records_seen = 0;
  for (int trial = 0; trial < 1000 && c.ok(); ++trial) {
    const FuzzCorpus fc = make_corpus(gen);
    std::istringstream vt("dog: puppy\n");
    const auto vocab = cvf::parse_vocabulary(vt, fc.corpus.categories, "fuzz");
    const auto index = cvf::build_object_index(fc.corpus.images, fc.corpus.instances);
    std::vector<cvf::IqaTriplet> triplets;
    for (const auto& q : fc.questions) triplets.push_back(q.triplet);
    const std::string where = "corpus " + std::to_string(trial);

    const cvf::SelectionConfig cfg = random_config(gen);
    for (bool iv : {true, false}) {
      const auto mode = iv ? cvf::EditMode::iv : cvf::EditMode::cv;
      const auto run = cvf::run_selection(mode, fc.corpus, index, triplets, vocab, cfg);
      const auto want = oracle_select(fc, iv, cfg);
      records_seen += run.records.size();
      c.expect(run.records.size() == want.size(),
               where + ": " + std::to_string(run.records.size()) + " records, oracle " +
                   std::to_string(want.size()));
      for (const auto& r : run.records) {
        auto it = want.find(r.edit_id);
        if (it == want.end()) {
          c.expect(false, where + ": unexpected record " + r.edit_id);
          continue;
        }
        const OracleRecord& o = it->second;
        const auto& q = *std::find_if(fc.questions.begin(), fc.questions.end(),
                                      [&](const auto& fq) { return fq.triplet.question_id == r.question_id; });
        const auto qa = cvf::extract_qa_objects(q.triplet.question_text, q.triplet.majority_answer, vocab);
        if (iv) {
          c.expect(!q.mentioned.count(r.target_category_id) && !qa.categories.count(r.target_category_id),
                   where + ": IV target " + r.edit_id + " is a QA object");
        }
        c.expect(r.removed_instance_ids == o.removed, where + ": removed ids differ for " + r.edit_id);
        c.expect(r.area_pixels == o.area_pixels, where + ": area differs for " + r.edit_id);
        c.expect(r.expected_answer == o.answer, where + ": answer differs for " + r.edit_id);
        c.expect(oracle::to_grid(r.removal_mask) == o.mask, where + ": removal mask differs for " + r.edit_id);
        c.expect(std::abs(r.overlap_value() - o.overlap) <= 1e-12, where + ": overlap differs for " + r.edit_id);
        c.expect(r.area() < cfg.area_threshold, where + ": area bound violated by " + r.edit_id);
        if (iv) {
          c.expect(cfg.strict_iv ? o.overlap_intersection == 0 : o.overlap < cfg.iv_overlap_threshold,
                   where + ": IV overlap bound violated by " + r.edit_id);
        } else {
          c.expect(o.overlap <= cfg.cv_overlap_threshold, where + ": CV overlap bound violated by " + r.edit_id);
        }
      }

      // Tightening every threshold never adds a record.
      cvf::SelectionConfig tight = cfg;
      std::uniform_real_distribution<double> shrink(0.0, 1.0);
      tight.area_threshold *= shrink(gen);
      tight.iv_overlap_threshold *= shrink(gen);
      tight.cv_overlap_threshold *= shrink(gen);
      tight.strict_iv = cfg.strict_iv || gen() % 3 == 0;
      const auto tighter = cvf::run_selection(mode, fc.corpus, index, triplets, vocab, tight);
      const auto loose_ids = ids_of(run.records);
      for (const auto& id : ids_of(tighter.records))
        c.expect(loose_ids.count(id) == 1, where + ": tightening added " + id);
    }
  }
  c.expect(records_seen > 1000, "fuzzing produced too few records to be meaningful");
  return c;
}

// ---------------------------------------------------------------------------

cvf::ConsistencyReport synthetic_report(std::size_t n, std::size_t p2n, std::size_t n2p, std::size_t n2n) {
  std::vector<cvf::EditRecord> manifest;
  std::vector<cvf::IqaTriplet> triplets;
  cvf::PredictionSet orig, edit;
  for (std::size_t i = 0; i < n; ++i) {
    const auto qid = static_cast<cvf::QuestionId>(i + 1);
    cvf::EditRecord r;
    r.question_id = qid;
    r.edit_id = "e" + std::to_string(qid);
    r.expected_answer = "yes";
    r.removal_mask = cvf::Mask(10, 10);
    r.area_pixels = 1 + i % 12;
    manifest.push_back(r);
    triplets.push_back(cvf::make_triplet(qid, qid, "Is there a cat?", std::vector<std::string>(10, "yes"), ""));
    std::string o = "yes", e = "yes";
    if (i < p2n) {
      e = "no";
    } else if (i < p2n + n2p) {
      o = "no";
    } else if (i < p2n + n2p + n2n) {
      o = "no";
      e = "maybe";
    }
    orig.entries[std::to_string(qid)] = o;
    edit.entries[r.edit_id] = e;
  }
  return cvf::compute_report(orig, edit, manifest, triplets, cvf::EditMode::iv);
}

bool partition_holds(const cvf::ConsistencyReport& r) {
  auto ok = [](const cvf::FlipCounts& c) {
    return c.flipped() == c.pos_to_neg + c.neg_to_pos + c.neg_to_neg && c.consistent + c.flipped() == c.pairs;
  };
  bool all = ok(r.overall);
  for (const auto& [type, c] : r.per_question_type) all = all && ok(c);
  for (const auto& c : r.per_area_bin) all = all && ok(c);
  return all;
}

Check flip_taxonomy() {
  Check c;
  const auto& dom = fixture_tables::kIvDomain;
  for (std::size_t o = 0; o < dom.size(); ++o)
    for (std::size_t e = 0; e < dom.size(); ++e)
      c.expect(cvf::classify_iv(dom[o], dom[e], "a") == from_letter(fixture_tables::kIvTruth[o][e]),
               "IV truth table mismatch at (" + dom[o] + ", " + dom[e] + ")");
  std::size_t cv_pairs = 0;
  for (int o = 0; o <= 5; ++o)
    for (int e = 0; e <= 5; ++e, ++cv_pairs)
      c.expect(cvf::classify_cv(std::to_string(o), std::to_string(e), 3) ==
                   from_letter(fixture_tables::kCvTruthN3[o][e]),
               "CV truth table mismatch at (" + std::to_string(o) + ", " + std::to_string(e) + ")");
  c.expect(cv_pairs == 36, "CV table does not cover 36 pairs");

  struct Row {
    std::size_t p2n, n2p, n2n;
    long long printed_total;
  };
  for (const Row& row : {Row{744, 693, 353, 1789}, Row{2869, 2057, 3214, 8141}}) {
    const auto r = synthetic_report(10000, row.p2n, row.n2p, row.n2n);
    const auto& o = r.overall;
    c.expect(partition_holds(r), "partition identity fails");
    c.expect(cvf::to_hundredths(o.percent(o.pos_to_neg)) == static_cast<long long>(row.p2n) &&
                 cvf::to_hundredths(o.percent(o.neg_to_pos)) == static_cast<long long>(row.n2p) &&
                 cvf::to_hundredths(o.percent(o.neg_to_neg)) == static_cast<long long>(row.n2n),
             "components do not print exactly");
    c.expect(std::llabs(cvf::to_hundredths(o.flipped_percent()) - row.printed_total) <= 1,
             "total outside the one-hundredth envelope");
  }
  std::mt19937_64 gen(3);
  for (int i = 0; i < 50; ++i) {
    const std::size_t n = 1 + gen() % 500;
    const std::size_t a = gen() % (n + 1), b = gen() % (n - a + 1), d = gen() % (n - a - b + 1);
    c.expect(partition_holds(synthetic_report(n, a, b, d)), "partition identity fails on a random report");
  }
  return c;
}

Check random_baseline() {
  Check c;
  const double v = cvf::random_flip_baseline(3000, 0.398);
  c.expect(std::abs(v - 0.398 / 30.0) <= 1e-12, "baseline is not error_rate / vocabulary");
  c.expect(std::abs(v - 0.013) <= 0.0005, "baseline is not within 0.0005 of 0.013");
  c.expect(cvf::random_flip_baseline(3000, 0.0) == 0.0, "zero error rate does not give 0");
  return c;
}

Check agreement() {
  Check c;
  const auto r = cvf::agreement_stats(fixture_tables::label_table());
  auto same = [](const cvf::LabelShares& s, const fixture_tables::Tally& t) {
    return s.yes == t.yes && s.no == t.no && s.ambiguous == t.ambiguous && s.missing == t.missing;
  };
  c.expect(r.items == 20 && r.users.size() == 3, "fixture universe is not 20 items, 3 users");
  for (std::size_t u = 0; u < r.users.size() && u < 3; ++u)
    c.expect(same(r.users[u].second, fixture_tables::kUserTally[u]), "user tally differs");
  c.expect(same(r.all_users, fixture_tables::kAllUsersTally), "intersection tally differs");
  c.expect(same(r.any_user, fixture_tables::kAnyUserTally), "union tally differs");

  const std::string table = cvf::format_agreement_table(r);
  for (const char* needle : {"Yes(%)", "No(%)", "Ambiguous(%)", "User1 ∩ User2 ∩ User3", "User1 ∪ User2 ∪ User3"})
    c.expect(table.find(needle) != std::string::npos, std::string("table lacks ") + needle);
  c.expect(table.find("User3 ") < table.find("User1 ∩") && table.find("User1 ∩") < table.find("User1 ∪"),
           "table rows are not users, intersection, union");

  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 500; ++trial) {
    cvf::LabelTable t;
    const int users = 1 + static_cast<int>(gen() % 5), items = 1 + static_cast<int>(gen() % 40);
    for (int u = 0; u < users; ++u)
      for (int i = 0; i < items; ++i)
        if (const auto pick = gen() % 4; pick < 3)
          t["u" + std::to_string(u)]["e" + std::to_string(i)] = static_cast<cvf::Label>(pick);
    const auto s = cvf::agreement_stats(t);
    for (const auto& [user, shares] : s.users)
      c.expect(s.all_users.yes <= shares.yes && shares.yes <= s.any_user.yes,
               "intersection <= user <= union violated");
  }
  return c;
}

cvf::ConsistencyReport flips_report(std::size_t flipped) {
  cvf::ConsistencyReport r;
  r.n_orig = 10000;
  r.n_orig_correct = 5000;
  r.overall.pairs = 10000;
  r.overall.pos_to_neg = flipped;
  r.overall.consistent = 10000 - flipped;
  r.pair_digest = "same";
  return r;
}

Check relative_summary() {
  Check c;
  const auto s = cvf::relative_summary(flips_report(8384), flips_report(5074));
  const auto& e = s.entries.front();
  c.expect(e.flip_reduction_relative.has_value(), "reduction undefined");
  if (e.flip_reduction_relative) {
    c.expect(std::abs(100.0 * *e.flip_reduction_relative - 39.5) <= 0.1, "reduction is not 39.5% +- 0.1");
  }
  const auto same = cvf::relative_summary(flips_report(8384), flips_report(8384));
  c.expect(same.entries.front().flip_reduction_relative == 0.0 && same.entries.front().accuracy_delta == 0.0,
           "identical reports do not give 0");
  return c;
}

Check end_to_end_determinism() {
  Check c;
  const auto start = Clock::now();
  oracle::TempDir a("acceptance-a"), b("acceptance-b");
  try {
    pipeline::run(a.path());
    pipeline::run(b.path());
  } catch (const std::exception& e) {
    c.expect(false, e.what());
    return c;
  }
  const auto fa = pipeline::outputs(a.path());
  const auto fb = pipeline::outputs(b.path());
  c.expect(!fa.empty() && fa.count("iv/manifest.jsonl") && fa.count("cons-iv/report.json") &&
               fa.count("augment/plans.json"),
           "pipeline outputs are missing");
  c.expect(fa.size() == fb.size(), "runs wrote different file sets");
  for (const auto& [name, bytes] : fa) {
    auto it = fb.find(name);
    c.expect(it != fb.end() && it->second == bytes, name + " differs between runs");
  }
  c.expect(seconds_since(start) < 30.0, "slower than 30 s");
  return c;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Check()>>> criteria = {
      {"overlap-score oracle (200 pairs, 64x64)", overlap_oracle},
      {"run-length round trip (1000 masks)", rle_round_trip},
      {"dilation oracle (100 masks)", dilation_oracle},
      {"selection soundness (fixture + 1000 random corpora)", selection_soundness},
      {"flip taxonomy truth tables and partition", flip_taxonomy},
      {"random baseline", random_baseline},
      {"agreement statistics", agreement},
      {"relative-summary arithmetic", relative_summary},
      {"end-to-end determinism", end_to_end_determinism},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    const auto start = Clock::now();
    Check c;
    try {
      c = run();
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    char timing[32];
    std::snprintf(timing, sizeof timing, "%.2fs", seconds_since(start));
    if (c.ok()) {
      std::cout << "PASS " << name << " (" << timing << ")\n";
    } else {
      std::cout << "FAIL " << name << " (" << timing << "): " << c.failure() << "\n";
      ++failed;
    }
  }
  return failed;
}
