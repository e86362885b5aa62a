#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "cvf/coco.hpp"
#include "cvf/error.hpp"
#include "cvf/io.hpp"
#include "cvf/rng.hpp"
#include "cvf/text.hpp"
#include "cvf/vocab.hpp"
#include "cvf/vqa.hpp"
#include "oracles.hpp"

using cvf::ErrorKind;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const cvf::Error& e) {
    return e.kind();
  }
  FAIL("expected cvf::Error");
  return ErrorKind::empty;
}

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const cvf::Error& e) {
    return e.what();
  }
  FAIL("expected cvf::Error");
  return {};
}

const cvf::CocoCorpus& fixture_corpus() {
  static const cvf::CocoCorpus corpus = cvf::load_annotations(oracle::fixture("coco_fixture.json"));
  return corpus;
}

std::vector<std::string> repeat(const std::string& a, int n) { return std::vector<std::string>(n, a); }

// Hand-built from the fixture's instance table: image -> categories present.
const std::map<std::int64_t, std::set<std::int64_t>> kFixtureObjects = {
    {1, {1, 42}},      {2, {1, 2}},          {3, {24, 25}},        {4, {24}},
    {5, {18}},         {6, {44, 47, 62}},    {7, {1, 17, 28}},     {8, {47, 62}},
    {9, {44, 47}},     {10, {1, 47}},        {11, {1, 42}},        {12, {85}},
    {13, {24, 25}},    {14, {1, 3, 25}},     {15, {3, 11, 18}},    {16, {1, 3, 18}},
    {17, {1, 28, 44, 47}}, {18, {1, 15, 28, 31}}, {19, {1, 9, 42}}, {20, {1, 2, 3, 18}},
};

}  // namespace

// ---------------------------------------------------------------- text / rng

TEST_CASE("normalize_answer and tokenize") {
  CHECK(cvf::normalize_answer("  Two   Dogs ") == "two dogs");
  CHECK(cvf::tokenize("What's the man's   bike-color?") ==
        std::vector<std::string>{"whats", "the", "mans", "bike", "color"});
  CHECK(cvf::tokenize("").empty());
  CHECK(cvf::join_tokens({"wine", "glass"}) == "wine glass");
}

TEST_CASE("parse_count accepts digits and number words") {
  CHECK(cvf::parse_count("0") == 0);
  CHECK(cvf::parse_count("2") == 2);
  CHECK(cvf::parse_count("99") == 99);
  CHECK(cvf::parse_count("three") == 3);
  CHECK(cvf::parse_count("twenty") == 20);
  CHECK_FALSE(cvf::parse_count("100"));
  CHECK_FALSE(cvf::parse_count("-1"));
  CHECK_FALSE(cvf::parse_count("2.5"));
  CHECK_FALSE(cvf::parse_count("many"));
  CHECK_FALSE(cvf::parse_count(""));
}

TEST_CASE("seeded_shuffle is a deterministic permutation") {
  std::vector<int> base(50);
  for (int i = 0; i < 50; ++i) base[i] = i;
  auto a = base, b = base, c = base;
  cvf::seeded_shuffle(a, 42);
  cvf::seeded_shuffle(b, 42);
  cvf::seeded_shuffle(c, 43);
  CHECK(a == b);
  CHECK(a != c);
  std::sort(a.begin(), a.end());
  CHECK(a == base);
  // Pinned so that a library change to the shuffle shows up here.
  std::vector<int> small = {0, 1, 2, 3, 4};
  cvf::seeded_shuffle(small, 0);
  std::vector<int> again = {0, 1, 2, 3, 4};
  cvf::seeded_shuffle(again, 0);
  CHECK(small == again);
}

TEST_CASE("hash helpers are stable") {
  CHECK(cvf::fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(cvf::fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(cvf::splitmix64(0) == 0xe220a8397b1dcdafULL);
}

// ---------------------------------------------------------------- coco_ingest

TEST_CASE("minimal corpus: one image, one polygon instance") {
  const auto c = cvf::load_annotations(oracle::fixture("coco_minimal.json"));
  REQUIRE(c.images.size() == 1);
  REQUIRE(c.instances.size() == 1);
  CHECK(c.images[0].image_id == 7);
  CHECK(c.instances[0].instance_id == 70);
  CHECK(cvf::rasterize(c.instances[0], c.images[0]).count() == 16);
  CHECK(c.categories.find_by_name("person")->id == 1);
}

TEST_CASE("unknown category is an integrity error naming the instance") {
  auto doc = cvf::read_json_file(oracle::fixture("coco_minimal.json"));
  doc["annotations"][0]["category_id"] = 999;
  CHECK(kind_of([&] { cvf::parse_annotations(doc); }) == ErrorKind::integrity);
  const std::string msg = message_of([&] { cvf::parse_annotations(doc); });
  CHECK(msg.find("unknown category") != std::string::npos);
  CHECK(msg.find("70") != std::string::npos);
}

TEST_CASE("every dangling instance is listed") {
  auto doc = cvf::read_json_file(oracle::fixture("coco_minimal.json"));
  auto extra = doc["annotations"][0];
  extra["id"] = 71;
  extra["image_id"] = 12345;
  doc["annotations"].push_back(extra);
  auto bad_cat = doc["annotations"][0];
  bad_cat["id"] = 72;
  bad_cat["category_id"] = 5;
  doc["annotations"].push_back(bad_cat);
  const std::string msg = message_of([&] { cvf::parse_annotations(doc); });
  CHECK(msg.find("unknown image: 71") != std::string::npos);
  CHECK(msg.find("unknown category: 72") != std::string::npos);
}

TEST_CASE("empty or out-of-bounds segmentation is rejected") {
  auto doc = cvf::read_json_file(oracle::fixture("coco_minimal.json"));
  doc["annotations"][0]["segmentation"] = {{20.0, 20.0, 30.0, 20.0, 30.0, 30.0}};
  CHECK(kind_of([&] { cvf::parse_annotations(doc); }) == ErrorKind::integrity);
}

TEST_CASE("duplicate ids and names are rejected") {
  auto doc = cvf::read_json_file(oracle::fixture("coco_minimal.json"));
  doc["categories"].push_back({{"id", 2}, {"name", "Person"}});
  CHECK(kind_of([&] { cvf::parse_annotations(doc); }) == ErrorKind::integrity);

  auto doc2 = cvf::read_json_file(oracle::fixture("coco_minimal.json"));
  doc2["annotations"].push_back(doc2["annotations"][0]);
  CHECK(message_of([&] { cvf::parse_annotations(doc2); }).find("duplicate instance ids: 70") !=
        std::string::npos);
}

TEST_CASE("malformed JSON reports the byte offset") {
  oracle::TempDir dir("coco-bad");
  const auto path = dir / "bad.json";
  cvf::write_text_file(path, "{\"images\": [}");
  CHECK(kind_of([&] { cvf::load_annotations(path); }) == ErrorKind::parse);
  CHECK(message_of([&] { cvf::load_annotations(path); }).find("byte") != std::string::npos);
}

TEST_CASE("wrong field types name the field") {
  auto doc = cvf::read_json_file(oracle::fixture("coco_minimal.json"));
  doc["images"][0]["width"] = "eight";
  CHECK(kind_of([&] { cvf::parse_annotations(doc); }) == ErrorKind::parse);
  CHECK(message_of([&] { cvf::parse_annotations(doc); }).find("images[0].width") != std::string::npos);
}

TEST_CASE("fixture corpus loads with the expected counts") {
  const auto& c = fixture_corpus();
  CHECK(c.summary.categories == 80);
  CHECK(c.summary.images == 20);
  CHECK(c.summary.instances == 63);
  CHECK(c.summary.polygon_instances == 56);
  CHECK(c.summary.rle_instances == 7);
}

TEST_CASE("fixture object index matches the hand-built table") {
  const auto& c = fixture_corpus();
  const auto index = cvf::build_object_index(c.images, c.instances);
  REQUIRE(index.images().size() == kFixtureObjects.size());
  for (const auto& [image, cats] : kFixtureObjects) {
    CAPTURE(image);
    CHECK(index.at(image).categories == cats);
  }
  CHECK(index.at(10).instances.at(47) == std::vector<std::int64_t>{1001, 1002, 1003});
}

TEST_CASE("fixture masks: every instance rasterizes to its rectangle area") {
  const auto& c = fixture_corpus();
  const auto doc = cvf::read_json_file(oracle::fixture("coco_fixture.json"));
  for (const auto& a : doc["annotations"]) {
    const auto id = a["id"].get<std::int64_t>();
    const auto& inst = *std::find_if(c.instances.begin(), c.instances.end(),
                                     [&](const auto& i) { return i.instance_id == id; });
    const auto* img = c.find_image(inst.image_id);
    CAPTURE(id);
    CHECK(cvf::rasterize(inst, *img).count() == static_cast<std::size_t>(a["area"].get<double>()));
  }
}

TEST_CASE("object index set semantics") {
  auto doc = cvf::read_json_file(oracle::fixture("coco_minimal.json"));
  doc["categories"].push_back({{"id", 18}, {"name", "dog"}});
  doc["images"].push_back({{"id", 8}, {"width", 8}, {"height", 8}, {"file_name", "empty.png"}});
  auto second = doc["annotations"][0];
  second["id"] = 71;
  doc["annotations"].push_back(second);
  auto dog = doc["annotations"][0];
  dog["id"] = 72;
  dog["category_id"] = 18;
  doc["annotations"].push_back(dog);
  const auto c = cvf::parse_annotations(doc);
  const auto index = cvf::build_object_index(c.images, c.instances);
  CHECK(index.at(7).categories == std::set<std::int64_t>{1, 18});
  CHECK(index.at(7).instances.at(1).size() == 2);
  CHECK(index.at(8).categories.empty());
}

TEST_CASE("corpus JSON round trip") {
  const auto& c = fixture_corpus();
  CHECK(cvf::parse_annotations(cvf::to_json(c)) == c);
}

// ---------------------------------------------------------------- vqa_ingest

TEST_CASE("triplet flags: counting with digits") {
  const auto answers = repeat("2", 10);
  const auto t = cvf::make_triplet(1, 1, "How many zebras are there in the picture?", answers, "how many");
  CHECK(t.uniform);
  CHECK(t.counting);
  CHECK(t.numeric_answer == 2);
  CHECK(t.majority_answer == "2");
}

TEST_CASE("triplet flags: non-uniform answers") {
  auto answers = repeat("no", 9);
  answers.push_back("yes");
  const auto t = cvf::make_triplet(2, 2, "Is this a kitchen?", answers, "is this a");
  CHECK_FALSE(t.uniform);
  CHECK(t.majority_answer == "no");
  CHECK_FALSE(t.numeric_answer);
}

TEST_CASE("triplet flags: number words") {
  const auto t = cvf::make_triplet(3, 3, "What is the number of cups?", repeat("three", 10), "what is the");
  CHECK(t.uniform);
  CHECK(t.counting);
  CHECK(t.numeric_answer == 3);
}

TEST_CASE("majority ties go to the lexicographically smaller answer") {
  auto answers = repeat("umbrella", 5);
  for (int i = 0; i < 5; ++i) answers.push_back("phone");
  CHECK(cvf::make_triplet(4, 4, "What is the man holding?", answers, "x").majority_answer == "phone");
}

TEST_CASE("answers are normalized before comparison") {
  std::vector<std::string> answers = {"Yes", " yes", "YES  "};
  CHECK(cvf::make_triplet(5, 5, "Is it?", answers, "is it").uniform);
}

TEST_CASE("detect_counting") {
  CHECK(cvf::detect_counting("How many dogs are there?", "1"));
  CHECK_FALSE(cvf::detect_counting("Is there a cat?", "no"));
  CHECK(cvf::detect_counting("What is the number of wheels?", "4"));
  CHECK_FALSE(cvf::detect_counting("How many dogs are there?", "lots"));
  CHECK_FALSE(cvf::detect_counting("What number is on the bus?", "4"));
}

TEST_CASE("fixture questions: uniform filter keeps the 13 built as uniform") {
  const auto all = cvf::load_questions_and_answers(oracle::fixture("vqa_questions.json"),
                                                   oracle::fixture("vqa_annotations.json"));
  REQUIRE(all.size() == 20);
  const auto uniform = cvf::filter_uniform(all);
  std::vector<std::int64_t> ids;
  for (const auto& t : uniform) ids.push_back(t.question_id);
  CHECK(ids == std::vector<std::int64_t>{1, 2, 3, 4, 5, 6, 7, 8, 10, 11, 12, 13, 15});
  std::vector<std::int64_t> counting;
  for (const auto& t : uniform)
    if (t.counting) counting.push_back(t.question_id);
  CHECK(counting == std::vector<std::int64_t>{3, 4, 5, 10, 11, 12});
}

TEST_CASE("filter_uniform edge cases") {
  std::vector<cvf::IqaTriplet> three = {
      cvf::make_triplet(1, 1, "a", repeat("x", 3), "t"),
      cvf::make_triplet(2, 2, "b", std::vector<std::string>{"x", "y", "x"}, "t"),
      cvf::make_triplet(3, 3, "c", std::vector<std::string>{"x", "y", "z"}, "t")};
  CHECK(cvf::filter_uniform(three).size() == 1);
  CHECK(cvf::filter_uniform(std::vector<cvf::IqaTriplet>{}).empty());
}

TEST_CASE("answer count mismatch is an error unless overridden") {
  oracle::TempDir dir("vqa-count");
  auto ann = cvf::read_json_file(oracle::fixture("vqa_annotations.json"));
  ann["annotations"][3]["answers"].erase(0);
  cvf::write_text_file(dir / "ann.json", ann.dump());
  const auto q = oracle::fixture("vqa_questions.json");
  const std::string msg = message_of([&] { cvf::load_questions_and_answers(q, dir / "ann.json"); });
  CHECK(msg.find("4") != std::string::npos);
  CHECK(kind_of([&] { cvf::load_questions_and_answers(q, dir / "ann.json"); }) == ErrorKind::validation);
  CHECK(cvf::load_questions_and_answers(q, dir / "ann.json", 0).size() == 20);
}

TEST_CASE("question without annotation lists the ids") {
  oracle::TempDir dir("vqa-missing");
  auto ann = cvf::read_json_file(oracle::fixture("vqa_annotations.json"));
  ann["annotations"].erase(ann["annotations"].begin() + 4);
  ann["annotations"].erase(ann["annotations"].begin() + 4);
  cvf::write_text_file(dir / "ann.json", ann.dump());
  const auto q = oracle::fixture("vqa_questions.json");
  CHECK(kind_of([&] { cvf::load_questions_and_answers(q, dir / "ann.json"); }) == ErrorKind::integrity);
  CHECK(message_of([&] { cvf::load_questions_and_answers(q, dir / "ann.json"); }).find("5,6") !=
        std::string::npos);
}

namespace {

std::vector<cvf::IqaTriplet> triplets_on_images(int n_triplets, int n_images) {
  std::vector<cvf::IqaTriplet> out;
  for (int i = 0; i < n_triplets; ++i) {
    out.push_back(cvf::make_triplet(1000 + i, 1 + i % n_images, "q", repeat("a", 10), "t"));
  }
  return out;
}

std::set<std::int64_t> images_of(const std::vector<cvf::IqaTriplet>& all, const cvf::CorpusSplit& s) {
  std::map<std::int64_t, std::int64_t> image_of;
  for (const auto& t : all) image_of[t.question_id] = t.image_id;
  std::set<std::int64_t> images;
  for (auto q : s.question_ids) images.insert(image_of.at(q));
  return images;
}

}  // namespace

TEST_CASE("split_val: 10 images at 0.9 gives 9 / 1") {
  const auto t = triplets_on_images(10, 10);
  const auto s = cvf::split_val(t, 0.9, 7);
  CHECK(s.test.question_ids.size() == 9);
  CHECK(s.val.question_ids.size() == 1);
  const auto again = cvf::split_val(t, 0.9, 7);
  CHECK(again.test.question_ids == s.test.question_ids);
  CHECK(again.val.question_ids == s.val.question_ids);
}

TEST_CASE("split_val: image level, fraction within one image of the ratio") {
  const auto t = triplets_on_images(100, 40);
  const auto s = cvf::split_val(t, 0.9, 3);
  const auto test_images = images_of(t, s.test);
  const auto val_images = images_of(t, s.val);
  CHECK(test_images.size() + val_images.size() == 40);
  for (auto i : test_images) CHECK(val_images.count(i) == 0);
  CHECK(std::abs(static_cast<int>(test_images.size()) - 36) <= 1);
  CHECK(s.test.question_ids.size() + s.val.question_ids.size() == 100);
}

TEST_CASE("split_val rejects degenerate ratios") {
  const auto t = triplets_on_images(4, 4);
  CHECK(kind_of([&] { cvf::split_val(t, 0.0, 1); }) == ErrorKind::validation);
  CHECK(kind_of([&] { cvf::split_val(t, 1.0, 1); }) == ErrorKind::validation);
}

// ---------------------------------------------------------------- vocab_map

namespace {

cvf::VocabularyTable vocab_from(const std::string& text) {
  std::istringstream in(text);
  return cvf::parse_vocabulary(in, fixture_corpus().categories, "test");
}

std::set<std::int64_t> qa(const std::string& q, const std::string& a) {
  static const auto table = cvf::default_vocabulary(fixture_corpus().categories);
  return cvf::extract_qa_objects(q, a, table).categories;
}

}  // namespace

TEST_CASE("vocabulary row adds canonical plus synonyms") {
  const auto v = vocab_from("person: man, woman, player, child\n");
  std::size_t person_rules = 0;
  for (const auto& r : v.rules()) person_rules += r.category_id == 1;
  CHECK(person_rules == 5);
}

TEST_CASE("multi-token canonical name and its synonym") {
  const auto v = vocab_from("fire hydrant: hydrant\n");
  std::vector<std::string> phrases;
  for (const auto& r : v.rules())
    if (r.category_id == 11) phrases.push_back(r.phrase());
  CHECK(phrases == std::vector<std::string>{"fire hydrant", "hydrant"});
  const auto a = cvf::extract_qa_objects("Is the fire hydrant red?", "yes", v);
  CHECK(a.categories == std::set<std::int64_t>{11});
  CHECK(a.matched.size() == 1);
  CHECK(cvf::extract_qa_objects("Is the hydrant red?", "yes", v).categories ==
        std::set<std::int64_t>{11});
}

TEST_CASE("vocabulary errors name the line") {
  std::string msg = message_of([] { vocab_from("person: man\nbicycle: man\n"); });
  CHECK(msg.find("test:2") != std::string::npos);
  msg = message_of([] { vocab_from("\n# note\nunicorn: horn\n"); });
  CHECK(msg.find("test:3") != std::string::npos);
  CHECK(msg.find("unicorn") != std::string::npos);
  CHECK(kind_of([] { vocab_from("person: bicycle\n"); }) == ErrorKind::validation);
}

TEST_CASE("default vocabulary file matches the built-in table") {
  const std::string file = cvf::read_text_file(std::filesystem::path(CVF_SOURCE_DIR) / "data/vocab_default.txt");
  CHECK(file == cvf::default_vocabulary_text());
}

TEST_CASE("rule order does not depend on the file order") {
  const auto a = vocab_from("person: man, woman\nbicycle: bike\n");
  const auto b = vocab_from("bicycle: bike\nperson: woman, man\n");
  REQUIRE(a.rules().size() == b.rules().size());
  for (std::size_t i = 0; i < a.rules().size(); ++i) CHECK(a.rules()[i].tokens == b.rules()[i].tokens);
}

TEST_CASE("QA object extraction examples") {
  CHECK(qa("What color is the balloon?", "red").empty());
  CHECK(qa("Is he riding a bike?", "yes") == std::set<std::int64_t>{1, 2});
  CHECK(qa("How many zebras are there in the picture?", "2") == std::set<std::int64_t>{24});
  CHECK(qa("How many people are in the photo?", "1") == std::set<std::int64_t>{1});
  CHECK(qa("What is the man holding?", "umbrella") == std::set<std::int64_t>{1, 28});
  CHECK(qa("What is the number of cups?", "three") == std::set<std::int64_t>{47});
}

TEST_CASE("longest phrase wins: wine glass matched once") {
  const auto table = cvf::default_vocabulary(fixture_corpus().categories);
  const auto q = cvf::extract_qa_objects("Is there a wine glass?", "no", table);
  CHECK(q.categories == std::set<std::int64_t>{46});
  REQUIRE(q.matched.size() == 1);
  CHECK(q.matched[0].phrase == "wine glass");
  CHECK(q.matched[0].source == "question");
  CHECK(q.matched[0].token_index == 3);
}

TEST_CASE("question and answer are scanned separately") {
  const auto table = cvf::default_vocabulary(fixture_corpus().categories);
  const auto q = cvf::extract_qa_objects("What is on the table?", "cup", table);
  CHECK(q.categories == std::set<std::int64_t>{47});
  CHECK(q.question_categories() == std::set<std::int64_t>{});
  // "dining table" is the canonical name; "table" alone is not a phrase.
  const auto r = cvf::extract_qa_objects("Is this a dining table?", "yes", table);
  CHECK(r.question_categories() == std::set<std::int64_t>{67});
}

TEST_CASE("naive plurals match") {
  CHECK(qa("How many dogs?", "2") == std::set<std::int64_t>{18});
  CHECK(qa("How many buses?", "2") == std::set<std::int64_t>{6});
  CHECK(qa("How many bikes?", "2") == std::set<std::int64_t>{2});
}
