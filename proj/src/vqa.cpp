#include "cvf/vqa.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

#include "cvf/error.hpp"
#include "cvf/io.hpp"
#include "cvf/rng.hpp"
#include "cvf/text.hpp"

namespace cvf {

bool detect_counting(std::string_view question_text, std::string_view majority_answer) {
  const auto tokens = tokenize(question_text);
  bool cue = false;
  for (std::size_t i = 0; i < tokens.size() && !cue; ++i) {
    if (tokens[i] == "many") cue = true;
    if (tokens[i] == "number" && i + 1 < tokens.size() && tokens[i + 1] == "of") cue = true;
  }
  return cue && parse_count(majority_answer).has_value();
}

IqaTriplet make_triplet(QuestionId question_id, std::int64_t image_id, std::string question_text,
                        std::span<const std::string> raw_answers, std::string question_type) {
  IqaTriplet t;
  t.question_id = question_id;
  t.image_id = image_id;
  t.question_text = std::move(question_text);
  t.question_type = normalize_answer(question_type);
  std::map<std::string, int> freq;
  for (const auto& a : raw_answers) {
    t.answers.push_back(normalize_answer(a));
    ++freq[t.answers.back()];
  }
  int best = 0;
  for (const auto& [answer, n] : freq) {  // ascending keys: first max wins ties
    if (n > best) {
      best = n;
      t.majority_answer = answer;
    }
  }
  t.uniform = !t.answers.empty() && freq.size() == 1;
  t.numeric_answer = parse_count(t.majority_answer);
  t.counting = detect_counting(t.question_text, t.majority_answer);
  return t;
}

std::vector<IqaTriplet> load_questions_and_answers(const std::filesystem::path& questions_path,
                                                   const std::filesystem::path& annotations_path,
                                                   int answers_per_question) {
  const json qdoc = read_json_file(questions_path);
  const json adoc = read_json_file(annotations_path);

  struct Annotation {
    std::vector<std::string> answers;
    std::string question_type;
  };
  std::unordered_map<QuestionId, Annotation> by_qid;
  const json& anns = get_array(adoc, "annotations", annotations_path.string());
  std::vector<QuestionId> bad_count;
  for (std::size_t i = 0; i < anns.size(); ++i) {
    const std::string where = "annotations[" + std::to_string(i) + "]";
    Annotation a;
    const QuestionId qid = get_int(anns[i], "question_id", where);
    for (const auto& ans : get_array(anns[i], "answers", where)) {
      if (ans.is_string()) {
        a.answers.push_back(ans.get<std::string>());
      } else {
        a.answers.push_back(get_string(ans, "answer", where + ".answers"));
      }
    }
    if (auto qt = anns[i].find("question_type"); qt != anns[i].end() && qt->is_string()) {
      a.question_type = qt->get<std::string>();
    }
    if (answers_per_question > 0 && static_cast<int>(a.answers.size()) != answers_per_question) {
      bad_count.push_back(qid);
    }
    by_qid[qid] = std::move(a);
  }
  if (!bad_count.empty()) {
    std::string ids;
    for (auto id : bad_count) ids += (ids.empty() ? "" : ",") + std::to_string(id);
    throw Error(ErrorKind::validation,
                "questions without exactly " + std::to_string(answers_per_question) +
                    " answers (override with --answers-per-question): " + ids);
  }

  std::vector<IqaTriplet> out;
  std::vector<QuestionId> missing;
  const json& qs = get_array(qdoc, "questions", questions_path.string());
  for (std::size_t i = 0; i < qs.size(); ++i) {
    const std::string where = "questions[" + std::to_string(i) + "]";
    const QuestionId qid = get_int(qs[i], "question_id", where);
    auto it = by_qid.find(qid);
    if (it == by_qid.end()) {
      missing.push_back(qid);
      continue;
    }
    out.push_back(make_triplet(qid, get_int(qs[i], "image_id", where),
                               get_string(qs[i], "question", where), it->second.answers,
                               it->second.question_type));
  }
  if (!missing.empty()) {
    std::string ids;
    for (auto id : missing) ids += (ids.empty() ? "" : ",") + std::to_string(id);
    throw Error(ErrorKind::integrity, "questions without an annotation record: " + ids);
  }
  return out;
}

std::vector<IqaTriplet> filter_uniform(std::span<const IqaTriplet> triplets) {
  std::vector<IqaTriplet> out;
  std::copy_if(triplets.begin(), triplets.end(), std::back_inserter(out),
               [](const IqaTriplet& t) { return t.uniform; });
  return out;
}

SplitResult split_val(std::span<const IqaTriplet> triplets, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw Error(ErrorKind::validation, "split ratio must lie strictly between 0 and 1");
  }
  std::set<std::int64_t> unique_images;
  for (const auto& t : triplets) unique_images.insert(t.image_id);

  const std::uint64_t salt = splitmix64(seed);
  std::vector<std::pair<std::uint64_t, std::int64_t>> ranked;
  ranked.reserve(unique_images.size());
  for (auto id : unique_images) {
    ranked.emplace_back(splitmix64(static_cast<std::uint64_t>(id) ^ salt), id);
  }
  std::sort(ranked.begin(), ranked.end());

  const auto n_test = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(ranked.size())));
  std::set<std::int64_t> test_images;
  for (std::size_t i = 0; i < n_test; ++i) test_images.insert(ranked[i].second);

  SplitResult result{{"test", {}}, {"val", {}}};
  for (const auto& t : triplets) {
    (test_images.count(t.image_id) ? result.test : result.val).question_ids.push_back(t.question_id);
  }
  return result;
}

}  // namespace cvf
