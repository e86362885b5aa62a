#include "cvf/review.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <ctime>
#include <fstream>
#include <iterator>
#include <map>
#include <set>

#include "cvf/error.hpp"
#include "cvf/rng.hpp"

namespace cvf {

namespace fs = std::filesystem;

ReviewSample build_sample(std::span<const EditRecord> manifest,
                          std::span<const ConsistencyReport> flip_sources,
                          std::size_t per_type_cap, std::uint64_t seed) {
  std::set<std::string> flipped;
  for (const auto& report : flip_sources) {
    flipped.insert(report.flipped_edit_ids.begin(), report.flipped_edit_ids.end());
  }
  std::map<std::string, std::vector<std::string>> by_type;
  for (const auto& r : manifest) {
    if (!flip_sources.empty() && !flipped.count(r.edit_id)) continue;
    by_type[r.question_type].push_back(r.edit_id);
  }
  ReviewSample sample;
  sample.per_type_cap = per_type_cap;
  sample.seed = seed;
  for (auto& [type, ids] : by_type) {
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    seeded_shuffle(ids, seed ^ fnv1a64(type));
    if (ids.size() > per_type_cap) ids.resize(per_type_cap);
    sample.edit_ids.insert(sample.edit_ids.end(), ids.begin(), ids.end());
  }
  std::sort(sample.edit_ids.begin(), sample.edit_ids.end());
  return sample;
}

void write_sample(const fs::path& path, const ReviewSample& sample) {
  std::vector<json> rows;
  rows.push_back({{"kind", "header"},
                  {"per_type_cap", sample.per_type_cap},
                  {"seed", sample.seed},
                  {"size", sample.edit_ids.size()}});
  for (const auto& id : sample.edit_ids) rows.push_back({{"kind", "edit"}, {"id", id}});
  write_jsonl_file(path, rows);
}

ReviewSample load_sample(const fs::path& path) {
  ReviewSample sample;
  for (const auto& row : read_jsonl_file(path)) {
    const std::string kind = get_string(row, "kind", "sample");
    if (kind == "header") {
      sample.per_type_cap = row.at("per_type_cap").get<std::size_t>();
      sample.seed = row.at("seed").get<std::uint64_t>();
    } else if (kind == "edit") {
      sample.edit_ids.push_back(get_string(row, "id", "sample"));
    }
  }
  std::sort(sample.edit_ids.begin(), sample.edit_ids.end());
  return sample;
}

json item_to_json(const ReviewItem& item) {
  return {{"edit_id", item.edit_id},
          {"question", item.question},
          {"expected_answer", item.expected_answer},
          {"question_type", item.question_type},
          {"image_url", item.image_url}};
}

std::vector<ReviewItem> review_items(std::span<const EditRecord> manifest,
                                     const ReviewSample* sample) {
  std::set<std::string> wanted;
  if (sample) wanted.insert(sample->edit_ids.begin(), sample->edit_ids.end());
  std::vector<ReviewItem> items;
  for (const auto& r : manifest) {
    if (sample && !wanted.count(r.edit_id)) continue;
    items.push_back({r.edit_id, r.question, r.expected_answer, r.question_type,
                     "/images/" + r.edit_id + ".png"});
  }
  std::sort(items.begin(), items.end(),
            [](const ReviewItem& a, const ReviewItem& b) { return a.edit_id < b.edit_id; });
  if (sample && items.size() != wanted.size()) {
    throw Error(ErrorKind::integrity, "review sample references edits missing from the manifest");
  }
  return items;
}

namespace {

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

LabelStore::LabelStore(fs::path file) : file_(std::move(file)) {
  if (file_.has_parent_path()) fs::create_directories(file_.parent_path());
  if (!fs::exists(file_)) return;
  std::ifstream in(file_, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot read label store " + file_.string());
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  in.close();
  // Every acknowledged label ends in a newline; a torn tail is an interrupted write.
  const std::size_t complete = text.rfind('\n') == std::string::npos ? 0 : text.rfind('\n') + 1;
  if (complete < text.size()) fs::resize_file(file_, complete);
  std::size_t start = 0, line = 0;
  while (start < complete) {
    const std::size_t end = text.find('\n', start);
    const std::string_view row_text(text.data() + start, end - start);
    start = end + 1;
    ++line;
    if (row_text.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    const std::string where = file_.string() + " line " + std::to_string(line);
    json row;
    try {
      row = json::parse(row_text);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::parse, where + ": " + e.what());
    }
    const std::string user = get_string(row, "user", where);
    const std::string edit = get_string(row, "edit_id", where);
    const Label label = parse_label(get_string(row, "label", where));
    if (table_[user].emplace(edit, label).second) ++count_;
  }
}

void LabelStore::append(const std::string& user, const std::string& edit_id, Label label) {
  std::lock_guard lock(mutex_);
  auto& mine = table_[user];
  if (mine.count(edit_id)) {
    throw Error(ErrorKind::conflict, "user " + user + " already labeled " + edit_id);
  }
  const json row = {{"user", user},
                    {"edit_id", edit_id},
                    {"label", std::string(to_string(label))},
                    {"time", utc_timestamp()}};
  const std::string line = row.dump() + "\n";
  const int fd = ::open(file_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd < 0) throw Error(ErrorKind::io, "cannot open label store " + file_.string());
  std::size_t written = 0;
  while (written < line.size()) {
    const ssize_t n = ::write(fd, line.data() + written, line.size() - written);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) {
      ::close(fd);
      throw Error(ErrorKind::io, "write to label store failed: " + std::string(std::strerror(errno)));
    }
    written += static_cast<std::size_t>(n);
  }
  const bool synced = ::fsync(fd) == 0;
  ::close(fd);
  if (!synced) throw Error(ErrorKind::io, "fsync of label store failed");
  mine.emplace(edit_id, label);
  ++count_;
}

LabelTable LabelStore::snapshot() const {
  std::lock_guard lock(mutex_);
  LabelTable copy = table_;
  for (auto it = copy.begin(); it != copy.end();) {
    it = it->second.empty() ? copy.erase(it) : std::next(it);
  }
  return copy;
}

std::size_t LabelStore::size() const {
  std::lock_guard lock(mutex_);
  return count_;
}

ReviewService::ReviewService(std::vector<ReviewItem> items, LabelStore& store,
                             std::vector<std::string> users, std::uint64_t seed)
    : items_(std::move(items)), store_(store), users_(std::move(users)), seed_(seed) {
  std::sort(items_.begin(), items_.end(),
            [](const ReviewItem& a, const ReviewItem& b) { return a.edit_id < b.edit_id; });
}

void ReviewService::check_user(const std::string& user) const {
  if (user.empty()) throw Error(ErrorKind::validation, "user id is required");
  if (!users_.empty() && std::find(users_.begin(), users_.end(), user) == users_.end()) {
    throw Error(ErrorKind::not_found, "unknown user " + user);
  }
}

std::vector<std::string> ReviewService::session_order(const std::string& user) const {
  check_user(user);
  std::vector<std::string> order;
  order.reserve(items_.size());
  for (const auto& item : items_) order.push_back(item.edit_id);
  seeded_shuffle(order, seed_ ^ fnv1a64(user));
  return order;
}

NextItem ReviewService::next_item(const std::string& user) const {
  const auto order = session_order(user);
  const LabelTable labels = store_.snapshot();
  const auto it = labels.find(user);
  NextItem next;
  next.progress.total = order.size();
  for (const auto& id : order) {
    if (it != labels.end() && it->second.count(id)) {
      ++next.progress.labeled;
    } else if (!next.item) {
      next.item = item(id);
    }
  }
  return next;
}

ReviewProgress ReviewService::submit_label(const std::string& user, const std::string& edit_id,
                                           Label label) {
  check_user(user);
  item(edit_id);
  store_.append(user, edit_id, label);
  return next_item(user).progress;
}

const ReviewItem& ReviewService::item(const std::string& edit_id) const {
  auto it = std::lower_bound(items_.begin(), items_.end(), edit_id,
                             [](const ReviewItem& a, const std::string& id) { return a.edit_id < id; });
  if (it == items_.end() || it->edit_id != edit_id) {
    throw Error(ErrorKind::not_found, "unknown item " + edit_id);
  }
  return *it;
}

AgreementReport ReviewService::agreement() const { return agreement_stats(store_.snapshot()); }

}  // namespace cvf
