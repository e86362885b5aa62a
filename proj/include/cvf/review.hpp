#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cvf/consistency.hpp"
#include "cvf/select.hpp"

namespace cvf {

struct ReviewSample {
  std::vector<std::string> edit_ids;  // ascending
  std::size_t per_type_cap = 100;
  std::uint64_t seed = 0;
};

// Restricts to edits flipped under any of `flip_sources` (no restriction when
// empty), then keeps at most `per_type_cap` edits per question type, chosen by
// a seeded shuffle.
ReviewSample build_sample(std::span<const EditRecord> manifest,
                          std::span<const ConsistencyReport> flip_sources,
                          std::size_t per_type_cap, std::uint64_t seed);

void write_sample(const std::filesystem::path& path, const ReviewSample& sample);
ReviewSample load_sample(const std::filesystem::path& path);

struct ReviewItem {
  std::string edit_id;
  std::string question;
  std::string expected_answer;
  std::string question_type;
  std::string image_url;
};

json item_to_json(const ReviewItem& item);

// Items for the sampled edits (all edits when `sample` is null), in edit_id order.
std::vector<ReviewItem> review_items(std::span<const EditRecord> manifest,
                                     const ReviewSample* sample);

/// Append-only, fsync'ed label log. Reopening the same file restores every
/// acknowledged label.
class LabelStore {
 public:
  explicit LabelStore(std::filesystem::path file);

  // Throws Error(conflict) if the user already labeled the item.
  void append(const std::string& user, const std::string& edit_id, Label label);

  LabelTable snapshot() const;
  std::size_t size() const;
  const std::filesystem::path& path() const noexcept { return file_; }

 private:
  std::filesystem::path file_;
  mutable std::mutex mutex_;
  LabelTable table_;
  std::size_t count_ = 0;
};

struct ReviewProgress {
  std::size_t labeled = 0;
  std::size_t total = 0;
};

struct NextItem {
  std::optional<ReviewItem> item;  // empty once the session is complete
  ReviewProgress progress;
};

/// Annotation sessions over a fixed item list. Each user sees every item once
/// in an order seeded by the user id; the cursor is the first item in that
/// order without a stored label, so sessions survive restarts.
class ReviewService {
 public:
  // With an empty `users` list any non-empty user id may join.
  ReviewService(std::vector<ReviewItem> items, LabelStore& store,
                std::vector<std::string> users = {}, std::uint64_t seed = 0);

  std::vector<std::string> session_order(const std::string& user) const;
  NextItem next_item(const std::string& user) const;
  ReviewProgress submit_label(const std::string& user, const std::string& edit_id, Label label);
  const ReviewItem& item(const std::string& edit_id) const;
  AgreementReport agreement() const;

 private:
  void check_user(const std::string& user) const;

  std::vector<ReviewItem> items_;
  LabelStore& store_;
  std::vector<std::string> users_;
  std::uint64_t seed_;
};

/// HTTP front end:
///   GET  /api/next?user=U         next item for U, or {"done": true}
///   POST /api/label               {"user", "edit_id", "label"}
///   GET  /api/agreement           agreement statistics over stored labels
///   GET  /api/item/{edit_id}      item payload
///   GET  /images/...              edited images
///   GET  /                        UI bundle (or a placeholder page)
class ReviewServer {
 public:
  ReviewServer(ReviewService& service, std::filesystem::path images_dir,
               std::filesystem::path ui_dir = {});
  ~ReviewServer();

  ReviewServer(const ReviewServer&) = delete;
  ReviewServer& operator=(const ReviewServer&) = delete;

  // Port 0 binds an ephemeral port. Returns the bound port, -1 on failure.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  bool listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace cvf
