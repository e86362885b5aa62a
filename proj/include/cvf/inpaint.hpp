#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cvf/image_io.hpp"
#include "cvf/io.hpp"
#include "cvf/select.hpp"

namespace cvf {

enum class JobStatus { pending, done, failed };

std::string_view to_string(JobStatus status);
JobStatus parse_job_status(std::string_view text);

struct RemovalJob {
  std::string edit_id;
  std::filesystem::path input_image_path;
  std::filesystem::path mask_image_path;
  std::filesystem::path output_image_path;
  ImageSize expected_size;
  JobStatus status = JobStatus::pending;
  std::optional<int> tool_exit_code;
  std::string reason;

  friend bool operator==(const RemovalJob&, const RemovalJob&) = default;
};

json job_to_json(const RemovalJob& job);
RemovalJob job_from_json(const json& row);

/// Append-only status log. Replaying it yields the latest record per edit_id.
class JobLedger {
 public:
  explicit JobLedger(std::filesystem::path file);

  const std::filesystem::path& path() const noexcept { return file_; }

  // Thread-safe; each record is flushed before returning.
  void append(const RemovalJob& job);

  std::map<std::string, RemovalJob> replay() const;

 private:
  std::filesystem::path file_;
  mutable std::mutex mutex_;
};

inline constexpr std::string_view kLedgerFileName = "jobs.jsonl";

// Writes out_root/masks/<edit_id>.png for every record and plans output
// out_root/<edit_id>.png. A missing source image marks that job failed. Jobs
// the ledger already records as done (with their output present) stay done.
// Throws Error(not_found) when image_root does not exist.
std::vector<RemovalJob> render_jobs(std::span<const EditRecord> records,
                                    const std::filesystem::path& image_root,
                                    const std::filesystem::path& out_root, JobLedger& ledger);

/// Shell command with {image}, {mask} and {out} placeholders.
class CommandTemplate {
 public:
  // Throws Error(config) if any placeholder is missing.
  explicit CommandTemplate(std::string text);

  const std::string& text() const noexcept { return text_; }
  std::string render(const RemovalJob& job) const;

 private:
  std::string text_;
};

std::string shell_quote(std::string_view s);

// Runs the template for every job that is not already done, with at most
// `parallelism` child processes at once. A job is done when the command exits
// 0 and leaves an output image of the expected size.
std::vector<RemovalJob> invoke_tool(std::vector<RemovalJob> jobs, const CommandTemplate& command,
                                    int parallelism, JobLedger& ledger);

}  // namespace cvf
