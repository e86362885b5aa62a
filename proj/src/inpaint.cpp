#include "cvf/inpaint.hpp"

#include <spawn.h>
#include <sys/wait.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <fstream>
#include <thread>

#include "cvf/error.hpp"

extern char** environ;

namespace cvf {

namespace fs = std::filesystem;

std::string_view to_string(JobStatus status) {
  switch (status) {
    case JobStatus::pending: return "pending";
    case JobStatus::done: return "done";
    case JobStatus::failed: return "failed";
  }
  return "pending";
}

JobStatus parse_job_status(std::string_view text) {
  if (text == "pending") return JobStatus::pending;
  if (text == "done") return JobStatus::done;
  if (text == "failed") return JobStatus::failed;
  throw Error(ErrorKind::parse, "unknown job status '" + std::string(text) + "'");
}

json job_to_json(const RemovalJob& job) {
  json j = {{"edit_id", job.edit_id},
            {"status", std::string(to_string(job.status))},
            {"input", job.input_image_path.string()},
            {"mask", job.mask_image_path.string()},
            {"output", job.output_image_path.string()},
            {"width", job.expected_size.width},
            {"height", job.expected_size.height},
            {"reason", job.reason}};
  j["exit_code"] = job.tool_exit_code ? json(*job.tool_exit_code) : json(nullptr);
  return j;
}

RemovalJob job_from_json(const json& row) {
  RemovalJob job;
  job.edit_id = get_string(row, "edit_id", "job");
  job.status = parse_job_status(get_string(row, "status", "job"));
  job.input_image_path = get_string(row, "input", "job");
  job.mask_image_path = get_string(row, "mask", "job");
  job.output_image_path = get_string(row, "output", "job");
  job.expected_size = {static_cast<int>(get_int(row, "width", "job")),
                       static_cast<int>(get_int(row, "height", "job"))};
  job.reason = get_string(row, "reason", "job");
  if (auto it = row.find("exit_code"); it != row.end() && it->is_number_integer()) {
    job.tool_exit_code = it->get<int>();
  }
  return job;
}

JobLedger::JobLedger(fs::path file) : file_(std::move(file)) {
  if (file_.has_parent_path()) fs::create_directories(file_.parent_path());
}

void JobLedger::append(const RemovalJob& job) {
  const std::string line = job_to_json(job).dump() + "\n";
  std::lock_guard lock(mutex_);
  std::ofstream out(file_, std::ios::binary | std::ios::app);
  if (!out) throw Error(ErrorKind::io, "cannot append to " + file_.string());
  out << line;
  out.flush();
  if (!out) throw Error(ErrorKind::io, "short write to " + file_.string());
}

std::map<std::string, RemovalJob> JobLedger::replay() const {
  std::lock_guard lock(mutex_);
  std::map<std::string, RemovalJob> state;
  if (!fs::exists(file_)) return state;
  for (const auto& row : read_jsonl_file(file_)) {
    RemovalJob job = job_from_json(row);
    state[job.edit_id] = std::move(job);
  }
  return state;
}

std::vector<RemovalJob> render_jobs(std::span<const EditRecord> records,
                                    const fs::path& image_root, const fs::path& out_root,
                                    JobLedger& ledger) {
  if (!fs::is_directory(image_root)) {
    throw Error(ErrorKind::not_found, "image root " + image_root.string() + " does not exist");
  }
  fs::create_directories(out_root / "masks");
  const auto previous = ledger.replay();

  std::vector<RemovalJob> jobs;
  for (const auto& r : records) {
    RemovalJob job;
    job.edit_id = r.edit_id;
    job.input_image_path = image_root / r.file_name;
    job.mask_image_path = out_root / "masks" / (r.edit_id + ".png");
    job.output_image_path = out_root / (r.edit_id + ".png");
    job.expected_size = {r.removal_mask.width(), r.removal_mask.height()};
    write_mask_png(job.mask_image_path, r.removal_mask);

    auto prev = previous.find(r.edit_id);
    if (prev != previous.end() && prev->second.status == JobStatus::done &&
        fs::exists(job.output_image_path)) {
      jobs.push_back(prev->second);
      continue;
    }
    if (!fs::exists(job.input_image_path)) {
      job.status = JobStatus::failed;
      job.reason = "missing source image " + job.input_image_path.string();
    }
    if (prev == previous.end() || !(prev->second == job)) ledger.append(job);
    jobs.push_back(std::move(job));
  }
  return jobs;
}

CommandTemplate::CommandTemplate(std::string text) : text_(std::move(text)) {
  for (const char* ph : {"{image}", "{mask}", "{out}"}) {
    if (text_.find(ph) == std::string::npos) {
      throw Error(ErrorKind::config, std::string("command template lacks the ") + ph +
                                         " placeholder");
    }
  }
}

std::string shell_quote(std::string_view s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out.push_back(c);
    }
  }
  out += "'";
  return out;
}

std::string CommandTemplate::render(const RemovalJob& job) const {
  std::string out;
  std::size_t i = 0;
  while (i < text_.size()) {
    auto try_sub = [&](std::string_view ph, const fs::path& p) {
      if (text_.compare(i, ph.size(), ph) != 0) return false;
      out += shell_quote(p.string());
      i += ph.size();
      return true;
    };
    if (try_sub("{image}", job.input_image_path) || try_sub("{mask}", job.mask_image_path) ||
        try_sub("{out}", job.output_image_path)) {
      continue;
    }
    out.push_back(text_[i++]);
  }
  return out;
}

namespace {

// Exit status of `/bin/sh -c command`, or -1 if it could not be started or
// did not exit normally.
int run_shell(const std::string& command) {
  pid_t pid;
  std::string sh = "/bin/sh", flag = "-c", cmd = command;
  char* argv[] = {sh.data(), flag.data(), cmd.data(), nullptr};
  if (posix_spawn(&pid, "/bin/sh", nullptr, nullptr, argv, environ) != 0) return -1;
  int status = 0;
  while (waitpid(pid, &status, 0) < 0) {
    if (errno != EINTR) return -1;
  }
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void run_job(RemovalJob& job, const CommandTemplate& command) {
  job.reason.clear();
  job.tool_exit_code.reset();
  if (!fs::exists(job.input_image_path)) {
    job.status = JobStatus::failed;
    job.reason = "missing source image " + job.input_image_path.string();
    return;
  }
  std::error_code ec;
  fs::remove(job.output_image_path, ec);
  const int code = run_shell(command.render(job));
  job.tool_exit_code = code;
  if (code != 0) {
    job.status = JobStatus::failed;
    job.reason = "tool exited with status " + std::to_string(code);
    return;
  }
  const auto size = probe_image_size(job.output_image_path);
  if (!size) {
    job.status = JobStatus::failed;
    job.reason = "no readable output image";
    return;
  }
  if (!(*size == job.expected_size)) {
    job.status = JobStatus::failed;
    job.reason = "output is " + std::to_string(size->width) + "x" + std::to_string(size->height) +
                 ", expected " + std::to_string(job.expected_size.width) + "x" +
                 std::to_string(job.expected_size.height);
    return;
  }
  job.status = JobStatus::done;
}

}  // namespace

std::vector<RemovalJob> invoke_tool(std::vector<RemovalJob> jobs, const CommandTemplate& command,
                                    int parallelism, JobLedger& ledger) {
  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (jobs[i].status != JobStatus::done) todo.push_back(i);
  }
  const int workers =
      std::max(1, std::min(parallelism, static_cast<int>(std::max<std::size_t>(todo.size(), 1))));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= todo.size()) return;
      try {
        RemovalJob& job = jobs[todo[k]];
        run_job(job, command);
        ledger.append(job);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> threads;
  for (int w = 0; w < workers; ++w) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
  return jobs;
}

}  // namespace cvf
