#pragma once

#include <atomic>
#include <condition_variable>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <thread>

#include "molex/service/store.hpp"

namespace molex::service {

/// Thrown by job bodies that notice a cancel request.
class JobCanceled : public std::runtime_error {
 public:
  JobCanceled() : std::runtime_error("job canceled") {}
};

/// A job of the same kind is already active for the dataset.
class JobConflict : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class JobContext {
 public:
  JobContext(std::function<void(double)> report, const std::atomic<bool>& cancel)
      : report_(std::move(report)), cancel_(cancel) {}
  bool canceled() const { return cancel_.load(); }
  void check_canceled() const {
    if (canceled()) throw JobCanceled();
  }
  /// Progress in [0, 1]; values below the last report are ignored.
  void progress(double fraction) { report_(fraction); }

 private:
  std::function<void(double)> report_;
  const std::atomic<bool>& cancel_;
};

/// Job body: returns the result document, stored under results/<job>.json.
using JobFn = std::function<nlohmann::json(JobContext&)>;

/// Background job runner: a fixed worker pool, at most one running job per
/// dataset, and only queued -> running -> {done, failed, canceled}
/// transitions. Every transition is persisted through the store.
class JobManager {
 public:
  JobManager(Store& store, int workers);
  ~JobManager();
  JobManager(const JobManager&) = delete;
  JobManager& operator=(const JobManager&) = delete;

  /// Throws JobConflict when a queued or running job of the same kind exists
  /// for the dataset.
  JobRecord submit(JobKind kind, const std::string& dataset_id, nlohmann::json params, JobFn fn);

  std::optional<JobRecord> get(const std::string& id) const { return store_.job(id); }

  /// Requests cancellation. A queued job still passes through running so
  /// observers only ever see the documented transitions.
  std::optional<JobRecord> cancel(const std::string& id);

  /// Result document of a finished job.
  std::optional<nlohmann::json> result(const std::string& id) const;

  /// Blocks until the job reaches a terminal state or the timeout expires.
  std::optional<JobRecord> wait(const std::string& id, std::chrono::milliseconds timeout) const;

 private:
  struct Pending {
    std::string id;
    std::string dataset_id;
    JobFn fn;
    std::shared_ptr<std::atomic<bool>> cancel;
  };

  void worker();
  void transition(JobRecord& job, JobState next);

  Store& store_;
  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
  std::deque<Pending> queue_;
  std::map<std::string, std::shared_ptr<std::atomic<bool>>> cancel_flags_;
  std::map<std::string, int> running_per_dataset_;
  bool stopping_ = false;
  std::vector<std::thread> threads_;
};

}  // namespace molex::service
