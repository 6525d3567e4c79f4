#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>

#include "molex/service/jobs.hpp"

namespace molex::service {
namespace {

std::int64_t now_seconds() {
  return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch()).count();
}

}  // namespace

JobManager::JobManager(Store& store, int workers) : store_(store) {
  for (int i = 0; i < std::max(1, workers); ++i) threads_.emplace_back([this] { worker(); });
}

JobManager::~JobManager() {
  {
    std::lock_guard lock(mu_);
    stopping_ = true;
    for (auto& [id, flag] : cancel_flags_) flag->store(true);
  }
  cv_.notify_all();
  for (auto& t : threads_) t.join();
}

void JobManager::transition(JobRecord& job, JobState next) {
  job.state = next;
  job.history.push_back(next);
  job.updated_at = now_seconds();
  store_.put_job(job);
  cv_.notify_all();
}

JobRecord JobManager::submit(JobKind kind, const std::string& dataset_id, nlohmann::json params, JobFn fn) {
  std::lock_guard lock(mu_);
  for (const auto& j : store_.jobs())
    if (j.dataset_id == dataset_id && j.kind == kind && !is_terminal(j.state))
      throw JobConflict(std::string("a ") + std::string(to_string(kind)) + " job is already active for dataset " +
                        dataset_id + " (" + j.id + ")");
  JobRecord job;
  job.id = Store::new_id("job_");
  job.kind = kind;
  job.dataset_id = dataset_id;
  job.params = std::move(params);
  job.created_at = job.updated_at = now_seconds();
  job.history.push_back(JobState::Queued);
  store_.put_job(job);
  auto flag = std::make_shared<std::atomic<bool>>(false);
  cancel_flags_[job.id] = flag;
  queue_.push_back({job.id, dataset_id, std::move(fn), flag});
  cv_.notify_all();
  return job;
}

std::optional<JobRecord> JobManager::cancel(const std::string& id) {
  std::lock_guard lock(mu_);
  auto job = store_.job(id);
  if (!job) return std::nullopt;
  if (auto it = cancel_flags_.find(id); it != cancel_flags_.end()) it->second->store(true);
  cv_.notify_all();
  return job;
}

std::optional<nlohmann::json> JobManager::result(const std::string& id) const {
  const auto job = store_.job(id);
  if (!job || job->state != JobState::Done || job->result_path.empty()) return std::nullopt;
  std::ifstream in(store_.resolve(job->result_path));
  if (!in) return std::nullopt;
  return nlohmann::json::parse(in);
}

std::optional<JobRecord> JobManager::wait(const std::string& id, std::chrono::milliseconds timeout) const {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  std::unique_lock lock(mu_);
  while (true) {
    auto job = store_.job(id);
    if (!job || is_terminal(job->state)) return job;
    if (cv_.wait_until(lock, deadline) == std::cv_status::timeout) return store_.job(id);
  }
}

void JobManager::worker() {
  while (true) {
    Pending task;
    {
      std::unique_lock lock(mu_);
      while (true) {
        if (stopping_ && queue_.empty()) return;
        auto it = std::find_if(queue_.begin(), queue_.end(),
                               [&](const Pending& p) { return running_per_dataset_[p.dataset_id] == 0; });
        if (it != queue_.end()) {
          task = std::move(*it);
          queue_.erase(it);
          break;
        }
        cv_.wait(lock);
      }
      running_per_dataset_[task.dataset_id]++;
    }

    JobRecord job = *store_.job(task.id);
    transition(job, JobState::Running);
    double last_saved = 0;
    auto report = [&](double fraction) {
      std::lock_guard lock(mu_);
      fraction = std::clamp(fraction, 0.0, 1.0);
      if (fraction <= job.progress) return;
      job.progress = fraction;
      // Persist in whole-percent steps to keep manifest writes bounded.
      if (fraction - last_saved >= 0.01 || fraction == 1.0) {
        last_saved = fraction;
        job.updated_at = now_seconds();
        store_.put_job(job);
      }
    };
    JobContext ctx(report, *task.cancel);
    JobState final_state = JobState::Done;
    try {
      ctx.check_canceled();
      const nlohmann::json result = task.fn(ctx);
      ctx.check_canceled();
      job.result_path = "results/" + job.id + ".json";
      std::ofstream out(store_.resolve(job.result_path), std::ios::trunc);
      out << result.dump();
      if (!out) throw std::runtime_error("cannot write job result");
      job.progress = 1.0;
    } catch (const JobCanceled&) {
      final_state = JobState::Canceled;
      job.result_path.clear();
    } catch (const std::exception& e) {
      final_state = task.cancel->load() ? JobState::Canceled : JobState::Failed;
      if (final_state == JobState::Failed) job.error = e.what();
      job.result_path.clear();
    }
    {
      std::lock_guard lock(mu_);
      transition(job, final_state);
      running_per_dataset_[task.dataset_id]--;
      cancel_flags_.erase(task.id);
    }
    cv_.notify_all();
  }
}

}  // namespace molex::service
