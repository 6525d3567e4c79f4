#pragma once

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "molex/predict/dataset.hpp"

namespace molex::service {

struct DatasetRecord {
  std::string id;
  std::string name;
  std::size_t rows = 0;
  std::size_t rejects = 0;
  predict::LabelMode mode = predict::LabelMode::None;
  std::vector<std::string> labels;   // sorted class vocabulary
  std::vector<std::string> targets;  // numeric target names
  std::int64_t created_at = 0;       // unix seconds
  // Paths relative to the data directory.
  std::string records_path;
  std::string embeddings_path;  // reduced, normalized
  std::string full_path;        // full dimension
  std::string index_path;       // empty until an index is built
};

enum class JobKind { Projection, Evaluation, IndexBuild };
enum class JobState { Queued, Running, Done, Failed, Canceled };

std::string_view to_string(JobKind kind);
std::string_view to_string(JobState state);
bool is_terminal(JobState state);

struct JobRecord {
  std::string id;
  JobKind kind = JobKind::Projection;
  std::string dataset_id;
  JobState state = JobState::Queued;
  double progress = 0;
  std::string result_path;  // relative to the data directory
  std::string error;
  std::int64_t created_at = 0;
  std::int64_t updated_at = 0;
  std::vector<JobState> history;  // every state the job has been in, in order
  nlohmann::json params = nlohmann::json::object();
};

nlohmann::json to_json(const DatasetRecord& r);
nlohmann::json to_json(const JobRecord& r);
DatasetRecord dataset_from_json(const nlohmann::json& j);
JobRecord job_from_json(const nlohmann::json& j);

/// The service's data directory. `manifest.json` lists datasets and jobs and
/// is rewritten atomically on every change; dataset payloads live under
/// `datasets/<id>/`, job results under `results/`.
class Store {
 public:
  /// Opens or creates the directory. Jobs left queued or running by a
  /// previous process are marked failed.
  explicit Store(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path resolve(const std::string& relative) const { return dir_ / relative; }

  DatasetRecord add_dataset(const std::string& name, const predict::LabeledDataset& ds,
                            const embed::EmbeddingMatrix& full);
  std::optional<DatasetRecord> dataset(const std::string& id) const;
  std::vector<DatasetRecord> datasets() const;
  predict::LabeledDataset load_dataset(const DatasetRecord& record) const;
  embed::EmbeddingMatrix load_full(const DatasetRecord& record) const;

  void put_job(const JobRecord& job);
  std::optional<JobRecord> job(const std::string& id) const;
  std::vector<JobRecord> jobs() const;

  /// Random opaque id with the given prefix.
  static std::string new_id(std::string_view prefix);

 private:
  void save_locked() const;

  std::filesystem::path dir_;
  mutable std::mutex mu_;
  std::vector<DatasetRecord> datasets_;
  std::vector<JobRecord> jobs_;
};

}  // namespace molex::service
