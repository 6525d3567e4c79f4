#include <chrono>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "molex/service/store.hpp"

namespace molex::service {
namespace {

using nlohmann::json;

std::int64_t now_seconds() {
  return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch()).count();
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_atomic(const std::filesystem::path& p, const std::string& text) {
  auto tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, p);
}

predict::LabelMode mode_from(std::string_view s) {
  if (s == "classification") return predict::LabelMode::Classification;
  if (s == "regression") return predict::LabelMode::Regression;
  return predict::LabelMode::None;
}

JobKind kind_from(std::string_view s) {
  if (s == "projection") return JobKind::Projection;
  if (s == "evaluation") return JobKind::Evaluation;
  if (s == "index-build") return JobKind::IndexBuild;
  throw std::invalid_argument("unknown job kind " + std::string(s));
}

JobState state_from(std::string_view s) {
  if (s == "queued") return JobState::Queued;
  if (s == "running") return JobState::Running;
  if (s == "done") return JobState::Done;
  if (s == "failed") return JobState::Failed;
  if (s == "canceled") return JobState::Canceled;
  throw std::invalid_argument("unknown job state " + std::string(s));
}

}  // namespace

std::string_view to_string(JobKind kind) {
  switch (kind) {
    case JobKind::Projection: return "projection";
    case JobKind::Evaluation: return "evaluation";
    case JobKind::IndexBuild: return "index-build";
  }
  return "";
}

std::string_view to_string(JobState state) {
  switch (state) {
    case JobState::Queued: return "queued";
    case JobState::Running: return "running";
    case JobState::Done: return "done";
    case JobState::Failed: return "failed";
    case JobState::Canceled: return "canceled";
  }
  return "";
}

bool is_terminal(JobState state) {
  return state == JobState::Done || state == JobState::Failed || state == JobState::Canceled;
}

json to_json(const DatasetRecord& r) {
  return {{"dataset_id", r.id},
          {"name", r.name},
          {"rows", r.rows},
          {"rejects", r.rejects},
          {"label_mode", predict::to_string(r.mode)},
          {"labels", r.labels},
          {"targets", r.targets},
          {"created_at", r.created_at},
          {"paths",
           {{"records", r.records_path},
            {"embeddings", r.embeddings_path},
            {"full", r.full_path},
            {"index", r.index_path}}}};
}

DatasetRecord dataset_from_json(const json& j) {
  DatasetRecord r;
  r.id = j.at("dataset_id");
  r.name = j.at("name");
  r.rows = j.at("rows");
  r.rejects = j.value("rejects", 0);
  r.mode = mode_from(j.at("label_mode").get<std::string>());
  r.labels = j.at("labels").get<std::vector<std::string>>();
  r.targets = j.at("targets").get<std::vector<std::string>>();
  r.created_at = j.at("created_at");
  const auto& p = j.at("paths");
  r.records_path = p.at("records");
  r.embeddings_path = p.at("embeddings");
  r.full_path = p.at("full");
  r.index_path = p.value("index", "");
  return r;
}

json to_json(const JobRecord& r) {
  json history = json::array();
  for (auto s : r.history) history.push_back(to_string(s));
  return {{"job_id", r.id},
          {"kind", to_string(r.kind)},
          {"dataset_id", r.dataset_id},
          {"state", to_string(r.state)},
          {"progress", r.progress},
          {"result_path", r.result_path},
          {"error", r.error.empty() ? json(nullptr) : json(r.error)},
          {"created_at", r.created_at},
          {"updated_at", r.updated_at},
          {"history", history},
          {"params", r.params}};
}

JobRecord job_from_json(const json& j) {
  JobRecord r;
  r.id = j.at("job_id");
  r.kind = kind_from(j.at("kind").get<std::string>());
  r.dataset_id = j.at("dataset_id");
  r.state = state_from(j.at("state").get<std::string>());
  r.progress = j.at("progress");
  r.result_path = j.value("result_path", "");
  if (j.contains("error") && !j["error"].is_null()) r.error = j["error"];
  r.created_at = j.at("created_at");
  r.updated_at = j.at("updated_at");
  for (const auto& s : j.at("history")) r.history.push_back(state_from(s.get<std::string>()));
  r.params = j.value("params", json::object());
  return r;
}

Store::Store(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_ / "datasets");
  std::filesystem::create_directories(dir_ / "results");
  const auto manifest = dir_ / "manifest.json";
  if (!std::filesystem::exists(manifest)) {
    save_locked();
    return;
  }
  const json j = json::parse(read_file(manifest));
  for (const auto& d : j.at("datasets")) datasets_.push_back(dataset_from_json(d));
  bool changed = false;
  for (const auto& jj : j.at("jobs")) {
    JobRecord job = job_from_json(jj);
    if (!is_terminal(job.state)) {
      if (job.state == JobState::Queued) job.history.push_back(JobState::Running);
      job.state = JobState::Failed;
      job.history.push_back(JobState::Failed);
      job.error = "interrupted by a service restart";
      job.updated_at = now_seconds();
      changed = true;
    }
    jobs_.push_back(std::move(job));
  }
  if (changed) save_locked();
}

void Store::save_locked() const {
  json j = {{"version", 1}, {"datasets", json::array()}, {"jobs", json::array()}};
  for (const auto& d : datasets_) j["datasets"].push_back(to_json(d));
  for (const auto& job : jobs_) j["jobs"].push_back(to_json(job));
  write_atomic(dir_ / "manifest.json", j.dump(2));
}

std::string Store::new_id(std::string_view prefix) {
  static std::mutex mu;
  static std::mt19937_64 rng{std::random_device{}()};
  std::lock_guard lock(mu);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(rng()));
  return std::string(prefix) + buf;
}

DatasetRecord Store::add_dataset(const std::string& name, const predict::LabeledDataset& ds,
                                 const embed::EmbeddingMatrix& full) {
  DatasetRecord r;
  r.id = new_id("ds_");
  r.name = name;
  r.rows = ds.size();
  r.rejects = ds.rows.rejects.size();
  r.mode = ds.mode();
  std::set<std::string> vocab(ds.rows.class_labels.begin(), ds.rows.class_labels.end());
  r.labels.assign(vocab.begin(), vocab.end());
  r.targets = ds.rows.target_names;
  r.created_at = now_seconds();
  const std::string base = "datasets/" + r.id + "/";
  std::filesystem::create_directories(dir_ / base);
  r.records_path = base + "records.json";
  r.embeddings_path = base + "reduced.molv";
  r.full_path = base + "full.molv";

  json rec = {{"smiles", ds.rows.smiles},
              {"input", ds.rows.input},
              {"lines", ds.rows.lines},
              {"ordinals", ds.rows.ordinals},
              {"labeled", ds.rows.labeled},
              {"class_labels", ds.rows.class_labels},
              {"target_names", ds.rows.target_names},
              {"targets", ds.rows.targets},
              {"data_lines", ds.rows.data_lines},
              {"rejects", json::array()}};
  for (const auto& rej : ds.rows.rejects) rec["rejects"].push_back({{"line", rej.line}, {"reason", rej.reason}});
  write_atomic(dir_ / r.records_path, rec.dump());
  embed::write_embedding_file(ds.embeddings, dir_ / r.embeddings_path);
  embed::write_embedding_file(full, dir_ / r.full_path);

  std::lock_guard lock(mu_);
  datasets_.push_back(r);
  save_locked();
  return r;
}

std::optional<DatasetRecord> Store::dataset(const std::string& id) const {
  std::lock_guard lock(mu_);
  for (const auto& d : datasets_)
    if (d.id == id) return d;
  return std::nullopt;
}

std::vector<DatasetRecord> Store::datasets() const {
  std::lock_guard lock(mu_);
  return datasets_;
}

predict::LabeledDataset Store::load_dataset(const DatasetRecord& record) const {
  const json rec = json::parse(read_file(dir_ / record.records_path));
  predict::LabeledDataset ds;
  ds.rows.smiles = rec.at("smiles").get<std::vector<std::string>>();
  ds.rows.input = rec.at("input").get<std::vector<std::string>>();
  ds.rows.lines = rec.at("lines").get<std::vector<int>>();
  ds.rows.ordinals = rec.at("ordinals").get<std::vector<std::size_t>>();
  ds.rows.labeled = rec.at("labeled");
  ds.rows.class_labels = rec.at("class_labels").get<std::vector<std::string>>();
  ds.rows.target_names = rec.at("target_names").get<std::vector<std::string>>();
  ds.rows.targets = rec.at("targets").get<std::vector<std::vector<double>>>();
  ds.rows.data_lines = rec.at("data_lines");
  for (const auto& r : rec.at("rejects")) ds.rows.rejects.push_back({r.at("line"), r.at("reason")});
  ds.embeddings = embed::load_embedding_file(dir_ / record.embeddings_path);
  if (ds.embeddings.count != ds.rows.size())
    throw std::runtime_error("dataset " + record.id + ": embedding rows do not match records");
  return ds;
}

embed::EmbeddingMatrix Store::load_full(const DatasetRecord& record) const {
  return embed::load_embedding_file(dir_ / record.full_path);
}

void Store::put_job(const JobRecord& job) {
  std::lock_guard lock(mu_);
  bool found = false;
  for (auto& j : jobs_)
    if (j.id == job.id) {
      j = job;
      found = true;
    }
  if (!found) jobs_.push_back(job);
  save_locked();
}

std::optional<JobRecord> Store::job(const std::string& id) const {
  std::lock_guard lock(mu_);
  for (const auto& j : jobs_)
    if (j.id == id) return j;
  return std::nullopt;
}

std::vector<JobRecord> Store::jobs() const {
  std::lock_guard lock(mu_);
  return jobs_;
}

}  // namespace molex::service
