#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "molex/ann/calibrate.hpp"
#include "molex/ann/hnsw.hpp"
#include "molex/descriptors/descriptors.hpp"
#include "molex/service/config.hpp"
#include "molex/service/jobs.hpp"
#include "molex/service/pubchem.hpp"
#include "molex/service/store.hpp"

namespace molex::service {

/// How an index was built, stored next to it as `<stem>.json`.
struct IndexMeta {
  std::string source = "surrogate";  // or "file"
  std::uint64_t surrogate_seed = 0;
  int dim_full = 768;
  int dim_reduced = 128;
  std::size_t rejects = 0;
  std::optional<ann::CalibrationResult> calibration;
};

std::filesystem::path meta_path(const std::filesystem::path& index_path);
nlohmann::json to_json(const IndexMeta& meta);
IndexMeta meta_from_json(const nlohmann::json& j);

/// A loaded index with its metadata and a canonical-SMILES lookup.
struct LoadedIndex {
  ann::HnswIndex index;
  IndexMeta meta;
  std::unordered_map<std::string, std::uint32_t> row_of;  // first row per canonical SMILES
};

/// Loads `<path>`, its vectors and `<stem>.json` (defaults when absent).
std::shared_ptr<const LoadedIndex> open_index(const std::filesystem::path& path);
std::shared_ptr<const LoadedIndex> wrap_index(ann::HnswIndex index, IndexMeta meta);

struct QueryOptions {
  int n = 10;
  bool include_mcs = false;
  bool include_properties = true;
  int mcs_budget_ms = 500;
};

struct NeighborHit {
  std::uint32_t id = 0;
  std::string smiles;
  float distance = 0;
  std::optional<descriptors::DescriptorSet> properties;
  std::optional<int> mcs_size;
  bool mcs_optimal = true;
};

struct QueryResult {
  std::string query;
  std::string canonical;
  std::vector<NeighborHit> hits;
};

/// The query cannot be embedded into this index's space: it is not indexed
/// and the index was built from external embedding files.
class NotEmbeddable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Normalize, embed (the stored vector when the molecule is indexed,
/// otherwise the surrogate), reduce, search, and annotate the hits.
/// Throws chem::SmilesError on bad input and NotEmbeddable as above.
QueryResult query_neighbors(const LoadedIndex& loaded, const std::string& smiles, const QueryOptions& options);

nlohmann::json to_json(const descriptors::DescriptorSet& d);
nlohmann::json to_json(const NeighborHit& hit);

struct ApiResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

/// `{code, message, detail}` error body.
ApiResponse error_response(int status, const std::string& message, nlohmann::json detail = nullptr);

/// The service's request handlers, independent of the HTTP transport.
class Platform {
 public:
  Platform(ServiceConfig config, std::shared_ptr<const LoadedIndex> index, Transport pubchem_transport = {});

  ApiResponse health() const;
  ApiResponse neighbors(const std::string& body) const;
  ApiResponse upload(const std::string& content, const std::string& filename, const std::string& name,
                     const std::optional<std::string>& embeddings);
  ApiResponse dataset(const std::string& id) const;
  ApiResponse start_projection(const std::string& dataset_id, const std::string& body);
  ApiResponse start_eval(const std::string& dataset_id, const std::string& body);
  ApiResponse job(const std::string& id) const;
  ApiResponse cancel_job(const std::string& id);
  ApiResponse job_result(const std::string& id) const;
  ApiResponse depict(const std::string& smiles, const std::string& vs) const;
  ApiResponse pubchem(const std::string& smiles, const std::string& threshold);

  const ServiceConfig& config() const { return config_; }
  Store& store() { return store_; }
  JobManager& jobs() { return jobs_; }

 private:
  ServiceConfig config_;
  std::shared_ptr<const LoadedIndex> index_;
  Store store_;
  JobManager jobs_;
  PubchemClient pubchem_;
};

}  // namespace molex::service
