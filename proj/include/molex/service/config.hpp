#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace molex::service {

/// Settings shared by the service and the CLI. Files use INI syntax; keys
/// outside a section go in the root, e.g.
///
///   data_dir = /var/lib/molex
///   index = /var/lib/molex/corpus.hnsw
///   port = 8080
///   [pubchem]
///   enabled = true
struct ServiceConfig {
  std::filesystem::path data_dir = "molex-data";
  std::filesystem::path index_path;  // optional prebuilt index
  std::filesystem::path ui_dir;      // optional static web UI, served under /ui
  std::string host = "127.0.0.1";
  int port = 8080;
  int workers = 2;
  int max_smiles_per_request = 100;
  int max_neighbors = 100;
  std::size_t max_upload_bytes = 100ull << 20;
  int mcs_budget_ms = 500;
  std::string api_key;  // when set, /v1 requests must send X-API-Key

  int dim_full = 768;
  int dim_reduced = 128;
  std::uint64_t surrogate_seed = 0;

  double target_recall = 0.99;
  double latency_budget_ms = 10;
  int recall_k = 10;

  std::size_t tsne_cap = 20000;
  bool tsne_full_dim = false;  // project the 768-d vectors instead of the reduced ones

  bool pubchem_enabled = false;
  std::string pubchem_base_url = "https://pubchem.ncbi.nlm.nih.gov";
  double pubchem_timeout_s = 10;
  int pubchem_cache_ttl_s = 24 * 3600;
  int pubchem_default_threshold = 90;

  void validate() const;
};

/// Applies one `key = value` setting; section keys are dotted
/// ("pubchem.enabled"). Throws std::invalid_argument on unknown keys or bad
/// values.
void apply_setting(ServiceConfig& cfg, std::string_view key, std::string_view value);

/// Reads an INI file on top of the defaults.
ServiceConfig load_config(const std::filesystem::path& path);

ServiceConfig parse_config(std::string_view text);

}  // namespace molex::service
