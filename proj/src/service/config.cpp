#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "molex/service/config.hpp"

namespace molex::service {
namespace {

template <typename T>
T parse_num(std::string_view key, std::string_view v) {
  T out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw std::invalid_argument("config: `" + std::string(key) + "` expects a number, got `" + std::string(v) + "`");
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::invalid_argument("config: `" + std::string(key) + "` expects true or false, got `" + std::string(v) + "`");
}

}  // namespace

void ServiceConfig::validate() const {
  if (port < 0 || port > 65535) throw std::invalid_argument("config: port out of range");
  if (workers < 1) throw std::invalid_argument("config: workers must be at least 1");
  if (max_smiles_per_request < 1 || max_neighbors < 1) throw std::invalid_argument("config: limits must be positive");
  if (dim_reduced < 1 || dim_reduced > dim_full) throw std::invalid_argument("config: need 0 < dim_reduced <= dim_full");
  if (!(target_recall > 0 && target_recall <= 1)) throw std::invalid_argument("config: target_recall must be in (0, 1]");
  if (mcs_budget_ms < 1) throw std::invalid_argument("config: mcs_budget_ms must be positive");
  if (tsne_cap < 4) throw std::invalid_argument("config: tsne cap too small");
}

void apply_setting(ServiceConfig& cfg, std::string_view key, std::string_view v) {
  if (key == "data_dir") cfg.data_dir = std::string(v);
  else if (key == "index") cfg.index_path = std::string(v);
  else if (key == "ui_dir") cfg.ui_dir = std::string(v);
  else if (key == "host") cfg.host = std::string(v);
  else if (key == "port") cfg.port = parse_num<int>(key, v);
  else if (key == "workers") cfg.workers = parse_num<int>(key, v);
  else if (key == "max_smiles") cfg.max_smiles_per_request = parse_num<int>(key, v);
  else if (key == "max_n") cfg.max_neighbors = parse_num<int>(key, v);
  else if (key == "max_upload_mb") cfg.max_upload_bytes = parse_num<std::size_t>(key, v) << 20;
  else if (key == "mcs_budget_ms") cfg.mcs_budget_ms = parse_num<int>(key, v);
  else if (key == "api_key") cfg.api_key = std::string(v);
  else if (key == "embed.dim_full") cfg.dim_full = parse_num<int>(key, v);
  else if (key == "embed.dim_reduced") cfg.dim_reduced = parse_num<int>(key, v);
  else if (key == "embed.seed") cfg.surrogate_seed = parse_num<std::uint64_t>(key, v);
  else if (key == "calibration.target_recall") cfg.target_recall = parse_num<double>(key, v);
  else if (key == "calibration.latency_budget_ms") cfg.latency_budget_ms = parse_num<double>(key, v);
  else if (key == "calibration.recall_k") cfg.recall_k = parse_num<int>(key, v);
  else if (key == "tsne.cap") cfg.tsne_cap = parse_num<std::size_t>(key, v);
  else if (key == "tsne.full_dim") cfg.tsne_full_dim = parse_bool(key, v);
  else if (key == "pubchem.enabled") cfg.pubchem_enabled = parse_bool(key, v);
  else if (key == "pubchem.base_url") cfg.pubchem_base_url = std::string(v);
  else if (key == "pubchem.timeout_s") cfg.pubchem_timeout_s = parse_num<double>(key, v);
  else if (key == "pubchem.cache_ttl_s") cfg.pubchem_cache_ttl_s = parse_num<int>(key, v);
  else if (key == "pubchem.threshold") cfg.pubchem_default_threshold = parse_num<int>(key, v);
  else throw std::invalid_argument("config: unknown key `" + std::string(key) + "`");
}

ServiceConfig parse_config(std::string_view text) {
  ServiceConfig cfg;
  std::istringstream in{std::string(text)};
  for (const auto& item : CLI::ConfigINI().from_config(in)) {
    if (item.name == "++" || item.name == "--") continue;  // section markers
    std::string value;
    for (std::size_t i = 0; i < item.inputs.size(); ++i) value += (i ? "," : "") + item.inputs[i];
    apply_setting(cfg, item.fullname(), value);
  }
  cfg.validate();
  return cfg;
}

ServiceConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace molex::service
