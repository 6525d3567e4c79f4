#include <fstream>
#include <sstream>

#include "molex/chem/canonical.hpp"
#include "molex/chem/depict.hpp"
#include "molex/chem/mcs.hpp"
#include "molex/chem/smiles.hpp"
#include "molex/ann/index_io.hpp"
#include "molex/predict/evaluate.hpp"
#include "molex/project/tsne.hpp"
#include "molex/service/platform.hpp"

namespace molex::service {
namespace {

using nlohmann::json;

ApiResponse json_response(int status, const json& body) { return {status, body.dump(), "application/json"}; }

std::optional<json> parse_body(const std::string& body, ApiResponse& error) {
  if (body.empty()) return json::object();
  try {
    auto j = json::parse(body);
    if (!j.is_object()) {
      error = error_response(400, "request body must be a JSON object");
      return std::nullopt;
    }
    return j;
  } catch (const json::parse_error& e) {
    error = error_response(400, "request body is not valid JSON", {{"reason", e.what()}});
    return std::nullopt;
  }
}

json smiles_error_detail(const chem::SmilesError& e) {
  return e.offset() >= 0 ? json{{"offset", e.offset()}} : json(nullptr);
}

}  // namespace

std::filesystem::path meta_path(const std::filesystem::path& index_path) {
  auto p = index_path;
  p.replace_extension(".json");
  return p;
}

json to_json(const IndexMeta& meta) {
  json j = {{"source", meta.source},
            {"surrogate_seed", meta.surrogate_seed},
            {"dim_full", meta.dim_full},
            {"dim_reduced", meta.dim_reduced},
            {"rejects", meta.rejects},
            {"calibration", nullptr}};
  if (const auto& c = meta.calibration)
    j["calibration"] = {{"ef_search", c->ef_search},         {"recall", c->recall},
                        {"mean_latency_ms", c->mean_latency_ms}, {"p99_latency_ms", c->p99_latency_ms},
                        {"feasible", c->feasible},           {"queries", c->queries}};
  return j;
}

IndexMeta meta_from_json(const json& j) {
  IndexMeta m;
  m.source = j.value("source", "surrogate");
  m.surrogate_seed = j.value("surrogate_seed", std::uint64_t{0});
  m.dim_full = j.value("dim_full", 768);
  m.dim_reduced = j.value("dim_reduced", 128);
  m.rejects = j.value("rejects", std::size_t{0});
  if (j.contains("calibration") && !j["calibration"].is_null()) {
    const auto& c = j["calibration"];
    ann::CalibrationResult r;
    r.ef_search = c.at("ef_search");
    r.recall = c.at("recall");
    r.mean_latency_ms = c.at("mean_latency_ms");
    r.p99_latency_ms = c.at("p99_latency_ms");
    r.feasible = c.at("feasible");
    r.queries = c.at("queries");
    m.calibration = r;
  }
  return m;
}

std::shared_ptr<const LoadedIndex> wrap_index(ann::HnswIndex index, IndexMeta meta) {
  auto loaded = std::make_shared<LoadedIndex>();
  loaded->index = std::move(index);
  loaded->meta = std::move(meta);
  const auto& ids = loaded->index.vectors().ids;
  for (std::size_t i = 0; i < ids.size(); ++i) loaded->row_of.emplace(ids[i], static_cast<std::uint32_t>(i));
  return loaded;
}

std::shared_ptr<const LoadedIndex> open_index(const std::filesystem::path& path) {
  auto index = ann::load_index(path);
  IndexMeta meta;
  meta.dim_reduced = index.dim();
  if (std::ifstream in(meta_path(path)); in) meta = meta_from_json(json::parse(in));
  return wrap_index(std::move(index), std::move(meta));
}

QueryResult query_neighbors(const LoadedIndex& loaded, const std::string& smiles, const QueryOptions& options) {
  QueryResult out;
  out.query = smiles;
  const chem::MolGraph mol = chem::parse_smiles(smiles);
  out.canonical = chem::canonicalize(mol).smiles;

  std::vector<float> reduced;
  if (auto it = loaded.row_of.find(out.canonical); it != loaded.row_of.end()) {
    const auto row = loaded.index.vectors().row(it->second);
    reduced.assign(row.begin(), row.end());
  } else {
    if (loaded.meta.source != "surrogate")
      throw NotEmbeddable("molecule is not in the index and the index was built from external embeddings");
    embed::EmbedderConfig cfg;
    cfg.dim_full = loaded.meta.dim_full;
    cfg.dim_reduced = loaded.meta.dim_reduced;
    cfg.surrogate_seed = loaded.meta.surrogate_seed;
    const auto full = embed::surrogate_embed(out.canonical, cfg);
    const Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXf>(full.data(), full.size()).cast<double>();
    const Eigen::VectorXd r = embed::dct_reduce<double>(v, cfg.dim_reduced);
    reduced.resize(r.size());
    for (Eigen::Index i = 0; i < r.size(); ++i) reduced[i] = static_cast<float>(r[i]);
    embed::normalize(reduced);
  }

  const auto hits = loaded.index.search(reduced, options.n);
  for (const auto& h : hits) {
    NeighborHit hit;
    hit.id = h.id;
    hit.smiles = loaded.index.vectors().ids.empty() ? "" : loaded.index.vectors().ids[h.id];
    hit.distance = std::max(0.0f, h.distance);
    if ((options.include_properties || options.include_mcs) && !hit.smiles.empty()) {
      const chem::MolGraph other = chem::parse_smiles(hit.smiles);
      if (options.include_properties) hit.properties = descriptors::compute_descriptors(other);
      if (options.include_mcs) {
        const auto mcs = chem::max_common_subgraph(mol, other, options.mcs_budget_ms);
        hit.mcs_size = mcs.size_atoms;
        hit.mcs_optimal = mcs.optimal;
      }
    }
    out.hits.push_back(std::move(hit));
  }
  return out;
}

json to_json(const descriptors::DescriptorSet& d) {
  return {{"mw", d.mw},
          {"logp", d.logp},
          {"hbd", d.hbd},
          {"hba", d.hba},
          {"tpsa", d.tpsa},
          {"rotb", d.rotb},
          {"arom_rings", d.arom_rings},
          {"qed", d.qed},
          {"ro5_violations", d.ro5_violations},
          {"ro5_pass", d.ro5_pass}};
}

json to_json(const NeighborHit& hit) {
  json j = {{"id", hit.id}, {"smiles", hit.smiles}, {"distance", hit.distance}};
  j["properties"] = hit.properties ? to_json(*hit.properties) : json(nullptr);
  j["mcs_size"] = hit.mcs_size ? json(*hit.mcs_size) : json(nullptr);
  if (hit.mcs_size) j["mcs_optimal"] = hit.mcs_optimal;
  return j;
}

ApiResponse error_response(int status, const std::string& message, json detail) {
  return json_response(status, {{"code", status}, {"message", message}, {"detail", std::move(detail)}});
}

Platform::Platform(ServiceConfig config, std::shared_ptr<const LoadedIndex> index, Transport pubchem_transport)
    : config_(std::move(config)),
      index_(std::move(index)),
      store_(config_.data_dir),
      jobs_(store_, config_.workers),
      pubchem_(PubchemSettings{config_.pubchem_enabled, config_.pubchem_base_url,
                               std::chrono::milliseconds(static_cast<long long>(config_.pubchem_timeout_s * 1000)),
                               std::chrono::seconds(config_.pubchem_cache_ttl_s)},
               pubchem_transport ? std::move(pubchem_transport) : https_transport()) {}

ApiResponse Platform::health() const {
  json j = {{"status", "ok"}, {"index_loaded", index_ != nullptr}, {"rows", 0}, {"ef_search", nullptr}};
  if (index_) {
    j["rows"] = index_->index.size();
    j["dim"] = index_->index.dim();
    j["ef_search"] = index_->index.params().ef_search;
    j["index"] = to_json(index_->meta);
  }
  j["pubchem_enabled"] = config_.pubchem_enabled;
  return json_response(200, j);
}

ApiResponse Platform::neighbors(const std::string& body) const {
  ApiResponse err;
  const auto req = parse_body(body, err);
  if (!req) return err;
  std::vector<std::string> queries;
  const auto& s = (*req)["smiles"];
  if (s.is_string()) {
    queries.push_back(s.get<std::string>());
  } else if (s.is_array()) {
    for (const auto& q : s) {
      if (!q.is_string()) return error_response(400, "`smiles` entries must be strings");
      queries.push_back(q.get<std::string>());
    }
  } else {
    return error_response(400, "`smiles` must be a string or a list of strings");
  }
  if (queries.empty()) return error_response(400, "`smiles` is empty");
  if (static_cast<int>(queries.size()) > config_.max_smiles_per_request)
    return error_response(413, "too many SMILES in one request",
                          {{"limit", config_.max_smiles_per_request}, {"given", queries.size()}});
  QueryOptions opt;
  opt.n = req->value("n", 10);
  opt.include_mcs = req->value("include_mcs", false);
  opt.include_properties = req->value("include_properties", true);
  opt.mcs_budget_ms = config_.mcs_budget_ms;
  if (opt.n < 1 || opt.n > config_.max_neighbors)
    return error_response(422, "`n` must be between 1 and " + std::to_string(config_.max_neighbors), {{"n", opt.n}});
  if (!index_) return error_response(503, "no index is loaded");

  json results = json::array();
  int failures = 0;
  for (const auto& q : queries) {
    try {
      const auto r = query_neighbors(*index_, q, opt);
      json hits = json::array();
      for (const auto& h : r.hits) hits.push_back(to_json(h));
      results.push_back({{"query", r.query}, {"canonical", r.canonical}, {"hits", hits}, {"error", nullptr}});
    } catch (const chem::SmilesError& e) {
      ++failures;
      results.push_back({{"query", q},
                         {"canonical", nullptr},
                         {"hits", nullptr},
                         {"error", {{"code", 400}, {"message", e.what()}, {"detail", smiles_error_detail(e)}}}});
    } catch (const NotEmbeddable& e) {
      ++failures;
      results.push_back({{"query", q},
                         {"canonical", nullptr},
                         {"hits", nullptr},
                         {"error", {{"code", 422}, {"message", e.what()}, {"detail", nullptr}}}});
    }
  }
  const int status = failures == static_cast<int>(queries.size()) ? 400 : 200;
  return json_response(status, {{"n", opt.n}, {"results", results}});
}

ApiResponse Platform::upload(const std::string& content, const std::string& filename, const std::string& name,
                             const std::optional<std::string>& embeddings) {
  if (content.size() + (embeddings ? embeddings->size() : 0) > config_.max_upload_bytes)
    return error_response(413, "upload exceeds the size limit", {{"limit_bytes", config_.max_upload_bytes}});
  predict::LabeledRows rows;
  try {
    const bool csv = filename.ends_with(".csv") || filename.ends_with(".CSV");
    rows = csv ? predict::parse_labeled_csv(content) : predict::parse_dataset_text(content);
  } catch (const std::invalid_argument& e) {
    return error_response(422, e.what());
  }
  json rejects = json::array();
  for (const auto& r : rows.rejects) rejects.push_back({{"line", r.line}, {"reason", r.reason}});
  if (rows.size() == 0) return error_response(422, "no valid rows", {{"rejects", rejects}});

  embed::EmbedderConfig cfg;
  cfg.dim_full = config_.dim_full;
  cfg.dim_reduced = config_.dim_reduced;
  cfg.surrogate_seed = config_.surrogate_seed;
  embed::EmbeddingMatrix full;
  predict::LabeledDataset ds;
  try {
    std::optional<embed::EmbeddingMatrix> provided;
    if (embeddings) {
      provided = embed::read_embedding_bytes(*embeddings);
      cfg.source = embed::EmbeddingSource::File;
    }
    ds = predict::embed_rows(std::move(rows), cfg, provided ? &*provided : nullptr, &full);
  } catch (const embed::EmbeddingFileError& e) {
    return error_response(422, std::string("embedding file: ") + e.what(), {{"offset", e.offset()}});
  } catch (const std::invalid_argument& e) {
    return error_response(422, e.what());
  }
  const auto record = store_.add_dataset(name.empty() ? filename : name, ds, full);
  json j = to_json(record);
  j["rejects"] = rejects;
  j["reject_count"] = rejects.size();
  return json_response(201, j);
}

ApiResponse Platform::dataset(const std::string& id) const {
  const auto record = store_.dataset(id);
  if (!record) return error_response(404, "unknown dataset", {{"dataset_id", id}});
  return json_response(200, to_json(*record));
}

ApiResponse Platform::start_projection(const std::string& dataset_id, const std::string& body) {
  ApiResponse err;
  const auto req = parse_body(body, err);
  if (!req) return err;
  const auto record = store_.dataset(dataset_id);
  if (!record) return error_response(404, "unknown dataset", {{"dataset_id", dataset_id}});
  project::TsneParams params;
  try {
    params.perplexity = req->value("perplexity", params.perplexity);
    params.iterations = req->value("iterations", params.iterations);
    params.learning_rate = req->value("learning_rate", params.learning_rate);
    params.early_exaggeration = req->value("early_exaggeration", params.early_exaggeration);
    params.seed = req->value("seed", params.seed);
    params.validate(std::min(record->rows, config_.tsne_cap));
  } catch (const std::exception& e) {
    return error_response(422, e.what());
  }
  const bool full_dim = req->value("full_dim", config_.tsne_full_dim);
  const json job_params = {{"perplexity", params.perplexity}, {"iterations", params.iterations},
                           {"learning_rate", params.learning_rate}, {"early_exaggeration", params.early_exaggeration},
                           {"seed", params.seed}, {"full_dim", full_dim}};
  const std::size_t cap = config_.tsne_cap;
  Store& store = store_;
  const DatasetRecord rec = *record;
  try {
    const auto job = jobs_.submit(JobKind::Projection, dataset_id, job_params, [=, &store](JobContext& ctx) {
      const auto ds = store.load_dataset(rec);
      const embed::EmbeddingMatrix m = full_dim ? store.load_full(rec) : ds.embeddings;
      const auto keep = project::subsample(m.count, cap, params.seed);
      Eigen::MatrixXd x(keep.size(), m.dim);
      for (std::size_t i = 0; i < keep.size(); ++i)
        for (int c = 0; c < m.dim; ++c) x(i, c) = m.row(keep[i])[c];
      const auto proj = project::tsne_run(x, params, [&](int iter, double) {
        ctx.progress(double(iter + 1) / params.iterations);
        return !ctx.canceled();
      });
      std::vector<std::string> ids, labels;
      for (std::size_t i : keep) {
        ids.push_back(ds.rows.smiles[i]);
        if (ds.rows.labeled) labels.push_back(ds.rows.class_labels[i]);
      }
      json result = {{"csv", project::projection_csv(ids, proj.coords, labels)},
                     {"labels", rec.labels},
                     {"points", keep.size()},
                     {"subsampled", keep.size() < m.count},
                     {"kl_final", proj.kl_trace.back()},
                     {"kl_trace", proj.kl_trace}};
      if (keep.size() < m.count)
        result["warning"] = "dataset has " + std::to_string(m.count) + " rows; projected a uniform sample of " +
                            std::to_string(keep.size());
      return result;
    });
    return json_response(202, {{"job_id", job.id}, {"state", to_string(job.state)}});
  } catch (const JobConflict& e) {
    return error_response(409, e.what());
  }
}

ApiResponse Platform::start_eval(const std::string& dataset_id, const std::string& body) {
  ApiResponse err;
  const auto req = parse_body(body, err);
  if (!req) return err;
  const auto record = store_.dataset(dataset_id);
  if (!record) return error_response(404, "unknown dataset", {{"dataset_id", dataset_id}});
  predict::EvalOptions opt;
  try {
    const std::string mode = req->value("mode", record->mode == predict::LabelMode::Regression ? "regression"
                                                                                              : "classification");
    opt.mode = predict::parse_eval_mode(mode);
    if (opt.mode == predict::EvalMode::Classification) opt.k_classification = req->value("k", 1);
    if (opt.mode == predict::EvalMode::Regression) opt.k_regression = req->value("k", 3);
    opt.k_classification = req->value("k_classification", opt.k_classification);
    opt.k_regression = req->value("k_regression", opt.k_regression);
    opt.test_fraction = req->value("test_fraction", 0.2);
    opt.seed = req->value("seed", std::uint64_t{0});
    if (req->contains("targets")) opt.targets = (*req)["targets"].get<std::vector<std::string>>();
  } catch (const std::exception& e) {
    return error_response(422, e.what());
  }
  if (opt.k_classification < 1 || opt.k_regression < 1) return error_response(422, "k must be at least 1");
  const bool needs_labels = opt.mode != predict::EvalMode::Regression;
  const bool needs_targets = opt.mode != predict::EvalMode::Classification;
  if (needs_labels && record->mode != predict::LabelMode::Classification)
    return error_response(409, "dataset has no class labels for classification",
                          {{"label_mode", predict::to_string(record->mode)}});
  if (needs_targets) {
    if (record->targets.empty())
      return error_response(409, "dataset has no numeric targets for regression",
                            {{"label_mode", predict::to_string(record->mode)}});
    for (const auto& t : opt.targets)
      if (std::find(record->targets.begin(), record->targets.end(), t) == record->targets.end())
        return error_response(409, "dataset has no target `" + t + "`", {{"targets", record->targets}});
  }
  const json job_params = {{"mode", req->value("mode", "")}, {"k_classification", opt.k_classification},
                           {"k_regression", opt.k_regression}, {"test_fraction", opt.test_fraction},
                           {"seed", opt.seed}, {"targets", opt.targets}};
  Store& store = store_;
  const DatasetRecord rec = *record;
  try {
    const auto job = jobs_.submit(JobKind::Evaluation, dataset_id, job_params, [=, &store](JobContext& ctx) {
      const auto ds = store.load_dataset(rec);
      ctx.progress(0.1);
      ctx.check_canceled();
      return predict::to_json(predict::run_evaluation(ds, opt));
    });
    return json_response(202, {{"job_id", job.id}, {"state", to_string(job.state)}});
  } catch (const JobConflict& e) {
    return error_response(409, e.what());
  }
}

ApiResponse Platform::job(const std::string& id) const {
  const auto job = jobs_.get(id);
  if (!job) return error_response(404, "unknown job", {{"job_id", id}});
  json j = to_json(*job);
  j["result"] = nullptr;
  if (job->state == JobState::Done)
    if (auto r = jobs_.result(id)) j["result"] = std::move(*r);
  return json_response(200, j);
}

ApiResponse Platform::cancel_job(const std::string& id) {
  const auto job = jobs_.cancel(id);
  if (!job) return error_response(404, "unknown job", {{"job_id", id}});
  if (is_terminal(job->state))
    return error_response(409, "job already finished", {{"state", to_string(job->state)}});
  return json_response(202, {{"job_id", id}, {"cancel_requested", true}});
}

ApiResponse Platform::job_result(const std::string& id) const {
  const auto job = jobs_.get(id);
  if (!job) return error_response(404, "unknown job", {{"job_id", id}});
  const auto r = jobs_.result(id);
  if (!r) return error_response(409, "job has no result", {{"state", to_string(job->state)}});
  if (job->kind == JobKind::Projection) return {200, (*r)["csv"].get<std::string>(), "text/csv"};
  return json_response(200, *r);
}

ApiResponse Platform::depict(const std::string& smiles, const std::string& vs) const {
  try {
    const chem::MolGraph mol = chem::parse_smiles(smiles);
    std::vector<int> highlight;
    if (!vs.empty()) {
      const chem::MolGraph other = chem::parse_smiles(vs);
      for (const auto& [a, b] : chem::max_common_subgraph(mol, other, config_.mcs_budget_ms).mapping)
        highlight.push_back(a);
    }
    return {200, chem::depict_svg(mol, highlight), "image/svg+xml"};
  } catch (const chem::SmilesError& e) {
    return error_response(400, e.what(), smiles_error_detail(e));
  }
}

ApiResponse Platform::pubchem(const std::string& smiles, const std::string& threshold) {
  if (!config_.pubchem_enabled) return error_response(501, "PubChem similarity search is disabled");
  int t = config_.pubchem_default_threshold;
  if (!threshold.empty()) {
    try {
      std::size_t used = 0;
      t = std::stoi(threshold, &used);
      if (used != threshold.size()) throw std::invalid_argument(threshold);
    } catch (const std::exception&) {
      return error_response(400, "threshold must be an integer", {{"threshold", threshold}});
    }
  }
  std::string canonical;
  try {
    canonical = chem::canonical_smiles(smiles);
  } catch (const chem::SmilesError& e) {
    return error_response(400, e.what(), smiles_error_detail(e));
  }
  try {
    const auto r = pubchem_.similar(canonical, t);
    return json_response(200, {{"smiles", canonical}, {"threshold", r.threshold}, {"cids", r.cids},
                               {"cached", r.cached}, {"stale", r.stale}});
  } catch (const PubchemDisabled& e) {
    return error_response(501, e.what());
  } catch (const PubchemTimeout& e) {
    return error_response(504, "PubChem did not answer in time", {{"reason", e.what()}});
  } catch (const PubchemUpstreamError& e) {
    return error_response(502, e.what());
  }
}

}  // namespace molex::service
