#include "molex/cli/commands.hpp"

#include <pthread.h>
#include <signal.h>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include "molex/ann/index_io.hpp"
#include "molex/chem/smiles.hpp"
#include "molex/predict/dataset.hpp"
#include "molex/project/tsne.hpp"
#include "molex/service/http.hpp"
#include "molex/service/platform.hpp"

namespace molex::cli {
namespace {

using nlohmann::json;

std::optional<std::string> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fixed(double v, int digits) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(digits) << v;
  return ss.str();
}

}  // namespace

int cmd_ingest(const IngestOptions& o, std::ostream& out, std::ostream& err) {
  const auto text = read_file(o.smiles_path);
  if (!text) {
    err << "error: cannot read " << o.smiles_path << "\n";
    return kFailure;
  }
  predict::LabeledRows rows = predict::parse_dataset_text(*text);
  for (const auto& r : rows.rejects) err << "warning: line " << r.line << ": " << r.reason << "\n";
  const std::size_t total = rows.data_lines;
  if (total == 0 || rows.rejects.size() > o.max_reject_fraction * total) {
    err << "error: " << rows.rejects.size() << " of " << total << " rows rejected\n";
    return kFailure;
  }

  embed::EmbedderConfig cfg = o.embed;
  predict::LabeledDataset ds;
  try {
    std::optional<embed::EmbeddingMatrix> provided;
    if (o.embeddings_path) {
      provided = embed::load_embedding_file(*o.embeddings_path);
      cfg.source = embed::EmbeddingSource::File;
    }
    ds = predict::embed_rows(std::move(rows), cfg, provided ? &*provided : nullptr);
  } catch (const embed::EmbeddingFileError& e) {
    err << "error: " << o.embeddings_path->string() << ": " << e.what() << " (offset " << e.offset() << ")\n";
    return kFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }

  embed::EmbeddingMatrix vectors = std::move(ds.embeddings);
  vectors.ids = ds.rows.smiles;
  ann::HnswParams params = o.index;
  params.rng_seed = o.seed;
  ann::HnswIndex index;
  try {
    index = ann::HnswIndex::build(std::move(vectors), params);
  } catch (const std::exception& e) {
    err << "error: index build failed: " << e.what() << "\n";
    return kFailure;
  }

  service::IndexMeta meta;
  meta.source = cfg.source == embed::EmbeddingSource::File ? "file" : "surrogate";
  meta.surrogate_seed = cfg.surrogate_seed;
  meta.dim_full = cfg.dim_full;
  meta.dim_reduced = cfg.dim_reduced;
  meta.rejects = total - index.size();

  const auto sample = project::subsample(index.size(), o.calibration_queries, o.seed);
  if (sample.size() < 100) {
    err << "warning: " << sample.size() << " rows is too few to calibrate ef_search; keeping "
        << index.params().ef_search << "\n";
  } else {
    embed::EmbeddingMatrix queries;
    queries.dim = index.dim();
    queries.count = sample.size();
    for (std::size_t i : sample) {
      const auto row = index.vectors().row(i);
      queries.data.insert(queries.data.end(), row.begin(), row.end());
    }
    const auto oracle = ann::oracle_neighbors(index.vectors(), queries, o.calibration.recall_k);
    try {
      const auto c = ann::calibrate_ef(index, queries, oracle, o.calibration);
      index.set_ef_search(c.ef_search);
      meta.calibration = c;
      if (!c.feasible)
        err << "warning: recall target met at ef_search=" << c.ef_search << " but mean latency "
            << fixed(c.mean_latency_ms, 3) << " ms exceeds the budget\n";
    } catch (const ann::CalibrationError& e) {
      err << "warning: " << e.what() << " (best recall " << fixed(e.max_recall(), 4) << ")\n";
    }
  }

  try {
    ann::save_index(index, o.out_path);
    std::ofstream(service::meta_path(o.out_path)) << service::to_json(meta).dump(2) << "\n";
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }

  out << "rows indexed    " << index.size() << "\n"
      << "rows rejected   " << meta.rejects << "\n"
      << "embeddings      " << meta.source << "\n"
      << "dimension       " << index.dim() << "\n"
      << "ef_search       " << index.params().ef_search << "\n";
  if (const auto& c = meta.calibration)
    out << "recall@" << o.calibration.recall_k << "       " << fixed(c->recall, 4) << " over " << c->queries
        << " queries\n"
        << "latency mean    " << fixed(c->mean_latency_ms, 3) << " ms\n"
        << "latency p99     " << fixed(c->p99_latency_ms, 3) << " ms\n";
  out << "index           " << o.out_path.string() << "\n";
  return kOk;
}

int cmd_query(const QueryCliOptions& o, std::ostream& out, std::ostream& err) {
  std::shared_ptr<const service::LoadedIndex> loaded;
  try {
    loaded = service::open_index(o.index_path);
  } catch (const std::exception& e) {
    err << "error: " << o.index_path.string() << ": " << e.what() << "\n";
    return kFailure;
  }
  if (o.n < 1) {
    err << "error: n must be at least 1\n";
    return kBadInput;
  }
  service::QueryOptions q;
  q.n = o.n;
  q.include_mcs = o.include_mcs;
  q.mcs_budget_ms = o.mcs_budget_ms;

  int status = kOk;
  json results = json::array();
  for (const auto& s : o.smiles) {
    try {
      const auto r = service::query_neighbors(*loaded, s, q);
      json hits = json::array();
      for (const auto& h : r.hits) hits.push_back(service::to_json(h));
      results.push_back({{"query", r.query}, {"canonical", r.canonical}, {"hits", hits}, {"error", nullptr}});
      if (o.json) continue;
      out << "# " << r.query << "  (" << r.canonical << ")\n";
      out << "rank\tdistance\tmw\tlogp\tqed" << (o.include_mcs ? "\tmcs" : "") << "\tsmiles\n";
      for (std::size_t i = 0; i < r.hits.size(); ++i) {
        const auto& h = r.hits[i];
        out << i + 1 << "\t" << fixed(h.distance, 6);
        if (h.properties)
          out << "\t" << fixed(h.properties->mw, 2) << "\t" << fixed(h.properties->logp, 2) << "\t"
              << fixed(h.properties->qed, 3);
        else
          out << "\t-\t-\t-";
        if (o.include_mcs) out << "\t" << (h.mcs_size ? std::to_string(*h.mcs_size) : "-");
        out << "\t" << h.smiles << "\n";
      }
    } catch (const chem::SmilesError& e) {
      err << "error: " << s << ": " << e.what() << "\n";
      results.push_back({{"query", s},
                         {"canonical", nullptr},
                         {"hits", nullptr},
                         {"error", {{"code", 400}, {"message", e.what()}, {"detail", nullptr}}}});
      status = kBadInput;
    } catch (const service::NotEmbeddable& e) {
      err << "error: " << s << ": " << e.what() << "\n";
      results.push_back({{"query", s},
                         {"canonical", nullptr},
                         {"hits", nullptr},
                         {"error", {{"code", 422}, {"message", e.what()}, {"detail", nullptr}}}});
      status = kBadInput;
    }
  }
  if (o.json) out << json{{"n", o.n}, {"results", results}}.dump(2) << "\n";
  return status;
}

int cmd_eval(const EvalCliOptions& o, std::ostream& out, std::ostream& err) {
  const auto text = read_file(o.csv_path);
  if (!text) {
    err << "error: cannot read " << o.csv_path << "\n";
    return kFailure;
  }
  predict::LabeledRows rows;
  try {
    rows = predict::parse_labeled_csv(*text, o.label_column);
  } catch (const std::invalid_argument& e) {
    err << "error: " << o.csv_path.string() << ": " << e.what() << "\n";
    return kBadInput;
  }
  for (const auto& r : rows.rejects) err << "warning: line " << r.line << ": " << r.reason << "\n";
  if (rows.size() == 0) {
    err << "error: no valid rows\n";
    return kBadInput;
  }

  embed::EmbedderConfig cfg = o.embed;
  predict::LabeledDataset ds;
  try {
    std::optional<embed::EmbeddingMatrix> provided;
    if (o.embeddings_path) {
      provided = embed::load_embedding_file(*o.embeddings_path);
      cfg.source = embed::EmbeddingSource::File;
    }
    ds = predict::embed_rows(std::move(rows), cfg, provided ? &*provided : nullptr);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }

  predict::EvalReport report;
  try {
    report = predict::run_evaluation(ds, o.eval);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  out << predict::to_json(report).dump(2) << "\n";

  err << "train " << report.n_train << ", test " << report.n_test << ", seed " << report.seed << "\n";
  if (const auto& c = report.classification) {
    err << "classification (k=" << c->k << ")\n"
        << "  accuracy   " << fixed(c->accuracy, 4) << "\n"
        << "  baseline   " << fixed(c->baseline_accuracy, 4) << "  (majority class)\n"
        << "  confusion  rows truth, columns predicted:";
    for (const auto& l : c->labels) err << " " << l;
    err << "\n";
    for (std::size_t i = 0; i < c->labels.size(); ++i) {
      err << "    " << c->labels[i];
      for (std::size_t j = 0; j < c->labels.size(); ++j) err << "\t" << c->confusion[i][j];
      err << "\n";
    }
  }
  if (const auto& r = report.regression) {
    err << "regression (k=" << r->k << ")\n";
    for (const auto& t : r->targets)
      err << "  R2 " << t.name << "\t" << (t.r2 ? fixed(*t.r2, 4) : std::string("undefined")) << "\n";
  }
  return kOk;
}

int cmd_serve(const service::ServiceConfig& config, std::ostream& err) {
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGTERM);
  sigaddset(&signals, SIGINT);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  if (config.index_path.empty()) {
    err << "error: no index configured (set `index` or pass --index)\n";
    return kFailure;
  }
  std::shared_ptr<const service::LoadedIndex> index;
  try {
    index = service::open_index(config.index_path);
  } catch (const std::exception& e) {
    err << "error: " << config.index_path.string() << ": " << e.what() << "\n";
    return kFailure;
  }

  std::optional<service::Platform> platform;
  try {
    platform.emplace(config, index);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  service::HttpServer server(*platform);
  const int port = server.bind(config.host, config.port);
  if (port < 0) {
    err << "error: cannot bind " << config.host << ":" << config.port << "\n";
    return kFailure;
  }
  err << "serving " << index->index.size() << " molecules on http://" << config.host << ":" << port << "\n"
      << std::flush;

  std::atomic<bool> done{false};
  std::thread watcher([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    if (done) return;
    err << "received signal " << sig << ", shutting down\n" << std::flush;
    // A signal can land between bind and listen; stop() is a no-op until the
    // accept loop runs.
    while (!server.running() && !done) std::this_thread::sleep_for(std::chrono::milliseconds(5));
    server.stop();
  });
  const bool ok = server.listen();
  done = true;
  pthread_kill(watcher.native_handle(), SIGTERM);
  watcher.join();
  return ok ? kOk : kFailure;
}

}  // namespace molex::cli
