#include <CLI11.hpp>

#include <iostream>

#include "molex/cli/commands.hpp"

using namespace molex;

namespace {

service::ServiceConfig load(const std::string& path) {
  return path.empty() ? service::ServiceConfig{} : service::load_config(path);
}

embed::EmbedderConfig embedder(const service::ServiceConfig& c) {
  embed::EmbedderConfig e;
  e.dim_full = c.dim_full;
  e.dim_reduced = c.dim_reduced;
  e.surrogate_seed = c.surrogate_seed;
  return e;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"molex: molecule similarity search, projection and neighbour-based property prediction"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("-c,--config", config_path, "INI settings file shared with the service")->check(CLI::ExistingFile);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Build a searchable index from a SMILES file");
  std::string in_smiles, in_embeddings, in_out;
  std::uint64_t in_seed = 42;
  int in_m = 16, in_efc = 200;
  std::size_t in_queries = 1000;
  ingest->add_option("smiles", in_smiles, "SMILES file, one molecule per line")->required();
  ingest->add_option("-e,--embeddings", in_embeddings, "Embedding file whose rows follow the SMILES data lines");
  ingest->add_option("-o,--out", in_out, "Index file to write")->required();
  ingest->add_option("--seed", in_seed, "Seed for index levels and the calibration sample")->capture_default_str();
  ingest->add_option("--m", in_m, "Graph degree")->capture_default_str();
  ingest->add_option("--ef-construction", in_efc, "Build beam width")->capture_default_str();
  ingest->add_option("--calibration-queries", in_queries, "Rows sampled for ef_search calibration")
      ->capture_default_str();

  // query
  auto* query = app.add_subcommand("query", "Nearest neighbours of one or more molecules");
  std::string q_index;
  std::vector<std::string> q_smiles;
  int q_n = 10;
  bool q_mcs = false, q_json = false;
  query->add_option("smiles", q_smiles, "Query SMILES")->required();
  query->add_option("-i,--index", q_index, "Index file (default: `index` from the config)");
  query->add_option("-n", q_n, "Neighbours per query")->capture_default_str();
  query->add_flag("--mcs", q_mcs, "Report the maximum common substructure size per hit");
  query->add_flag("--json", q_json, "Print the JSON the service returns");

  // eval
  auto* eval = app.add_subcommand("eval", "Hold-out k-NN evaluation of a labelled CSV");
  std::string e_csv, e_embeddings, e_mode = "full", e_label = "label", e_backend;
  int e_k = 0, e_kc = 1, e_kr = 3;
  double e_fraction = 0.2;
  std::uint64_t e_seed = 0;
  std::vector<std::string> e_targets;
  eval->add_option("csv", e_csv, "CSV with a smiles column and labels or numeric targets")->required();
  eval->add_option("-e,--embeddings", e_embeddings, "Embedding file whose rows follow the CSV data lines");
  eval->add_option("--mode", e_mode, "classification, regression or full")->capture_default_str();
  eval->add_option("-k", e_k, "Neighbours for the selected mode");
  eval->add_option("--k-classification", e_kc)->capture_default_str();
  eval->add_option("--k-regression", e_kr)->capture_default_str();
  eval->add_option("--test-fraction", e_fraction)->capture_default_str()->check(CLI::Range(0.0, 1.0));
  eval->add_option("--seed", e_seed, "Split seed")->capture_default_str();
  eval->add_option("--targets", e_targets, "Numeric columns to regress (default: all)");
  eval->add_option("--label-column", e_label)->capture_default_str();
  eval->add_option("--backend", e_backend, "exact or hnsw (default: by size)")
      ->check(CLI::IsMember({"exact", "hnsw"}));

  // serve
  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  std::string s_index, s_host, s_data, s_ui;
  int s_port = -1;
  serve->add_option("-i,--index", s_index, "Index file (default: `index` from the config)");
  serve->add_option("--host", s_host);
  serve->add_option("-p,--port", s_port);
  serve->add_option("--data-dir", s_data);
  serve->add_option("--ui-dir", s_ui);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? cli::kOk : cli::kBadInput;
  }

  service::ServiceConfig config;
  try {
    config = load(config_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << config_path << ": " << e.what() << "\n";
    return cli::kBadInput;
  }

  try {
    if (*ingest) {
      cli::IngestOptions o;
      o.smiles_path = in_smiles;
      if (!in_embeddings.empty()) o.embeddings_path = in_embeddings;
      o.out_path = in_out;
      o.embed = embedder(config);
      o.index.m = in_m;
      o.index.m0 = 2 * in_m;
      o.index.ef_construction = in_efc;
      o.calibration.target_recall = config.target_recall;
      o.calibration.latency_budget_ms = config.latency_budget_ms;
      o.calibration.recall_k = config.recall_k;
      o.calibration_queries = in_queries;
      o.seed = in_seed;
      return cli::cmd_ingest(o, std::cout, std::cerr);
    }
    if (*query) {
      cli::QueryCliOptions o;
      o.index_path = q_index.empty() ? config.index_path : std::filesystem::path(q_index);
      if (o.index_path.empty()) {
        std::cerr << "error: no index given\n";
        return cli::kBadInput;
      }
      o.smiles = q_smiles;
      o.n = q_n;
      o.include_mcs = q_mcs;
      o.mcs_budget_ms = config.mcs_budget_ms;
      o.json = q_json;
      return cli::cmd_query(o, std::cout, std::cerr);
    }
    if (*eval) {
      cli::EvalCliOptions o;
      o.csv_path = e_csv;
      if (!e_embeddings.empty()) o.embeddings_path = e_embeddings;
      o.label_column = e_label;
      o.embed = embedder(config);
      try {
        o.eval.mode = predict::parse_eval_mode(e_mode);
      } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cli::kBadInput;
      }
      o.eval.k_classification = e_kc;
      o.eval.k_regression = e_kr;
      if (e_k > 0) {
        if (o.eval.mode != predict::EvalMode::Regression) o.eval.k_classification = e_k;
        if (o.eval.mode != predict::EvalMode::Classification) o.eval.k_regression = e_k;
      }
      o.eval.test_fraction = e_fraction;
      o.eval.seed = e_seed;
      o.eval.targets = e_targets;
      if (e_backend == "exact") o.eval.backend = predict::Backend::Exact;
      if (e_backend == "hnsw") o.eval.backend = predict::Backend::Hnsw;
      return cli::cmd_eval(o, std::cout, std::cerr);
    }
    if (*serve) {
      if (!s_index.empty()) config.index_path = s_index;
      if (!s_host.empty()) config.host = s_host;
      if (s_port >= 0) config.port = s_port;
      if (!s_data.empty()) config.data_dir = s_data;
      if (!s_ui.empty()) config.ui_dir = s_ui;
      return cli::cmd_serve(config, std::cerr);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kFailure;
  }
  return cli::kBadInput;
}
