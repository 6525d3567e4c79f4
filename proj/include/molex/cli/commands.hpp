#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "molex/ann/calibrate.hpp"
#include "molex/ann/hnsw.hpp"
#include "molex/embed/embedding.hpp"
#include "molex/predict/evaluate.hpp"
#include "molex/service/config.hpp"

namespace molex::cli {

/// Exit codes shared by every command.
enum ExitCode : int { kOk = 0, kFailure = 1, kBadInput = 2 };

struct IngestOptions {
  std::filesystem::path smiles_path;
  std::optional<std::filesystem::path> embeddings_path;  // rows matched to data lines by ordinal
  std::filesystem::path out_path;
  embed::EmbedderConfig embed;
  ann::HnswParams index;
  ann::CalibrationTarget calibration;
  std::size_t calibration_queries = 1000;
  std::uint64_t seed = 42;
  double max_reject_fraction = 0.5;
};

/// Canonicalize, embed, reduce, build, calibrate and save. Writes the index,
/// its vectors (.molv plus .smi ids) and a .json metadata file next to it.
int cmd_ingest(const IngestOptions& options, std::ostream& out, std::ostream& err);

struct QueryCliOptions {
  std::filesystem::path index_path;
  std::vector<std::string> smiles;
  int n = 10;
  bool include_mcs = false;
  int mcs_budget_ms = 500;
  bool json = false;  // print the service's /v1/neighbors response body
};

int cmd_query(const QueryCliOptions& options, std::ostream& out, std::ostream& err);

struct EvalCliOptions {
  std::filesystem::path csv_path;
  std::optional<std::filesystem::path> embeddings_path;
  std::string label_column = "label";
  embed::EmbedderConfig embed;
  predict::EvalOptions eval;
};

/// JSON report on `out`, human-readable table on `err`.
int cmd_eval(const EvalCliOptions& options, std::ostream& out, std::ostream& err);

/// Serves until SIGTERM or SIGINT. Must be called before any other thread is
/// started so the signals can be routed to the watcher thread.
int cmd_serve(const service::ServiceConfig& config, std::ostream& err);

}  // namespace molex::cli
