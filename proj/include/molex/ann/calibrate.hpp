#pragma once

#include <stdexcept>
#include <vector>

#include "molex/ann/hnsw.hpp"

namespace molex::ann {

struct CalibrationTarget {
  double target_recall = 0.99;
  double latency_budget_ms = 10.0;
  int recall_k = 10;

  void validate() const;
};

struct CalibrationResult {
  int ef_search = 0;
  double recall = 0;
  double mean_latency_ms = 0;
  double p99_latency_ms = 0;
  bool feasible = false;  // mean latency within the budget at the chosen ef
  int queries = 0;
};

class CalibrationError : public std::runtime_error {
 public:
  CalibrationError(const std::string& what, double max_recall)
      : std::runtime_error(what), max_recall_(max_recall) {}
  double max_recall() const noexcept { return max_recall_; }

 private:
  double max_recall_;
};

using Neighbors = std::vector<std::vector<std::uint32_t>>;

/// Exact top-k ids for every row of `queries`, computed in parallel.
Neighbors oracle_neighbors(const EmbeddingMatrix& vectors, const EmbeddingMatrix& queries, int k);

/// Mean recall@k of the index at `ef` against `oracle`, queries run in parallel.
double measure_recall(const HnswIndex& index, const EmbeddingMatrix& queries, const Neighbors& oracle, int k, int ef);

/// Smallest ef_search reaching the target recall, found by doubling then
/// binary search. Latency is then measured single-threaded at that ef.
/// Needs at least 100 queries. Throws CalibrationError when even ef = size()
/// misses the target.
CalibrationResult calibrate_ef(const HnswIndex& index, const EmbeddingMatrix& queries, const Neighbors& oracle,
                               const CalibrationTarget& target);

}  // namespace molex::ann
