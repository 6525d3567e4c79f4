#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

#include "molex/ann/calibrate.hpp"

namespace molex::ann {
namespace {

template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const std::size_t workers = std::max(1u, std::min(std::thread::hardware_concurrency(), 16u));
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, n); ++w)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) fn(i);
    });
  for (auto& t : pool) t.join();
}

}  // namespace

void CalibrationTarget::validate() const {
  if (!(target_recall > 0 && target_recall <= 1)) throw std::invalid_argument("target_recall must be in (0, 1]");
  if (!(latency_budget_ms > 0)) throw std::invalid_argument("latency budget must be positive");
  if (recall_k < 1) throw std::invalid_argument("recall_k must be at least 1");
}

Neighbors oracle_neighbors(const EmbeddingMatrix& vectors, const EmbeddingMatrix& queries, int k) {
  Neighbors out(queries.count);
  parallel_for(queries.count, [&](std::size_t i) {
    for (const auto& hit : brute_force_search(vectors, queries.row(i), k)) out[i].push_back(hit.id);
  });
  return out;
}

double measure_recall(const HnswIndex& index, const EmbeddingMatrix& queries, const Neighbors& oracle, int k, int ef) {
  std::vector<double> per_query(queries.count, 0.0);
  parallel_for(queries.count, [&](std::size_t i) {
    const auto hits = index.search(queries.row(i), k, ef);
    const auto& truth = oracle[i];
    const std::size_t depth = std::min<std::size_t>(k, truth.size());
    if (depth == 0) {
      per_query[i] = 1.0;
      return;
    }
    std::size_t found = 0;
    for (std::size_t t = 0; t < depth; ++t)
      for (const auto& h : hits)
        if (h.id == truth[t]) {
          ++found;
          break;
        }
    per_query[i] = double(found) / depth;
  });
  double sum = 0;
  for (double r : per_query) sum += r;
  return queries.count ? sum / queries.count : 0.0;
}

CalibrationResult calibrate_ef(const HnswIndex& index, const EmbeddingMatrix& queries, const Neighbors& oracle,
                               const CalibrationTarget& target) {
  target.validate();
  if (queries.count < 100) throw std::invalid_argument("calibration needs at least 100 sample queries");
  if (oracle.size() != queries.count) throw std::invalid_argument("oracle results do not match the query count");
  const int k = target.recall_k;
  const int cap = static_cast<int>(std::max<std::size_t>(index.size(), k));

  // Doubling phase: find a passing ef, remembering the last failing one.
  int lo = 0, hi = std::min(k, cap);
  double hi_recall = measure_recall(index, queries, oracle, k, hi);
  while (hi_recall < target.target_recall) {
    if (hi >= cap) throw CalibrationError("target recall unreachable even at ef = index size", hi_recall);
    lo = hi;
    hi = std::min(hi * 2, cap);
    hi_recall = measure_recall(index, queries, oracle, k, hi);
  }
  // Binary search for the smallest passing ef in (lo, hi].
  while (hi - lo > 1) {
    const int mid = lo + (hi - lo) / 2;
    const double r = measure_recall(index, queries, oracle, k, mid);
    if (r >= target.target_recall) {
      hi = mid;
      hi_recall = r;
    } else {
      lo = mid;
    }
  }

  CalibrationResult result;
  result.ef_search = hi;
  result.recall = hi_recall;
  result.queries = static_cast<int>(queries.count);
  std::vector<double> latencies;
  latencies.reserve(queries.count);
  for (std::size_t i = 0; i < queries.count; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    auto hits = index.search(queries.row(i), k, hi);
    const auto t1 = std::chrono::steady_clock::now();
    if (hits.empty()) throw std::logic_error("search returned no hits");
    latencies.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  double sum = 0;
  for (double l : latencies) sum += l;
  result.mean_latency_ms = sum / latencies.size();
  std::sort(latencies.begin(), latencies.end());
  const std::size_t p99 = std::min(latencies.size() - 1, static_cast<std::size_t>(std::ceil(0.99 * latencies.size())) - 1);
  result.p99_latency_ms = latencies[p99];
  result.feasible = result.mean_latency_ms < target.latency_budget_ms;
  return result;
}

}  // namespace molex::ann
