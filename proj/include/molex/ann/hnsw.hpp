#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "molex/embed/embedding.hpp"

namespace molex::ann {

using embed::EmbeddingMatrix;

struct HnswParams {
  int m = 16;
  int m0 = 32;
  int ef_construction = 200;
  int ef_search = 64;
  double level_lambda = 0;  // 0 selects 1/ln(m)
  std::uint64_t rng_seed = 42;

  double lambda() const;
  void validate() const;
};

struct SearchHit {
  std::uint32_t id;
  float distance;

  bool operator<(const SearchHit& o) const { return distance < o.distance || (distance == o.distance && id < o.id); }
  bool operator==(const SearchHit& o) const = default;
};

/// 1 - dot(a, b). Both the graph search and the exact search use this exact
/// function so their results compare bit for bit.
float cosine_distance(std::span<const float> a, std::span<const float> b);

/// Exact top-k by cosine distance, ties to the lower id.
std::vector<SearchHit> brute_force_search(const EmbeddingMatrix& vectors, std::span<const float> query, int k);

class HnswIndex {
 public:
  HnswIndex() = default;

  /// Inserts every row in row order and freezes the index. Rows must be
  /// L2-normalized.
  static HnswIndex build(EmbeddingMatrix vectors, const HnswParams& params);

  /// Top min(k, size()) hits, ascending by distance then id. `ef` below k is
  /// raised to k.
  std::vector<SearchHit> search(std::span<const float> query, int k, int ef) const;
  std::vector<SearchHit> search(std::span<const float> query, int k) const { return search(query, k, params_.ef_search); }

  std::size_t size() const { return vectors_.count; }
  int dim() const { return vectors_.dim; }
  const EmbeddingMatrix& vectors() const { return vectors_; }
  const HnswParams& params() const { return params_; }
  void set_ef_search(int ef) { params_.ef_search = ef; }

  std::uint32_t entry_point() const { return entry_; }
  int max_level() const { return max_level_; }
  int level(std::uint32_t node) const { return levels_[node]; }
  const std::vector<std::uint32_t>& neighbors(std::uint32_t node, int level) const { return links_[node][level]; }

  /// Every node reachable from the entry point through layer-0 links.
  bool layer0_connected() const;

 private:
  friend class IndexReader;

  struct Candidate {
    float distance;
    std::uint32_t id;
    bool operator<(const Candidate& o) const { return distance < o.distance || (distance == o.distance && id < o.id); }
    bool operator>(const Candidate& o) const { return o < *this; }
  };

  float distance(std::uint32_t a, std::uint32_t b) const { return cosine_distance(vectors_.row(a), vectors_.row(b)); }
  int random_level();
  void insert(std::uint32_t node);
  std::uint32_t greedy(std::span<const float> q, std::uint32_t ep, int level) const;
  std::vector<Candidate> search_layer(std::span<const float> q, const std::vector<Candidate>& entry, int ef,
                                      int level) const;
  std::vector<std::uint32_t> select_neighbors(std::vector<Candidate> candidates, int m) const;
  void shrink(std::uint32_t node, int level);
  void repair_layer0();
  std::vector<bool> reachable0() const;

  HnswParams params_;
  EmbeddingMatrix vectors_;
  std::vector<int> levels_;
  std::vector<std::vector<std::vector<std::uint32_t>>> links_;
  std::uint32_t entry_ = 0;
  int max_level_ = -1;
  std::uint64_t rng_state_ = 0;
};

}  // namespace molex::ann
