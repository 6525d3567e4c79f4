#include <algorithm>
#include <stdexcept>

#include "molex/ann/hnsw.hpp"

namespace molex::ann {

float cosine_distance(std::span<const float> a, std::span<const float> b) {
  // Four independent partial sums let the compiler vectorize without
  // reassociating a single accumulator.
  float s0 = 0, s1 = 0, s2 = 0, s3 = 0;
  const std::size_t n = a.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return 1.0f - ((s0 + s1) + (s2 + s3));
}

std::vector<SearchHit> brute_force_search(const EmbeddingMatrix& vectors, std::span<const float> query, int k) {
  if (k < 1) throw std::invalid_argument("k must be at least 1");
  if (static_cast<int>(query.size()) != vectors.dim)
    throw std::invalid_argument("query dimension " + std::to_string(query.size()) + " does not match index dimension " +
                                std::to_string(vectors.dim));
  std::vector<SearchHit> all(vectors.count);
  for (std::size_t i = 0; i < vectors.count; ++i)
    all[i] = {static_cast<std::uint32_t>(i), cosine_distance(query, vectors.row(i))};
  const std::size_t keep = std::min<std::size_t>(k, all.size());
  std::partial_sort(all.begin(), all.begin() + keep, all.end());
  all.resize(keep);
  return all;
}

}  // namespace molex::ann
