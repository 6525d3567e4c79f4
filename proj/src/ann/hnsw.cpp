#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

#include "molex/ann/hnsw.hpp"

namespace molex::ann {
namespace {

// Per-thread visited marks, reset by bumping a generation counter.
class VisitedSet {
 public:
  void reset(std::size_t n) {
    if (marks_.size() < n) {
      marks_.assign(n, 0);
      generation_ = 0;
    }
    if (++generation_ == 0) {
      std::fill(marks_.begin(), marks_.end(), 0);
      generation_ = 1;
    }
  }
  bool visit(std::uint32_t id) {
    if (marks_[id] == generation_) return false;
    marks_[id] = generation_;
    return true;
  }

 private:
  std::vector<std::uint32_t> marks_;
  std::uint32_t generation_ = 0;
};

VisitedSet& visited_set() {
  thread_local VisitedSet set;
  return set;
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace

double HnswParams::lambda() const { return level_lambda > 0 ? level_lambda : 1.0 / std::log(double(m)); }

void HnswParams::validate() const {
  if (m < 2) throw std::invalid_argument("hnsw: m must be at least 2");
  if (m0 < m) throw std::invalid_argument("hnsw: m0 must be at least m");
  if (ef_construction < m) throw std::invalid_argument("hnsw: ef_construction must be at least m");
  if (ef_search < 1) throw std::invalid_argument("hnsw: ef_search must be at least 1");
}

HnswIndex HnswIndex::build(EmbeddingMatrix vectors, const HnswParams& params) {
  params.validate();
  if (vectors.count == 0) throw std::invalid_argument("hnsw: cannot build an index over an empty matrix");
  for (std::size_t i = 0; i < vectors.count; ++i) {
    double sq = 0;
    for (float x : vectors.row(i)) sq += double(x) * x;
    if (std::abs(std::sqrt(sq) - 1.0) > 1e-5)
      throw std::invalid_argument("hnsw: row " + std::to_string(i) + " is not L2-normalized");
  }
  HnswIndex index;
  index.params_ = params;
  index.vectors_ = std::move(vectors);
  index.rng_state_ = params.rng_seed;
  const std::size_t n = index.vectors_.count;
  index.levels_.resize(n);
  index.links_.resize(n);
  for (std::size_t i = 0; i < n; ++i) index.levels_[i] = index.random_level();
  for (std::size_t i = 0; i < n; ++i) index.insert(static_cast<std::uint32_t>(i));
  index.repair_layer0();
  return index;
}

int HnswIndex::random_level() {
  // U in (0, 1] from the top 53 bits.
  const double u = double((splitmix64(rng_state_) >> 11) + 1) * 0x1.0p-53;
  return static_cast<int>(std::floor(-std::log(u) * params_.lambda()));
}

std::uint32_t HnswIndex::greedy(std::span<const float> q, std::uint32_t ep, int level) const {
  Candidate best{cosine_distance(q, vectors_.row(ep)), ep};
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::uint32_t e : links_[best.id][level]) {
      const Candidate c{cosine_distance(q, vectors_.row(e)), e};
      if (c < best) {
        best = c;
        changed = true;
      }
    }
  }
  return best.id;
}

std::vector<HnswIndex::Candidate> HnswIndex::search_layer(std::span<const float> q, const std::vector<Candidate>& entry,
                                                          int ef, int level) const {
  auto& visited = visited_set();
  visited.reset(vectors_.count);
  std::priority_queue<Candidate, std::vector<Candidate>, std::greater<>> frontier;
  std::priority_queue<Candidate> results;
  for (const auto& c : entry) {
    if (!visited.visit(c.id)) continue;
    frontier.push(c);
    results.push(c);
    if (static_cast<int>(results.size()) > ef) results.pop();
  }
  while (!frontier.empty()) {
    const Candidate c = frontier.top();
    if (static_cast<int>(results.size()) >= ef && results.top() < c) break;
    frontier.pop();
    for (std::uint32_t e : links_[c.id][level]) {
      if (!visited.visit(e)) continue;
      const Candidate cand{cosine_distance(q, vectors_.row(e)), e};
      if (static_cast<int>(results.size()) < ef || cand < results.top()) {
        frontier.push(cand);
        results.push(cand);
        if (static_cast<int>(results.size()) > ef) results.pop();
      }
    }
  }
  std::vector<Candidate> out(results.size());
  for (std::size_t i = out.size(); i-- > 0;) {
    out[i] = results.top();
    results.pop();
  }
  return out;
}

// Diversity heuristic: keep a candidate only if it is closer to the base
// than to every neighbour already kept. `candidates` is sorted ascending.
std::vector<std::uint32_t> HnswIndex::select_neighbors(std::vector<Candidate> candidates, int m) const {
  std::vector<std::uint32_t> kept;
  for (const auto& c : candidates) {
    if (static_cast<int>(kept.size()) >= m) break;
    bool good = true;
    for (std::uint32_t r : kept)
      if (distance(c.id, r) < c.distance) {
        good = false;
        break;
      }
    if (good) kept.push_back(c.id);
  }
  return kept;
}

void HnswIndex::shrink(std::uint32_t node, int level) {
  auto& list = links_[node][level];
  const int cap = level == 0 ? params_.m0 : params_.m;
  if (static_cast<int>(list.size()) <= cap) return;
  std::vector<Candidate> cands;
  cands.reserve(list.size());
  for (std::uint32_t e : list) cands.push_back({distance(node, e), e});
  std::sort(cands.begin(), cands.end());
  list = select_neighbors(std::move(cands), cap);
}

void HnswIndex::insert(std::uint32_t node) {
  const int level = levels_[node];
  links_[node].resize(level + 1);
  if (max_level_ < 0) {
    entry_ = node;
    max_level_ = level;
    return;
  }
  const auto q = vectors_.row(node);
  std::uint32_t ep = entry_;
  for (int lc = max_level_; lc > level; --lc) ep = greedy(q, ep, lc);
  std::vector<Candidate> eps{{distance(node, ep), ep}};
  for (int lc = std::min(level, max_level_); lc >= 0; --lc) {
    auto found = search_layer(q, eps, params_.ef_construction, lc);
    links_[node][lc] = select_neighbors(found, params_.m);
    for (std::uint32_t e : links_[node][lc]) {
      links_[e][lc].push_back(node);
      shrink(e, lc);
    }
    eps = std::move(found);
  }
  if (level > max_level_) {
    entry_ = node;
    max_level_ = level;
  }
}

std::vector<bool> HnswIndex::reachable0() const {
  std::vector<bool> seen(vectors_.count, false);
  if (vectors_.count == 0) return seen;
  std::vector<std::uint32_t> stack{entry_};
  seen[entry_] = true;
  while (!stack.empty()) {
    const std::uint32_t v = stack.back();
    stack.pop_back();
    for (std::uint32_t e : links_[v][0])
      if (!seen[e]) {
        seen[e] = true;
        stack.push_back(e);
      }
  }
  return seen;
}

bool HnswIndex::layer0_connected() const {
  const auto seen = reachable0();
  return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
}

// Makes layer 0 undirected (a reverse link is added when the target has
// room, otherwise the forward link is dropped), then joins any component
// that became unreachable to its nearest reachable node with spare degree.
void HnswIndex::repair_layer0() {
  const std::size_t n = vectors_.count;
  auto contains = [](const std::vector<std::uint32_t>& list, std::uint32_t x) {
    return std::find(list.begin(), list.end(), x) != list.end();
  };
  std::vector<std::pair<std::uint32_t, std::uint32_t>> one_way;
  for (std::uint32_t a = 0; a < n; ++a)
    for (std::uint32_t b : links_[a][0])
      if (!contains(links_[b][0], a)) one_way.emplace_back(a, b);
  for (auto [a, b] : one_way) {
    auto& back = links_[b][0];
    if (contains(back, a) || !contains(links_[a][0], b)) continue;
    if (static_cast<int>(back.size()) < params_.m0) {
      back.push_back(a);
    } else {
      auto& fwd = links_[a][0];
      fwd.erase(std::find(fwd.begin(), fwd.end(), b));
    }
  }

  while (true) {
    const auto seen = reachable0();
    const auto it = std::find(seen.begin(), seen.end(), false);
    if (it == seen.end()) break;
    const auto u = static_cast<std::uint32_t>(it - seen.begin());
    Candidate best{0, 0};
    bool found = false;
    for (std::uint32_t r = 0; r < n; ++r) {
      if (!seen[r] || static_cast<int>(links_[r][0].size()) >= params_.m0) continue;
      const Candidate c{distance(u, r), r};
      if (!found || c < best) {
        best = c;
        found = true;
      }
    }
    if (!found) throw std::runtime_error("hnsw: layer 0 cannot be connected within degree m0");
    auto& ul = links_[u][0];
    if (static_cast<int>(ul.size()) >= params_.m0) {
      auto far = std::max_element(ul.begin(), ul.end(), [&](std::uint32_t x, std::uint32_t y) {
        return Candidate{distance(u, x), x} < Candidate{distance(u, y), y};
      });
      auto& wl = links_[*far][0];
      wl.erase(std::find(wl.begin(), wl.end(), u));
      ul.erase(far);
    }
    ul.push_back(best.id);
    links_[best.id][0].push_back(u);
  }
}

std::vector<SearchHit> HnswIndex::search(std::span<const float> query, int k, int ef) const {
  if (k < 1) throw std::invalid_argument("k must be at least 1");
  if (static_cast<int>(query.size()) != vectors_.dim)
    throw std::invalid_argument("query dimension " + std::to_string(query.size()) + " does not match index dimension " +
                                std::to_string(vectors_.dim));
  if (vectors_.count == 0) return {};
  ef = std::max(ef, k);
  std::uint32_t ep = entry_;
  for (int lc = max_level_; lc > 0; --lc) ep = greedy(query, ep, lc);
  const auto found = search_layer(query, {{cosine_distance(query, vectors_.row(ep)), ep}}, ef, 0);
  std::vector<SearchHit> hits;
  const std::size_t keep = std::min<std::size_t>(k, found.size());
  hits.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) hits.push_back({found[i].id, found[i].distance});
  return hits;
}

}  // namespace molex::ann
