#include "oracles.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numbers>

namespace molex::oracle {

std::vector<long double> dct_direct(const std::vector<double>& v, int k) {
  const long double n = static_cast<long double>(v.size());
  const long double pi = std::numbers::pi_v<long double>;
  std::vector<long double> out(k);
  for (int j = 0; j < k; ++j) {
    long double sum = 0;
    for (std::size_t i = 0; i < v.size(); ++i) sum += v[i] * std::cos(pi * (2.0L * i + 1.0L) * j / (2.0L * n));
    out[j] = sum * (j == 0 ? std::sqrt(1.0L / n) : std::sqrt(2.0L / n));
  }
  return out;
}

namespace {

struct Small {
  int n = 0;
  std::vector<int> element;
  std::vector<bool> aromatic;
  std::vector<std::vector<int>> order;  // 0 = no bond
};

Small heavy_graph(const chem::MolGraph& m) {
  Small g;
  std::vector<int> index(m.atom_count(), -1);
  for (int i = 0; i < m.atom_count(); ++i) {
    if (m.atom(i).element == 1) continue;
    index[i] = g.n++;
    g.element.push_back(m.atom(i).element);
    g.aromatic.push_back(m.atom(i).aromatic);
  }
  g.order.assign(g.n, std::vector<int>(g.n, 0));
  for (const auto& b : m.bonds()) {
    if (index[b.a] < 0 || index[b.b] < 0) continue;
    g.order[index[b.a]][index[b.b]] = g.order[index[b.b]][index[b.a]] = static_cast<int>(b.order);
  }
  return g;
}

bool connected(const Small& g, unsigned mask) {
  if (mask == 0) return false;
  const unsigned start = mask & -mask;
  unsigned seen = start, frontier = start;
  while (frontier) {
    unsigned next = 0;
    for (int i = 0; i < g.n; ++i)
      if (frontier >> i & 1)
        for (int j = 0; j < g.n; ++j)
          if ((mask >> j & 1) && !(seen >> j & 1) && g.order[i][j]) next |= 1u << j;
    seen |= next;
    frontier = next;
  }
  return seen == mask;
}

// Is the induced subgraph of `a` on `atoms` isomorphic to an induced
// subgraph of `b`? Plain backtracking over injective assignments.
bool embeds(const Small& a, const std::vector<int>& atoms, const Small& b, std::vector<int>& image, std::vector<bool>& used,
            std::size_t depth) {
  if (depth == atoms.size()) return true;
  const int u = atoms[depth];
  for (int v = 0; v < b.n; ++v) {
    if (used[v] || a.element[u] != b.element[v] || a.aromatic[u] != b.aromatic[v]) continue;
    bool ok = true;
    for (std::size_t d = 0; d < depth && ok; ++d) ok = a.order[u][atoms[d]] == b.order[v][image[d]];
    if (!ok) continue;
    used[v] = true;
    image[depth] = v;
    if (embeds(a, atoms, b, image, used, depth + 1)) return true;
    used[v] = false;
  }
  return false;
}

}  // namespace

int mcs_exhaustive(const chem::MolGraph& ma, const chem::MolGraph& mb) {
  const Small a = heavy_graph(ma), b = heavy_graph(mb);
  std::vector<std::vector<unsigned>> by_size(a.n + 1);
  for (unsigned mask = 1; mask < (1u << a.n); ++mask)
    if (connected(a, mask)) by_size[std::popcount(mask)].push_back(mask);
  for (int size = std::min(a.n, b.n); size >= 1; --size) {
    for (unsigned mask : by_size[size]) {
      std::vector<int> atoms;
      for (int i = 0; i < a.n; ++i)
        if (mask >> i & 1) atoms.push_back(i);
      std::vector<int> image(atoms.size());
      std::vector<bool> used(b.n, false);
      if (embeds(a, atoms, b, image, used, 0)) return size;
    }
  }
  return 0;
}

std::vector<Neighbor> knn_exhaustive(const std::vector<std::vector<double>>& rows, const std::vector<double>& query,
                                     int k) {
  std::vector<Neighbor> all;
  all.reserve(rows.size());
  double qq = 0;
  for (double x : query) qq += x * x;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    double dot = 0, rr = 0;
    for (std::size_t d = 0; d < query.size(); ++d) {
      dot += rows[i][d] * query[d];
      rr += rows[i][d] * rows[i][d];
    }
    all.push_back({1.0 - dot / std::sqrt(qq * rr), i});
  }
  std::sort(all.begin(), all.end(), [](const Neighbor& x, const Neighbor& y) {
    return x.distance < y.distance || (x.distance == y.distance && x.index < y.index);
  });
  all.resize(std::min<std::size_t>(k, all.size()));
  return all;
}

std::string vote(const std::vector<Neighbor>& neighbors, const std::vector<std::string>& labels) {
  std::map<std::string, std::pair<int, double>> tally;
  for (const auto& n : neighbors) {
    auto& t = tally[labels[n.index]];
    ++t.first;
    t.second += n.distance;
  }
  std::string best;
  std::pair<int, double> score{-1, 0};
  for (const auto& [label, t] : tally)
    if (t.first > score.first || (t.first == score.first && t.second < score.second)) {
      best = label;
      score = t;
    }
  return best;
}

}  // namespace molex::oracle
