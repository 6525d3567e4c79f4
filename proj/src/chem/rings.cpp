#include <algorithm>
#include <cstdint>
#include <deque>
#include <numeric>
#include <tuple>
#include <vector>

#include "molex/chem/mol_graph.hpp"

namespace molex::chem {
namespace {

struct Adjacency {
  std::vector<std::vector<std::pair<int, int>>> nbrs;  // (atom, bond)
};

struct Candidate {
  int length;
  int root;
  int bond;
  std::vector<int> atoms;  // cyclic order
};

using EdgeSet = std::vector<std::uint64_t>;

}  // namespace

// Horton candidate cycles reduced over GF(2) in order of increasing length.
std::vector<std::vector<int>> smallest_set_of_smallest_rings(int atom_count,
                                                             std::span<const Bond> bonds) {
  const int n = atom_count;
  const int m = static_cast<int>(bonds.size());
  Adjacency adj;
  adj.nbrs.resize(static_cast<std::size_t>(n));
  for (int b = 0; b < m; ++b) {
    adj.nbrs[bonds[b].a].push_back({bonds[b].b, b});
    adj.nbrs[bonds[b].b].push_back({bonds[b].a, b});
  }

  // Strip acyclic atoms so only ring systems are searched.
  std::vector<int> deg(n);
  std::vector<bool> core(n, true);
  std::deque<int> leaves;
  for (int i = 0; i < n; ++i) {
    deg[i] = static_cast<int>(adj.nbrs[i].size());
    if (deg[i] <= 1) leaves.push_back(i);
  }
  while (!leaves.empty()) {
    int v = leaves.front();
    leaves.pop_front();
    if (!core[v]) continue;
    core[v] = false;
    for (auto [w, b] : adj.nbrs[v]) {
      if (core[w] && --deg[w] <= 1) leaves.push_back(w);
    }
  }

  // Cyclomatic number of the core.
  int core_atoms = 0, core_bonds = 0;
  for (int i = 0; i < n; ++i) core_atoms += core[i];
  for (int b = 0; b < m; ++b) core_bonds += (core[bonds[b].a] && core[bonds[b].b]);
  std::vector<int> comp(n, -1);
  int components = 0;
  for (int i = 0; i < n; ++i) {
    if (!core[i] || comp[i] >= 0) continue;
    std::vector<int> stack{i};
    comp[i] = components;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (auto [w, b] : adj.nbrs[v]) {
        if (core[w] && comp[w] < 0) {
          comp[w] = components;
          stack.push_back(w);
        }
      }
    }
    ++components;
  }
  const int cyclomatic = core_bonds - core_atoms + components;
  if (cyclomatic <= 0) return {};

  std::vector<Candidate> candidates;
  std::vector<int> dist(n), parent(n), parent_bond(n), branch(n);
  for (int root = 0; root < n; ++root) {
    if (!core[root]) continue;
    std::fill(dist.begin(), dist.end(), -1);
    dist[root] = 0;
    parent[root] = -1;
    branch[root] = -1;
    std::deque<int> queue{root};
    std::vector<int> order;
    while (!queue.empty()) {
      int v = queue.front();
      queue.pop_front();
      order.push_back(v);
      for (auto [w, b] : adj.nbrs[v]) {
        if (!core[w] || dist[w] >= 0) continue;
        dist[w] = dist[v] + 1;
        parent[w] = v;
        parent_bond[w] = b;
        branch[w] = (v == root) ? w : branch[v];
        queue.push_back(w);
      }
    }
    for (int b = 0; b < m; ++b) {
      int x = bonds[b].a, y = bonds[b].b;
      if (!core[x] || !core[y] || dist[x] < 0 || dist[y] < 0) continue;
      if (parent_bond[x] == b && parent[x] == y) continue;
      if (parent_bond[y] == b && parent[y] == x) continue;
      if (x == root || y == root) {
        // Edge incident to the root closes a cycle only through another branch.
        int other = (x == root) ? y : x;
        if (parent[other] == root && parent_bond[other] == b) continue;
      } else if (branch[x] == branch[y]) {
        continue;  // paths share more than the root
      }
      if (std::abs(dist[x] - dist[y]) > 1) continue;
      std::vector<int> path_x, path_y;
      for (int v = x; v != -1; v = parent[v]) path_x.push_back(v);
      for (int v = y; v != -1; v = parent[v]) path_y.push_back(v);
      // cycle: root ... x, y ... (back to root)
      std::vector<int> cycle(path_x.rbegin(), path_x.rend());
      for (std::size_t i = 0; i + 1 < path_y.size(); ++i) cycle.push_back(path_y[i]);
      candidates.push_back({static_cast<int>(cycle.size()), root, b, std::move(cycle)});
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& l, const Candidate& r) {
    return std::tie(l.length, l.root, l.bond) < std::tie(r.length, r.root, r.bond);
  });

  const std::size_t words = (static_cast<std::size_t>(m) + 63) / 64;
  std::vector<EdgeSet> basis;     // reduced rows
  std::vector<int> pivots;        // pivot bit per row
  std::vector<std::vector<int>> rings;
  auto bond_index = [&](int a, int b) {
    for (auto [w, bond] : adj.nbrs[a])
      if (w == b) return bond;
    return -1;
  };
  for (auto& cand : candidates) {
    if (static_cast<int>(rings.size()) == cyclomatic) break;
    EdgeSet row(words, 0);
    const std::size_t len = cand.atoms.size();
    for (std::size_t i = 0; i < len; ++i) {
      int b = bond_index(cand.atoms[i], cand.atoms[(i + 1) % len]);
      row[static_cast<std::size_t>(b) / 64] ^= (std::uint64_t{1} << (b % 64));
    }
    for (std::size_t r = 0; r < basis.size(); ++r) {
      int p = pivots[r];
      if (row[static_cast<std::size_t>(p) / 64] >> (p % 64) & 1) {
        for (std::size_t w = 0; w < words; ++w) row[w] ^= basis[r][w];
      }
    }
    int pivot = -1;
    for (std::size_t w = 0; w < words && pivot < 0; ++w) {
      if (row[w]) pivot = static_cast<int>(w * 64) + __builtin_ctzll(row[w]);
    }
    if (pivot < 0) continue;
    // Keep rows reduced with respect to the new pivot.
    for (std::size_t r = 0; r < basis.size(); ++r) {
      if (basis[r][static_cast<std::size_t>(pivot) / 64] >> (pivot % 64) & 1) {
        for (std::size_t w = 0; w < words; ++w) basis[r][w] ^= row[w];
      }
    }
    basis.push_back(std::move(row));
    pivots.push_back(pivot);
    rings.push_back(std::move(cand.atoms));
  }
  return rings;
}

}  // namespace molex::chem
