#include "molex/chem/canonical.hpp"

#include <algorithm>
#include <numeric>
#include <tuple>

#include "molex/chem/smiles.hpp"

namespace molex::chem {
namespace {

// Refines `rank` to the coarsest equitable partition: atoms stay tied only
// while their neighbourhoods (neighbour rank, bond order) agree.
void refine(const MolGraph& mol, std::vector<int>& rank) {
  const int n = mol.atom_count();
  std::vector<int> idx(n);
  std::vector<std::vector<int>> keys(n);
  int classes = -1;
  while (true) {
    for (int i = 0; i < n; ++i) {
      auto& k = keys[i];
      k.clear();
      k.push_back(rank[i]);
      for (const auto& nb : mol.neighbors(i)) k.push_back(rank[nb.atom] * 8 + static_cast<int>(mol.bond(nb.bond).order));
      std::sort(k.begin() + 1, k.end());
    }
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return keys[a] < keys[b]; });
    int next = 0;
    for (int p = 0; p < n; ++p) {
      if (p > 0 && keys[idx[p]] != keys[idx[p - 1]]) ++next;
      rank[idx[p]] = next;
    }
    const int count = n == 0 ? 0 : next + 1;
    if (count == classes) return;
    classes = count;
  }
}

std::vector<int> initial_ranks(const MolGraph& mol) {
  const int n = mol.atom_count();
  using Key = std::tuple<int, int, int, int, int, int, int, int, int>;
  std::vector<Key> keys(n);
  for (int i = 0; i < n; ++i) {
    const Atom& a = mol.atom(i);
    keys[i] = {a.element, a.degree, a.total_h(), a.charge, a.isotope.value_or(0), a.aromatic ? 1 : 0,
               mol.atom_in_ring(i) ? 1 : 0, mol.smallest_ring(i), a.pi ? 1 : 0};
  }
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int x, int y) { return keys[x] < keys[y]; });
  std::vector<int> rank(n);
  int next = 0;
  for (int p = 0; p < n; ++p) {
    if (p > 0 && keys[idx[p]] != keys[idx[p - 1]]) ++next;
    rank[idx[p]] = next;
  }
  return rank;
}

// Individualize-and-refine search over tied classes. Leaves are discrete
// rankings; the lexicographically smallest emitted string wins. Two leaves
// with equal strings reveal an automorphism, which prunes equivalent
// branches further up.
class Search {
 public:
  explicit Search(const MolGraph& mol) : mol_(mol) {}

  void run() {
    std::vector<int> rank = initial_ranks(mol_);
    std::vector<int> path;
    descend(rank, path);
  }

  std::string best;
  std::vector<int> best_rank;

 private:
  struct Leaf {
    std::string smiles;
    std::vector<int> order;
  };
  static constexpr int kLeafBudget = 512;

  const MolGraph& mol_;
  int leaves_ = 0;
  Leaf first_;
  Leaf best_leaf_;
  std::vector<std::vector<int>> automorphisms_;

  void record_automorphism(const Leaf& a, const Leaf& b) {
    std::vector<int> g(a.order.size());
    for (std::size_t p = 0; p < a.order.size(); ++p) g[a.order[p]] = b.order[p];
    automorphisms_.push_back(std::move(g));
  }

  void leaf(const std::vector<int>& rank) {
    ++leaves_;
    Leaf l;
    l.smiles = write_smiles(mol_, rank, &l.order);
    if (leaves_ == 1) {
      first_ = l;
      best_leaf_ = l;
      best = l.smiles;
      best_rank = rank;
      return;
    }
    if (l.smiles == first_.smiles) record_automorphism(first_, l);
    else if (l.smiles == best_leaf_.smiles) record_automorphism(best_leaf_, l);
    else if (l.smiles < best) {
      best = l.smiles;
      best_rank = rank;
      best_leaf_ = std::move(l);
    }
  }

  int find(std::vector<int>& parent, int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }

  // Orbits of the group generated by the known automorphisms that fix every
  // atom on the current path.
  std::vector<int> orbits(const std::vector<int>& path) {
    const int n = mol_.atom_count();
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    for (const auto& g : automorphisms_) {
      bool fixes = std::all_of(path.begin(), path.end(), [&](int v) { return g[v] == v; });
      if (!fixes) continue;
      for (int x = 0; x < n; ++x) {
        int a = find(parent, x), b = find(parent, g[x]);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
    }
    for (int x = 0; x < n; ++x) parent[x] = find(parent, x);
    return parent;
  }

  void descend(std::vector<int>& rank, std::vector<int>& path) {
    refine(mol_, rank);
    const int n = mol_.atom_count();
    std::vector<int> size(n, 0);
    for (int r : rank) ++size[r];
    int cell = -1;
    for (int r = 0; r < n; ++r) {
      if (size[r] > 1) {
        cell = r;
        break;
      }
    }
    if (cell < 0) {
      leaf(rank);
      return;
    }
    std::vector<int> members;
    for (int i = 0; i < n; ++i)
      if (rank[i] == cell) members.push_back(i);
    std::vector<int> explored;
    for (int v : members) {
      if (!explored.empty()) {
        if (leaves_ >= kLeafBudget) break;
        auto orb = orbits(path);
        bool equivalent = std::any_of(explored.begin(), explored.end(), [&](int e) { return orb[e] == orb[v]; });
        if (equivalent) continue;
      }
      std::vector<int> child(n);
      for (int i = 0; i < n; ++i) child[i] = 2 * rank[i] + (i == v ? 0 : 1);
      path.push_back(v);
      descend(child, path);
      path.pop_back();
      explored.push_back(v);
    }
  }
};

bool carries_stereo(const MolGraph& mol) { return mol.has_stereo(); }

}  // namespace

std::vector<int> canonical_ranks(const MolGraph& mol) {
  Search s(mol);
  s.run();
  return s.best_rank;
}

CanonicalSmiles canonicalize(const MolGraph& mol) {
  if (mol.atom_count() == 0) return {"", false};
  Search s(mol);
  s.run();
  return {s.best, carries_stereo(mol)};
}

std::string canonical_smiles(std::string_view text) { return canonicalize(parse_smiles(text)).smiles; }

}  // namespace molex::chem
