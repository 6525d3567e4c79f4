#include "molex/chem/mol_graph.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <numeric>
#include <set>

#include "molex/chem/elements.hpp"

namespace molex::chem {
namespace {

int bond_order_value(BondOrder order) {
  switch (order) {
    case BondOrder::Single: return 1;
    case BondOrder::Double: return 2;
    case BondOrder::Triple: return 3;
    case BondOrder::Aromatic: return 1;
  }
  return 1;
}

// Shortest cycle length through every atom (0 if none), via BFS around each
// incident bond.
std::vector<int> shortest_cycles(int n, std::span<const Bond> bonds,
                                 const std::vector<std::vector<Neighbor>>& nbrs,
                                 const std::vector<bool>& bond_in_ring) {
  std::vector<int> best(static_cast<std::size_t>(n), 0);
  std::vector<int> dist(static_cast<std::size_t>(n));
  for (std::size_t b = 0; b < bonds.size(); ++b) {
    if (!bond_in_ring[b]) continue;
    const int src = bonds[b].a, dst = bonds[b].b;
    std::fill(dist.begin(), dist.end(), -1);
    dist[src] = 0;
    std::deque<int> queue{src};
    while (!queue.empty() && dist[dst] < 0) {
      int v = queue.front();
      queue.pop_front();
      for (const auto& nb : nbrs[v]) {
        if (nb.bond == static_cast<int>(b) || dist[nb.atom] >= 0) continue;
        dist[nb.atom] = dist[v] + 1;
        queue.push_back(nb.atom);
      }
    }
    if (dist[dst] < 0) continue;
    const int len = dist[dst] + 1;
    for (int end : {src, dst}) {
      if (best[end] == 0 || len < best[end]) best[end] = len;
    }
  }
  return best;
}

}  // namespace

class GraphBuilder {
 public:
  GraphBuilder(std::vector<Atom> atoms, std::vector<Bond> bonds, std::string source,
               std::span<const int> offsets)
      : offsets_(offsets.begin(), offsets.end()) {
    mol_.atoms_ = std::move(atoms);
    mol_.bonds_ = std::move(bonds);
    mol_.source_ = std::move(source);
    offsets_.resize(mol_.atoms_.size(), -1);
  }

  MolGraph run() {
    check_bonds();
    fold_hydrogens();
    mol_.index_adjacency();
    perceive_rings();
    check_aromatic_flags();
    perceive_benzenoid();
    resolve_valence();
    check_kekule();
    mol_.has_stereo_ = std::any_of(mol_.atoms_.begin(), mol_.atoms_.end(),
                                   [](const Atom& a) { return a.chirality != Chirality::None; }) ||
                       std::any_of(mol_.bonds_.begin(), mol_.bonds_.end(),
                                   [](const Bond& b) { return b.stereo != BondStereo::None; });
    return std::move(mol_);
  }

 private:
  MolGraph mol_;
  std::vector<int> offsets_;

  int offset_of(int atom) const { return atom >= 0 && atom < static_cast<int>(offsets_.size()) ? offsets_[atom] : -1; }

  void check_bonds() {
    const int n = static_cast<int>(mol_.atoms_.size());
    std::set<std::pair<int, int>> seen;
    for (const auto& b : mol_.bonds_) {
      if (b.a < 0 || b.b < 0 || b.a >= n || b.b >= n) throw SmilesError("bond references a missing atom", -1);
      if (b.a == b.b) throw SmilesError("atom bonded to itself", offset_of(b.a));
      auto key = std::minmax(b.a, b.b);
      if (!seen.insert(key).second) throw SmilesError("duplicate bond between atoms", offset_of(b.b));
    }
  }

  // Plain [H] atoms attached to a heavy atom become hydrogen counts.
  void fold_hydrogens() {
    auto& atoms = mol_.atoms_;
    const int n = static_cast<int>(atoms.size());
    std::vector<int> deg(n, 0);
    for (const auto& b : mol_.bonds_) {
      ++deg[b.a];
      ++deg[b.b];
    }
    std::vector<bool> drop(n, false);
    for (const auto& b : mol_.bonds_) {
      for (int side = 0; side < 2; ++side) {
        int h = side ? b.b : b.a;
        int heavy = side ? b.a : b.b;
        const Atom& ha = atoms[h];
        if (ha.element != kHydrogen || ha.isotope || ha.charge != 0 || ha.explicit_h.value_or(0) != 0 ||
            deg[h] != 1 || atoms[heavy].element == kHydrogen || b.order != BondOrder::Single ||
            ha.chirality != Chirality::None)
          continue;
        drop[h] = true;
      }
    }
    if (std::none_of(drop.begin(), drop.end(), [](bool d) { return d; })) return;
    std::vector<int> remap(n, -1);
    std::vector<Atom> kept;
    std::vector<int> kept_offsets;
    for (int i = 0; i < n; ++i) {
      if (drop[i]) continue;
      remap[i] = static_cast<int>(kept.size());
      kept.push_back(atoms[i]);
      kept_offsets.push_back(offsets_[i]);
    }
    std::vector<Bond> bonds;
    for (const auto& b : mol_.bonds_) {
      if (drop[b.a] || drop[b.b]) {
        int heavy = drop[b.a] ? b.b : b.a;
        Atom& target = kept[remap[heavy]];
        target.explicit_h = target.explicit_h.value_or(0) + 1;
        continue;
      }
      Bond nb = b;
      nb.a = remap[b.a];
      nb.b = remap[b.b];
      bonds.push_back(nb);
    }
    mol_.atoms_ = std::move(kept);
    mol_.bonds_ = std::move(bonds);
    offsets_ = std::move(kept_offsets);
  }

  void perceive_rings() {
    const int n = mol_.atom_count();
    mol_.rings_ = smallest_set_of_smallest_rings(n, mol_.bonds_);
    mol_.ring_count_.assign(n, 0);
    mol_.bond_in_ring_.assign(mol_.bonds_.size(), false);
    for (const auto& ring : mol_.rings_) {
      for (std::size_t i = 0; i < ring.size(); ++i) {
        ++mol_.ring_count_[ring[i]];
        int b = mol_.bond_between(ring[i], ring[(i + 1) % ring.size()]);
        mol_.bond_in_ring_[b] = true;
      }
    }
    std::vector<std::vector<Neighbor>> nbrs(n);
    for (int i = 0; i < n; ++i) {
      auto span = mol_.neighbors(i);
      nbrs[i].assign(span.begin(), span.end());
    }
    mol_.smallest_ring_ = shortest_cycles(n, mol_.bonds_, nbrs, mol_.bond_in_ring_);
  }

  void check_aromatic_flags() {
    for (std::size_t b = 0; b < mol_.bonds_.size(); ++b) {
      auto& bond = mol_.bonds_[b];
      if (bond.order == BondOrder::Aromatic && !mol_.bond_in_ring_[b]) bond.order = BondOrder::Single;
    }
    for (int i = 0; i < mol_.atom_count(); ++i) {
      if (mol_.atoms_[i].aromatic && !mol_.atom_in_ring(i))
        throw SmilesError("non-ring atom marked aromatic", offset_of(i));
    }
  }

  // Kekule six-membered C/N rings with alternating double bonds become
  // aromatic. Rings fused to already aromatic rings may borrow their double
  // bonds; iterate to a fixed point.
  void perceive_benzenoid() {
    auto& atoms = mol_.atoms_;
    auto& bonds = mol_.bonds_;
    std::vector<bool> ring_done(mol_.rings_.size(), false);
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t r = 0; r < mol_.rings_.size(); ++r) {
        const auto& ring = mol_.rings_[r];
        if (ring_done[r] || ring.size() != 6) continue;
        bool ok = true;
        bool all_aromatic = true;
        for (std::size_t i = 0; i < 6 && ok; ++i) {
          const int a = ring[i];
          const Atom& atom = atoms[a];
          if (!atom.aromatic) all_aromatic = false;
          if (atom.element != kCarbon && atom.element != kNitrogen) ok = false;
          if (atom.element == kCarbon && atom.charge != 0) ok = false;
          if (atom.element == kNitrogen && atom.charge != 0 && atom.charge != 1) ok = false;
          const int prev = ring[(i + 5) % 6], next = ring[(i + 1) % 6];
          int ring_double = 0, other_double = 0;
          bool borrowed = false;
          for (const auto& nb : mol_.neighbors(a)) {
            const Bond& bond = bonds[nb.bond];
            if (bond.order == BondOrder::Triple) ok = false;
            if (bond.order == BondOrder::Double) {
              if (nb.atom == prev || nb.atom == next) ++ring_double;
              else ++other_double;
            }
            if (bond.order == BondOrder::Aromatic && nb.atom != prev && nb.atom != next) borrowed = true;
          }
          if (atom.aromatic) continue;  // already part of an aromatic system
          if (ring_double == 1 && other_double == 0) continue;
          if (ring_double == 0 && other_double == 0 && borrowed) continue;
          ok = false;
        }
        if (!ok || all_aromatic) {
          if (all_aromatic) ring_done[r] = true;
          continue;
        }
        // Every non-aromatic ring atom must own exactly one ring double bond
        // or lean on an adjacent aromatic system.
        int doubles = 0;
        for (std::size_t i = 0; i < 6; ++i) {
          int b = mol_.bond_between(ring[i], ring[(i + 1) % 6]);
          if (bonds[b].order == BondOrder::Double) ++doubles;
        }
        if (doubles == 0) continue;
        for (std::size_t i = 0; i < 6; ++i) {
          atoms[ring[i]].aromatic = true;
          int b = mol_.bond_between(ring[i], ring[(i + 1) % 6]);
          bonds[b].order = BondOrder::Aromatic;
        }
        ring_done[r] = true;
        changed = true;
      }
    }
  }

  void resolve_valence() {
    auto& atoms = mol_.atoms_;
    for (int i = 0; i < mol_.atom_count(); ++i) {
      Atom& atom = atoms[i];
      int sum = 0;
      int aromatic_bonds = 0;
      for (const auto& nb : mol_.neighbors(i)) {
        const Bond& bond = mol_.bonds_[nb.bond];
        sum += bond_order_value(bond.order);
        if (bond.order == BondOrder::Aromatic) ++aromatic_bonds;
      }
      atom.degree = static_cast<int>(mol_.neighbors(i).size());
      const int hs = atom.explicit_h.value_or(0);
      auto valences = allowed_valences(atom.element, atom.charge);
      atom.pi = false;
      atom.implicit_h = 0;
      if (atom.aromatic && aromatic_bonds == 0 && atom.element != 0) {
        throw SmilesError("aromatic atom without aromatic bonds", offset_of(i));
      }
      if (valences.empty()) continue;  // unconstrained element
      const int used = sum + hs;
      int target = -1;
      for (int v : valences) {
        if (v >= used) {
          target = v;
          break;
        }
      }
      if (!atom.bracket) {
        if (target < 0) throw SmilesError("valence violation", offset_of(i));
        int free = target - used;
        if (atom.aromatic && free >= 1) {
          atom.pi = true;
          --free;
        }
        atom.implicit_h = free;
      } else {
        if (target < 0) throw SmilesError("valence violation", offset_of(i));
        if (atom.aromatic && target - used >= 1) atom.pi = true;
      }
    }
  }

  // Aromatic atoms needing a double bond must admit a perfect matching over
  // aromatic bonds.
  void check_kekule() {
    const int n = mol_.atom_count();
    std::vector<std::vector<int>> g(n);
    int needing = 0;
    for (int i = 0; i < n; ++i) {
      if (!mol_.atoms_[i].pi) continue;
      ++needing;
      for (const auto& nb : mol_.neighbors(i)) {
        if (mol_.bonds_[nb.bond].order == BondOrder::Aromatic && mol_.atoms_[nb.atom].pi) g[i].push_back(nb.atom);
      }
    }
    if (needing == 0) return;
    std::vector<int> mate(n, -1);
    long budget = 200000;
    std::function<bool()> solve = [&]() -> bool {
      if (--budget < 0) return true;  // give up checking, accept
      int pick = -1, options = 1 << 30;
      for (int i = 0; i < n; ++i) {
        if (!mol_.atoms_[i].pi || mate[i] >= 0) continue;
        int c = 0;
        for (int j : g[i]) c += (mate[j] < 0);
        if (c < options) {
          options = c;
          pick = i;
        }
      }
      if (pick < 0) return true;
      if (options == 0) return false;
      for (int j : g[pick]) {
        if (mate[j] >= 0) continue;
        mate[pick] = j;
        mate[j] = pick;
        if (solve()) return true;
        mate[pick] = mate[j] = -1;
      }
      return false;
    };
    if (!solve()) {
      int first = 0;
      for (int i = 0; i < n; ++i) {
        if (mol_.atoms_[i].pi) {
          first = i;
          break;
        }
      }
      throw SmilesError("cannot kekulize aromatic system", offset_of(first));
    }
  }
};

MolGraph MolGraph::build(std::vector<Atom> atoms, std::vector<Bond> bonds, std::string source,
                         std::span<const int> atom_offsets) {
  return GraphBuilder(std::move(atoms), std::move(bonds), std::move(source), atom_offsets).run();
}

void MolGraph::index_adjacency() {
  const int n = atom_count();
  std::vector<int> counts(n + 1, 0);
  for (const auto& b : bonds_) {
    ++counts[b.a + 1];
    ++counts[b.b + 1];
  }
  std::partial_sum(counts.begin(), counts.end(), counts.begin());
  adj_start_ = counts;
  adjacency_.assign(bonds_.size() * 2, Neighbor{0, 0});
  std::vector<int> fill(counts.begin(), counts.end() - 1);
  for (int bi = 0; bi < bond_count(); ++bi) {
    const auto& b = bonds_[bi];
    adjacency_[fill[b.a]++] = {b.b, bi};
    adjacency_[fill[b.b]++] = {b.a, bi};
  }
}

int MolGraph::bond_between(int a, int b) const {
  for (const auto& nb : neighbors(a))
    if (nb.atom == b) return nb.bond;
  return -1;
}

int MolGraph::heavy_atom_count() const {
  return static_cast<int>(std::count_if(atoms_.begin(), atoms_.end(),
                                        [](const Atom& a) { return a.element != kHydrogen; }));
}

int MolGraph::valence(int atom) const {
  const Atom& a = atoms_[atom];
  int sum = 0;
  for (const auto& nb : neighbors(atom)) sum += bond_order_value(bonds_[nb.bond].order);
  return sum + (a.pi ? 1 : 0) + a.total_h();
}

int MolGraph::fragment_count() const {
  const int n = atom_count();
  std::vector<bool> seen(n, false);
  int count = 0;
  for (int i = 0; i < n; ++i) {
    if (seen[i]) continue;
    ++count;
    std::vector<int> stack{i};
    seen[i] = true;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (const auto& nb : neighbors(v)) {
        if (!seen[nb.atom]) {
          seen[nb.atom] = true;
          stack.push_back(nb.atom);
        }
      }
    }
  }
  return count;
}

MolGraph permute_atoms(const MolGraph& mol, std::span<const int> new_index) {
  const int n = mol.atom_count();
  std::vector<Atom> atoms(n);
  for (int i = 0; i < n; ++i) atoms[new_index[i]] = mol.atom(i);
  std::vector<Bond> bonds;
  bonds.reserve(mol.bonds().size());
  for (const auto& b : mol.bonds()) {
    Bond nb = b;
    nb.a = new_index[b.a];
    nb.b = new_index[b.b];
    if (nb.a > nb.b) std::swap(nb.a, nb.b);
    bonds.push_back(nb);
  }
  std::sort(bonds.begin(), bonds.end(), [](const Bond& l, const Bond& r) {
    return std::pair(l.a, l.b) < std::pair(r.a, r.b);
  });
  return MolGraph::build(std::move(atoms), std::move(bonds), mol.source());
}

}  // namespace molex::chem
