#include "molex/chem/mcs.hpp"

#include <algorithm>
#include <chrono>
#include <map>

namespace molex::chem {
namespace {

using Clock = std::chrono::steady_clock;

int label(const Atom& a) { return a.element * 2 + (a.aromatic ? 1 : 0); }

class McsSearch {
 public:
  McsSearch(const MolGraph& a, const MolGraph& b, int budget_ms)
      : a_(a), b_(b), deadline_(Clock::now() + std::chrono::milliseconds(budget_ms)) {
    const int na = a.atom_count(), nb = b.atom_count();
    bond_a_.assign(static_cast<std::size_t>(na) * na, -1);
    bond_b_.assign(static_cast<std::size_t>(nb) * nb, -1);
    for (const auto& bd : a.bonds()) bond_a_[bd.a * na + bd.b] = bond_a_[bd.b * na + bd.a] = static_cast<int>(bd.order);
    for (const auto& bd : b.bonds()) bond_b_[bd.a * nb + bd.b] = bond_b_[bd.b * nb + bd.a] = static_cast<int>(bd.order);
    map_a_.assign(na, -1);
    map_b_.assign(nb, -1);
    state_a_.assign(na, kFree);
  }

  McsResult run() {
    const int na = a_.atom_count(), nb = b_.atom_count();
    // Greedy start: the first compatible pair.
    for (int i = 0; i < na && best_.empty(); ++i)
      for (int j = 0; j < nb && best_.empty(); ++j)
        if (compatible(i, j)) {
          best_ = {{i, j}};
          best_bonds_ = 0;
        }
    for (int seed = 0; seed < na && !expired_; ++seed) {
      // Mappings whose lowest a-atom is `seed`; lower atoms are forbidden.
      for (int i = 0; i < na; ++i) state_a_[i] = i < seed ? kForbidden : kFree;
      for (int j = 0; j < nb && !expired_; ++j) {
        if (!compatible(seed, j)) continue;
        assign(seed, j);
        extend();
        unassign(seed, j);
      }
    }
    McsResult r;
    std::sort(best_.begin(), best_.end());
    r.mapping = best_;
    r.size_atoms = static_cast<int>(best_.size());
    r.size_bonds = best_bonds_;
    r.optimal = !expired_;
    return r;
  }

 private:
  enum : signed char { kFree, kMapped, kExcluded, kForbidden };

  const MolGraph& a_;
  const MolGraph& b_;
  Clock::time_point deadline_;
  std::vector<int> bond_a_, bond_b_;
  std::vector<int> map_a_, map_b_;
  std::vector<signed char> state_a_;
  std::vector<std::pair<int, int>> current_;
  int current_bonds_ = 0;
  std::vector<std::pair<int, int>> best_;
  int best_bonds_ = -1;
  long nodes_ = 0;
  bool expired_ = false;

  bool compatible(int i, int j) const { return label(a_.atom(i)) == label(b_.atom(j)); }
  int bond_a(int x, int y) const { return bond_a_[x * a_.atom_count() + y]; }
  int bond_b(int x, int y) const { return bond_b_[x * b_.atom_count() + y]; }

  void assign(int i, int j) {
    int added = 0;
    for (const auto& [x, y] : current_)
      if (bond_a(i, x) >= 0) ++added;
    current_.emplace_back(i, j);
    current_bonds_ += added;
    map_a_[i] = j;
    map_b_[j] = i;
    state_a_[i] = kMapped;
  }

  void unassign(int i, int j) {
    current_.pop_back();
    int removed = 0;
    for (const auto& [x, y] : current_)
      if (bond_a(i, x) >= 0) ++removed;
    current_bonds_ -= removed;
    map_a_[i] = -1;
    map_b_[j] = -1;
    state_a_[i] = kFree;
  }

  // Induced consistency against every mapped pair.
  bool consistent(int i, int j) const {
    for (const auto& [x, y] : current_)
      if (bond_a(i, x) != bond_b(j, y)) return false;
    return true;
  }

  void record() {
    const int n = static_cast<int>(current_.size());
    const int best_n = static_cast<int>(best_.size());
    if (n > best_n) {
      best_ = current_;
      best_bonds_ = current_bonds_;
    }
  }

  // Upper bound from labels still available on both sides.
  int bound() const {
    std::map<int, int> avail_a, avail_b;
    for (int i = 0; i < a_.atom_count(); ++i)
      if (state_a_[i] == kFree) ++avail_a[label(a_.atom(i))];
    for (int j = 0; j < b_.atom_count(); ++j)
      if (map_b_[j] < 0) ++avail_b[label(b_.atom(j))];
    int extra = 0;
    for (const auto& [l, c] : avail_a) {
      auto it = avail_b.find(l);
      if (it != avail_b.end()) extra += std::min(c, it->second);
    }
    return static_cast<int>(current_.size()) + extra;
  }

  void extend() {
    if (expired_) return;
    if ((++nodes_ & 255) == 0 && Clock::now() > deadline_) {
      expired_ = true;
      return;
    }
    record();
    if (bound() <= static_cast<int>(best_.size())) return;
    // Smallest free a-atom on the frontier.
    int next = -1;
    for (const auto& [x, y] : current_) {
      for (const auto& nb : a_.neighbors(x))
        if (state_a_[nb.atom] == kFree && (next < 0 || nb.atom < next)) next = nb.atom;
    }
    if (next < 0) return;
    // Candidates in b: free neighbours of the image of a mapped neighbour.
    int anchor = -1;
    for (const auto& nb : a_.neighbors(next))
      if (state_a_[nb.atom] == kMapped) {
        anchor = nb.atom;
        break;
      }
    for (const auto& nb : b_.neighbors(map_a_[anchor])) {
      const int j = nb.atom;
      if (map_b_[j] >= 0 || !compatible(next, j) || !consistent(next, j)) continue;
      assign(next, j);
      extend();
      unassign(next, j);
      if (expired_) return;
    }
    state_a_[next] = kExcluded;
    extend();
    state_a_[next] = kFree;
  }
};

}  // namespace

McsResult max_common_subgraph(const MolGraph& a, const MolGraph& b, int budget_ms) {
  if (a.atom_count() == 0 || b.atom_count() == 0) return {};
  return McsSearch(a, b, std::max(1, budget_ms)).run();
}

}  // namespace molex::chem
