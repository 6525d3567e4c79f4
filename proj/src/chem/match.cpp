#include <algorithm>
#include <functional>
#include <unordered_map>

#include "molex/chem/elements.hpp"
#include "molex/chem/query.hpp"

namespace molex::chem {
namespace {

class Matcher {
 public:
  using Memo = std::unordered_map<const Pattern*, std::vector<signed char>>;

  Matcher(const MatchTarget& t, const Pattern& p, Memo& memo)
      : t_(t), p_(p), memo_(memo), map_(p.atom_count(), -1), used_(t.atom_count(), false) {}

  // Calls `visit` for every embedding until it returns false. `anchor`
  // pins pattern atom 0.
  void enumerate(int anchor, const std::function<bool(const std::vector<int>&)>& visit) {
    if (p_.plan.empty()) return;
    anchor_ = anchor;
    visit_ = &visit;
    stop_ = false;
    extend(0);
  }

 private:
  const MatchTarget& t_;
  const Pattern& p_;
  Memo& memo_;
  std::vector<int> map_;
  std::vector<bool> used_;
  int anchor_ = -1;
  const std::function<bool(const std::vector<int>&)>* visit_ = nullptr;
  bool stop_ = false;

  bool primitive(const AtomPrimitive& prim, int ti) {
    using K = AtomPrimitive::Kind;
    const auto& a = t_.atom(ti);
    switch (prim.kind) {
      case K::Any: return true;
      case K::Element:
        if (a.element != prim.value) return false;
        return prim.flag == 2 || (prim.flag == 1) == a.aromatic;
      case K::Aromatic: return a.aromatic;
      case K::Aliphatic: return !a.aromatic;
      case K::HCount: return a.total_h == prim.value;
      case K::Degree: return a.degree == prim.value;
      case K::Connectivity: return a.connectivity == prim.value;
      case K::Valence: return a.valence == prim.value;
      case K::RingCount: return prim.value < 0 ? a.ring_count > 0 : a.ring_count == prim.value;
      case K::RingSize: return prim.value < 0 ? a.smallest_ring > 0 : a.smallest_ring == prim.value;
      case K::Charge: return a.charge == prim.value;
      case K::Isotope: return a.isotope == prim.value;
      case K::Recursive: return recursive(*p_.recursive[prim.value], ti);
    }
    return false;
  }

  bool recursive(const Pattern& sub, int ti) {
    auto& memo = memo_[&sub];
    if (memo.empty()) memo.assign(t_.atom_count(), -1);
    if (memo[ti] < 0) {
      Matcher inner(t_, sub, memo_);
      bool found = false;
      std::function<bool(const std::vector<int>&)> stop = [&](const std::vector<int>&) {
        found = true;
        return false;
      };
      inner.enumerate(ti, stop);
      memo[ti] = found ? 1 : 0;
    }
    return memo[ti] == 1;
  }

  bool atom_ok(const AtomExpr& e, int ti) {
    switch (e.op) {
      case AtomExpr::Op::Leaf: return primitive(e.leaf, ti);
      case AtomExpr::Op::Not: return !atom_ok(e.kids[0], ti);
      case AtomExpr::Op::And:
        for (const auto& k : e.kids)
          if (!atom_ok(k, ti)) return false;
        return true;
      case AtomExpr::Op::Or:
        for (const auto& k : e.kids)
          if (atom_ok(k, ti)) return true;
        return false;
    }
    return false;
  }

  bool bond_ok(const BondExpr& e, int tb) const {
    using P = BondExpr::Prim;
    const auto& b = t_.bond(tb);
    switch (e.op) {
      case BondExpr::Op::Leaf:
        switch (e.leaf) {
          case P::SingleOrAromatic: return b.order == BondOrder::Single || b.order == BondOrder::Aromatic;
          case P::Single: return b.order == BondOrder::Single;
          case P::Double: return b.order == BondOrder::Double;
          case P::Triple: return b.order == BondOrder::Triple;
          case P::Aromatic: return b.order == BondOrder::Aromatic;
          case P::Any: return true;
          case P::Ring: return b.in_ring;
        }
        return false;
      case BondExpr::Op::Not: return !bond_ok(e.kids[0], tb);
      case BondExpr::Op::And:
        for (const auto& k : e.kids)
          if (!bond_ok(k, tb)) return false;
        return true;
      case BondExpr::Op::Or:
        for (const auto& k : e.kids)
          if (bond_ok(k, tb)) return true;
        return false;
    }
    return false;
  }

  bool try_atom(std::size_t k, int ti) {
    const auto& step = p_.plan[k];
    if (used_[ti] || !atom_ok(p_.atoms[step.atom], ti)) return false;
    for (int qb : step.closure_bonds) {
      const auto& bond = p_.bonds[qb];
      const int other = bond.a == step.atom ? bond.b : bond.a;
      const int tb = t_.bond_between(ti, map_[other]);
      if (tb < 0 || !bond_ok(bond.expr, tb)) return false;
    }
    return true;
  }

  void extend(std::size_t k) {
    if (k == p_.plan.size()) {
      if (!(*visit_)(map_)) stop_ = true;
      return;
    }
    const auto& step = p_.plan[k];
    auto place = [&](int ti) {
      map_[step.atom] = ti;
      used_[ti] = true;
      extend(k + 1);
      used_[ti] = false;
      map_[step.atom] = -1;
    };
    if (step.parent_bond < 0) {
      if (k == 0 && anchor_ >= 0) {
        if (try_atom(k, anchor_)) place(anchor_);
        return;
      }
      for (int ti = 0; ti < t_.atom_count() && !stop_; ++ti)
        if (try_atom(k, ti)) place(ti);
      return;
    }
    const auto& pb = p_.bonds[step.parent_bond];
    const int parent = pb.a == step.atom ? pb.b : pb.a;
    for (const auto& nb : t_.neighbors(map_[parent])) {
      if (stop_) return;
      if (!bond_ok(pb.expr, nb.bond)) continue;
      if (try_atom(k, nb.atom)) place(nb.atom);
    }
  }
};

}  // namespace

std::vector<std::vector<int>> match_pattern(const MatchTarget& target, const Pattern& pattern) {
  Matcher::Memo memo;
  Matcher m(target, pattern, memo);
  std::vector<std::vector<int>> all;
  std::function<bool(const std::vector<int>&)> keep = [&](const std::vector<int>& map) {
    all.push_back(map);
    return true;
  };
  m.enumerate(-1, keep);
  std::sort(all.begin(), all.end());
  std::vector<std::vector<int>> out;
  std::vector<int> key;
  std::vector<std::vector<int>> keys;
  keys.reserve(all.size());
  for (const auto& map : all) {
    key = map;
    std::sort(key.begin(), key.end());
    keys.push_back(key);
  }
  std::vector<std::size_t> order(all.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  // Stable sort by atom set keeps the lexicographically smallest first.
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return keys[x] < keys[y]; });
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i > 0 && keys[order[i]] == keys[order[i - 1]]) continue;
    out.push_back(all[order[i]]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::vector<int>> match_pattern(const MolGraph& mol, const Pattern& pattern) {
  return match_pattern(MatchTarget(mol), pattern);
}

std::vector<std::vector<int>> match_pattern(const MolGraph& mol, const MolGraph& pattern) {
  if (pattern.atom_count() > mol.atom_count()) return {};
  return match_pattern(MatchTarget(mol), Pattern::from_molecule(pattern));
}

bool has_match(const MatchTarget& target, const Pattern& pattern) {
  Matcher::Memo memo;
  Matcher m(target, pattern, memo);
  bool found = false;
  std::function<bool(const std::vector<int>&)> stop = [&](const std::vector<int>&) {
    found = true;
    return false;
  };
  m.enumerate(-1, stop);
  return found;
}

bool matches_at(const MatchTarget& target, const Pattern& pattern, int target_atom) {
  Matcher::Memo memo;
  Matcher m(target, pattern, memo);
  bool found = false;
  std::function<bool(const std::vector<int>&)> stop = [&](const std::vector<int>&) {
    found = true;
    return false;
  };
  m.enumerate(target_atom, stop);
  return found;
}

}  // namespace molex::chem
