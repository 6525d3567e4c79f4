#include <algorithm>
#include <cctype>
#include <set>

#include "molex/chem/elements.hpp"
#include "molex/chem/smiles.hpp"

namespace molex::chem {
namespace {

int order_value(BondOrder order) { return order == BondOrder::Aromatic ? 1 : static_cast<int>(order); }

// True when the unbracketed form of the atom re-parses to the same hydrogen
// count and pi state.
bool organic_form_ok(const MolGraph& mol, int i) {
  const Atom& a = mol.atom(i);
  if (a.charge != 0 || a.isotope) return false;
  if (a.element == 0) return a.total_h() == 0;
  if (!in_organic_subset(a.element)) return false;
  if (a.aromatic && !aromatic_symbol_allowed(a.element)) return false;
  auto valences = allowed_valences(a.element, 0);
  if (valences.empty()) return false;
  int sum = 0;
  for (const auto& nb : mol.neighbors(i)) sum += order_value(mol.bond(nb.bond).order);
  int target = -1;
  for (int v : valences) {
    if (v >= sum) {
      target = v;
      break;
    }
  }
  if (target < 0) return false;
  int free = target - sum;
  bool pi = false;
  if (a.aromatic && free >= 1) {
    pi = true;
    --free;
  }
  return free == a.total_h() && pi == a.pi;
}

std::string atom_text(const MolGraph& mol, int i) {
  const Atom& a = mol.atom(i);
  std::string sym(element_symbol(a.element));
  if (a.aromatic) sym[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(sym[0])));
  if (organic_form_ok(mol, i)) return sym;
  std::string out = "[";
  if (a.isotope) out += std::to_string(*a.isotope);
  out += sym;
  const int h = a.total_h();
  if (h == 1) out += "H";
  else if (h > 1) out += "H" + std::to_string(h);
  if (a.charge > 0) out += a.charge == 1 ? "+" : "+" + std::to_string(a.charge);
  if (a.charge < 0) out += a.charge == -1 ? "-" : "-" + std::to_string(-a.charge);
  out += "]";
  return out;
}

std::string bond_text(const MolGraph& mol, const Bond& b) {
  const bool both_aromatic = mol.atom(b.a).aromatic && mol.atom(b.b).aromatic;
  switch (b.order) {
    case BondOrder::Single: return both_aromatic ? "-" : "";
    case BondOrder::Double: return "=";
    case BondOrder::Triple: return "#";
    case BondOrder::Aromatic: return both_aromatic ? "" : ":";
  }
  return "";
}

std::string ring_label(int digit) { return digit < 10 ? std::to_string(digit) : "%" + std::to_string(digit); }

class Writer {
 public:
  Writer(const MolGraph& mol, std::span<const int> rank, std::vector<int>* order)
      : mol_(mol), rank_(rank), order_(order) {
    const int n = mol.atom_count();
    visited_.assign(n, false);
    children_.resize(n);
    openings_.resize(n);
    closings_.resize(n);
    bond_used_.assign(mol.bond_count(), false);
  }

  std::string run() {
    const int n = mol_.atom_count();
    std::vector<int> by_rank(n);
    for (int i = 0; i < n; ++i) by_rank[i] = i;
    std::sort(by_rank.begin(), by_rank.end(), [&](int x, int y) { return rank_[x] < rank_[y]; });
    std::string out;
    for (int start : by_rank) {
      if (visited_[start]) continue;
      discover(start, -1);
      if (!out.empty()) out += '.';
      emit(start, out);
    }
    return out;
  }

 private:
  const MolGraph& mol_;
  std::span<const int> rank_;
  std::vector<int>* order_;
  std::vector<bool> visited_;
  std::vector<bool> bond_used_;
  std::vector<std::vector<Neighbor>> children_;
  std::vector<std::vector<Neighbor>> openings_;
  std::vector<std::vector<Neighbor>> closings_;
  std::set<int> free_digits_;
  int next_digit_ = 1;

  std::vector<Neighbor> sorted_neighbors(int v) const {
    auto span = mol_.neighbors(v);
    std::vector<Neighbor> out(span.begin(), span.end());
    std::sort(out.begin(), out.end(), [&](const Neighbor& x, const Neighbor& y) { return rank_[x.atom] < rank_[y.atom]; });
    return out;
  }

  void discover(int v, int parent_bond) {
    visited_[v] = true;
    if (parent_bond >= 0) bond_used_[parent_bond] = true;
    for (const auto& nb : sorted_neighbors(v)) {
      if (nb.bond == parent_bond || bond_used_[nb.bond]) continue;
      if (visited_[nb.atom]) {
        bond_used_[nb.bond] = true;
        openings_[nb.atom].push_back({v, nb.bond});
        closings_[v].push_back(nb);
      } else {
        children_[v].push_back(nb);
        discover(nb.atom, nb.bond);
      }
    }
  }

  int take_digit() {
    if (!free_digits_.empty()) {
      int d = *free_digits_.begin();
      free_digits_.erase(free_digits_.begin());
      return d;
    }
    return next_digit_++;
  }

  std::vector<int> digit_of_bond_ = std::vector<int>(static_cast<std::size_t>(mol_.bond_count()), -1);

  void emit(int v, std::string& out) {
    out += atom_text(mol_, v);
    if (order_) order_->push_back(v);
    // Ring openings are listed in rank order of the partner that closes them.
    auto opens = openings_[v];
    std::sort(opens.begin(), opens.end(), [&](const Neighbor& x, const Neighbor& y) { return rank_[x.atom] < rank_[y.atom]; });
    for (const auto& nb : opens) {
      int d = take_digit();
      digit_of_bond_[nb.bond] = d;
      out += bond_text(mol_, mol_.bond(nb.bond));
      out += ring_label(d);
    }
    for (const auto& nb : closings_[v]) {
      int d = digit_of_bond_[nb.bond];
      out += ring_label(d);
      free_digits_.insert(d);
    }
    const auto& kids = children_[v];
    for (std::size_t i = 0; i < kids.size(); ++i) {
      const bool branch = i + 1 < kids.size();
      if (branch) out += '(';
      out += bond_text(mol_, mol_.bond(kids[i].bond));
      emit(kids[i].atom, out);
      if (branch) out += ')';
    }
  }
};

}  // namespace

std::string write_smiles(const MolGraph& mol, std::span<const int> rank, std::vector<int>* emission_order) {
  if (emission_order) emission_order->clear();
  return Writer(mol, rank, emission_order).run();
}

}  // namespace molex::chem
