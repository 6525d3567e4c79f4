#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "molex/chem/mol_graph.hpp"

namespace molex::chem {

/// Read-only view of a molecule prepared for pattern matching. With
/// `expand_hydrogens` every hydrogen becomes a graph atom, so `D` counts
/// hydrogen neighbours and patterns can address hydrogens directly.
class MatchTarget {
 public:
  explicit MatchTarget(const MolGraph& mol, bool expand_hydrogens = false);

  struct AtomView {
    int element;
    int charge;
    int isotope;  // 0 when unspecified
    bool aromatic;
    int total_h;       // attached hydrogens, implicit or as graph atoms
    int degree;        // graph neighbours in this view
    int connectivity;  // degree + hydrogens not present as atoms
    int valence;
    int ring_count;  // SSSR rings containing the atom
    int smallest_ring;
    int source;  // atom index in the molecule; the heavy parent for added H
  };
  struct BondView {
    int a;
    int b;
    BondOrder order;
    bool in_ring;
  };

  int atom_count() const { return static_cast<int>(atoms_.size()); }
  const AtomView& atom(int i) const { return atoms_[i]; }
  const BondView& bond(int i) const { return bonds_[i]; }
  std::span<const Neighbor> neighbors(int i) const {
    return {adjacency_.data() + start_[i], adjacency_.data() + start_[i + 1]};
  }
  int bond_between(int a, int b) const;

 private:
  std::vector<AtomView> atoms_;
  std::vector<BondView> bonds_;
  std::vector<Neighbor> adjacency_;
  std::vector<int> start_;
};

struct AtomPrimitive {
  enum class Kind : std::uint8_t {
    Any,
    Element,  // value = atomic number, flag: 0 aliphatic, 1 aromatic, 2 either
    Aromatic,
    Aliphatic,
    HCount,
    Degree,
    Connectivity,
    Valence,
    RingCount,  // value < 0: in any ring
    RingSize,   // value < 0: in any ring
    Charge,
    Isotope,
    Recursive,  // value = index into Pattern::recursive
  };
  Kind kind = Kind::Any;
  int value = 0;
  int flag = 0;
};

struct AtomExpr {
  enum class Op : std::uint8_t { Leaf, Not, And, Or };
  Op op = Op::Leaf;
  AtomPrimitive leaf;
  std::vector<AtomExpr> kids;
};

struct BondExpr {
  enum class Op : std::uint8_t { Leaf, Not, And, Or };
  enum class Prim : std::uint8_t { SingleOrAromatic, Single, Double, Triple, Aromatic, Any, Ring };
  Op op = Op::Leaf;
  Prim leaf = Prim::SingleOrAromatic;
  std::vector<BondExpr> kids;
};

/// Substructure query: a SMARTS subset (see README) or a molecule used as a
/// pattern. Immutable after construction.
class Pattern {
 public:
  /// Throws SmilesError with the offset of the offending character.
  static Pattern parse(std::string_view smarts);
  /// Atoms match on element and aromaticity, bonds on order.
  static Pattern from_molecule(const MolGraph& mol);

  int atom_count() const { return static_cast<int>(atoms.size()); }
  const std::string& text() const { return text_; }

  struct QBond {
    int a;
    int b;
    BondExpr expr;
  };
  std::vector<AtomExpr> atoms;
  std::vector<QBond> bonds;
  std::vector<std::shared_ptr<const Pattern>> recursive;

  // Matching plan: atoms in an order where each non-root atom is bonded to
  // an earlier one. Filled by finalize().
  struct Step {
    int atom;
    int parent_bond;  // -1 for a component root
    std::vector<int> closure_bonds;
  };
  std::vector<Step> plan;

  void finalize();

 private:
  std::string text_;
  friend class SmartsParser;
};

/// All embeddings of `pattern` into `target`, as target atom indices indexed
/// by pattern atom. Embeddings covering the same atom set are reported once
/// (the lexicographically smallest); results are sorted lexicographically.
std::vector<std::vector<int>> match_pattern(const MatchTarget& target, const Pattern& pattern);
std::vector<std::vector<int>> match_pattern(const MolGraph& mol, const Pattern& pattern);
std::vector<std::vector<int>> match_pattern(const MolGraph& mol, const MolGraph& pattern);

bool has_match(const MatchTarget& target, const Pattern& pattern);

/// True when some embedding maps pattern atom 0 onto `target_atom`.
bool matches_at(const MatchTarget& target, const Pattern& pattern, int target_atom);

}  // namespace molex::chem
