#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace molex::chem {

/// Parse or validation failure. `offset()` is the character offset into the
/// source string, or -1 when the problem has no single position.
class SmilesError : public std::runtime_error {
 public:
  SmilesError(const std::string& what, int offset)
      : std::runtime_error(offset >= 0 ? what + " at offset " + std::to_string(offset) : what),
        offset_(offset) {}
  int offset() const noexcept { return offset_; }

 private:
  int offset_;
};

enum class BondOrder : std::uint8_t { Single = 1, Double = 2, Triple = 3, Aromatic = 4 };
enum class BondStereo : std::uint8_t { None, Up, Down };
enum class Chirality : std::uint8_t { None, CounterClockwise, Clockwise };

struct Atom {
  int element = 6;  // atomic number, 0 for the '*' wildcard
  int charge = 0;
  std::optional<int> isotope;
  std::optional<int> explicit_h;  // bracket H count, or folded [H] neighbours
  bool aromatic = false;
  bool bracket = false;
  Chirality chirality = Chirality::None;

  // Derived by MolGraph::build.
  int implicit_h = 0;
  int degree = 0;
  bool pi = false;  // aromatic atom that carries a double bond in a Kekule form

  int total_h() const { return explicit_h.value_or(0) + implicit_h; }
};

struct Bond {
  int a = 0;
  int b = 0;
  BondOrder order = BondOrder::Single;
  BondStereo stereo = BondStereo::None;

  int other(int atom) const { return atom == a ? b : a; }
};

struct Neighbor {
  int atom;
  int bond;
};

/// Simple labelled molecular graph with perceived rings, aromaticity and
/// resolved hydrogens. Immutable once built; safe to share across threads.
class MolGraph {
 public:
  MolGraph() = default;

  /// Validates the graph and derives ring information, benzenoid aromaticity,
  /// implicit hydrogens and degrees. `atom_offsets` (parallel to `atoms`) are
  /// used to position error messages. Throws SmilesError.
  static MolGraph build(std::vector<Atom> atoms, std::vector<Bond> bonds, std::string source = {},
                        std::span<const int> atom_offsets = {});

  std::span<const Atom> atoms() const { return atoms_; }
  std::span<const Bond> bonds() const { return bonds_; }
  const Atom& atom(int i) const { return atoms_[static_cast<std::size_t>(i)]; }
  const Bond& bond(int i) const { return bonds_[static_cast<std::size_t>(i)]; }
  int atom_count() const { return static_cast<int>(atoms_.size()); }
  int bond_count() const { return static_cast<int>(bonds_.size()); }
  int heavy_atom_count() const;

  std::span<const Neighbor> neighbors(int atom) const {
    return {adjacency_.data() + adj_start_[atom], adjacency_.data() + adj_start_[atom + 1]};
  }
  /// Bond index joining a and b, or -1.
  int bond_between(int a, int b) const;

  /// Smallest set of smallest rings, each as a cyclic atom sequence.
  const std::vector<std::vector<int>>& rings() const { return rings_; }
  /// Number of SSSR rings containing the atom.
  int ring_count(int atom) const { return ring_count_[atom]; }
  /// Size of the shortest cycle through the atom (0 when acyclic).
  int smallest_ring(int atom) const { return smallest_ring_[atom]; }
  bool bond_in_ring(int bond) const { return bond_in_ring_[bond]; }
  bool atom_in_ring(int atom) const { return smallest_ring_[atom] > 0; }

  /// Sum of bond orders in a Kekule form plus hydrogens.
  int valence(int atom) const;

  const std::string& source() const { return source_; }
  bool has_stereo() const { return has_stereo_; }
  /// Number of connected components.
  int fragment_count() const;

 private:
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<Neighbor> adjacency_;
  std::vector<int> adj_start_{0};
  std::vector<std::vector<int>> rings_;
  std::vector<int> ring_count_;
  std::vector<int> smallest_ring_;
  std::vector<bool> bond_in_ring_;
  std::string source_;
  bool has_stereo_ = false;

  void index_adjacency();
  friend class GraphBuilder;
};

/// Re-labels atoms: atom i of `mol` becomes atom `new_index[i]` of the result.
/// Bond list order follows the new labels. Used by permutation tests and by
/// tooling that needs a random atom order.
MolGraph permute_atoms(const MolGraph& mol, std::span<const int> new_index);

/// Minimum cycle basis (SSSR) of a graph given as adjacency lists.
std::vector<std::vector<int>> smallest_set_of_smallest_rings(
    int atom_count, std::span<const Bond> bonds);

}  // namespace molex::chem
