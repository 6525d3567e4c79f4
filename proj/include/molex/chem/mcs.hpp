#pragma once

#include <utility>
#include <vector>

#include "molex/chem/mol_graph.hpp"

namespace molex::chem {

struct McsResult {
  std::vector<std::pair<int, int>> mapping;  // (atom in a, atom in b), sorted by a
  int size_atoms = 0;
  int size_bonds = 0;
  bool optimal = true;  // false when the time budget ran out
};

/// Largest connected common induced subgraph. Atoms match on element and
/// aromaticity, bonds on order. Among mappings of equal atom count the first
/// one found wins (seeds in atom order), so the result is deterministic.
/// Always returns at least one compatible atom pair when one exists.
McsResult max_common_subgraph(const MolGraph& a, const MolGraph& b, int budget_ms = 500);

}  // namespace molex::chem
