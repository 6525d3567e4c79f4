#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "molex/chem/mol_graph.hpp"

namespace molex::chem {

struct CanonicalSmiles {
  std::string smiles;
  bool stereo_stripped = false;  // input carried / \ @ @@ marks that were dropped
};

/// Canonical atom ranking (0..n-1, all distinct). Depends only on the labelled
/// graph, not on atom order.
std::vector<int> canonical_ranks(const MolGraph& mol);

/// Unique SMILES for the graph. Stereo marks are not written.
CanonicalSmiles canonicalize(const MolGraph& mol);

/// parse_smiles followed by canonicalize. Throws SmilesError.
std::string canonical_smiles(std::string_view text);

}  // namespace molex::chem
