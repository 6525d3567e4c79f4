#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "molex/chem/mol_graph.hpp"

namespace molex::chem {

/// Parses a SMILES string: organic-subset and bracket atoms, bond symbols
/// `- = # :`, stereo marks `/ \ @ @@` (kept on the graph), ring closures
/// including `%nn`, branches and `.`-separated fragments. Throws SmilesError
/// with the character offset of the problem.
MolGraph parse_smiles(std::string_view text);

/// Writes a SMILES string visiting atoms in the order implied by `rank`
/// (lower rank first, both for component roots and branch order). Stereo is
/// not written. Aromatic atoms are written in lowercase. When `emission_order`
/// is given it receives the atom indices in the order they appear in the text.
std::string write_smiles(const MolGraph& mol, std::span<const int> rank,
                         std::vector<int>* emission_order = nullptr);

/// One line of a SMILES list with its 1-based line number.
struct SmilesLine {
  int line;
  std::string text;
};

/// Splits UTF-8 text into SMILES entries: one molecule per line, `#` lines and
/// blank lines skipped, surrounding whitespace trimmed. Anything after the
/// first whitespace on a line (a name or id column) is dropped.
std::vector<SmilesLine> read_smiles_lines(std::string_view text);

}  // namespace molex::chem
