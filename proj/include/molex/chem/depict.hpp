#pragma once

#include <span>
#include <string>
#include <vector>

#include "molex/chem/mol_graph.hpp"

namespace molex::chem {

struct Point2 {
  double x = 0;
  double y = 0;
};

/// Deterministic 2D coordinates with unit bond length. Rings are regular
/// polygons, fused rings share an edge, chains zigzag at 120 degrees and
/// disconnected fragments are placed side by side.
std::vector<Point2> depict_coordinates(const MolGraph& mol);

/// Standalone SVG drawing. Every atom gets a `<circle class="atom">` glyph
/// (class "atom highlight" when highlighted); bonds between two highlighted
/// atoms are drawn highlighted too.
std::string depict_svg(const MolGraph& mol, std::span<const int> highlight = {});

}  // namespace molex::chem
