#pragma once

#include <string>
#include <vector>

#include "molex/chem/mol_graph.hpp"

namespace molex::descriptors {

using chem::MolGraph;

struct DescriptorSet {
  double mw = 0;
  double logp = 0;
  int hbd = 0;
  int hba = 0;
  double tpsa = 0;
  int rotb = 0;
  int arom_rings = 0;
  double qed = 0;
  int ro5_violations = 0;
  bool ro5_pass = true;
};

/// Average molecular weight in g/mol. Isotope-labelled atoms use the exact
/// mass of that isotope.
double molecular_weight(const MolGraph& mol);

struct LipinskiCounts {
  int hbd = 0;  // hydrogens on N and O
  int hba = 0;  // N and O atoms
};
LipinskiCounts lipinski_counts(const MolGraph& mol);

/// Crippen atom typing. Types are listed per atom of the molecule; `h_types`
/// holds the type shared by the atom's hydrogens ("" when it has none).
/// Atoms no pattern claims get type "" and contribute 0.
struct CrippenTyping {
  double logp = 0;
  std::vector<std::string> types;
  std::vector<std::string> h_types;
};
CrippenTyping crippen_typing(const MolGraph& mol);
double crippen_logp(const MolGraph& mol);

/// Topological polar surface area over N and O (Ertl contributions).
double tpsa(const MolGraph& mol);

struct PhyschemProfile {
  double tpsa = 0;
  int rotb = 0;
  int arom_rings = 0;
};
/// rotb counts acyclic single bonds between heavy atoms that both have
/// heavy degree >= 2, amide C-N excluded. arom_rings counts SSSR rings whose
/// bonds are all aromatic.
PhyschemProfile physchem_profile(const MolGraph& mol);

/// Inputs of the eight QED desirability functions. Counts follow the
/// Bickerton definitions (acceptor patterns, donor pattern, strict rotors,
/// rings left after removing aliphatic ring atoms with non-aromatic
/// neighbours), which differ from the Lipinski counts above.
struct QedProperties {
  double mw = 0;
  double alogp = 0;
  int hba = 0;
  int hbd = 0;
  double psa = 0;
  int rotb = 0;
  int arom = 0;
  std::vector<int> alerts;  // ids of matching structural alerts
};
QedProperties qed_properties(const MolGraph& mol);

/// Desirability of one property value, in (0, 1]. `index` follows the
/// property order MW, ALOGP, HBA, HBD, PSA, ROTB, AROM, ALERTS.
double qed_desirability(int index, double x);
double qed_from_properties(const QedProperties& p);
double qed(const MolGraph& mol);

struct Ro5Result {
  int violations = 0;
  bool pass = true;
};
/// Counts mw > 500, logp > 5, hbd > 5, hba > 10; pass allows one violation.
Ro5Result ro5_violations(const DescriptorSet& d);

DescriptorSet compute_descriptors(const MolGraph& mol);

}  // namespace molex::descriptors
