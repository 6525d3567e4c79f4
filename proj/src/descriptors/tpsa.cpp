#include <algorithm>

#include "molex/chem/elements.hpp"
#include "molex/descriptors/descriptors.hpp"

namespace molex::descriptors {

using namespace chem;

namespace {

struct Environment {
  int heavy = 0;
  int h = 0;
  int charge = 0;
  int single = 0;
  int dbl = 0;
  int triple = 0;
  int aromatic = 0;
  bool in_3_ring = false;
};

double nitrogen(const Environment& e) {
  const int n = e.heavy, h = e.h, q = e.charge;
  if (n == 1) {
    if (h == 0 && q == 0 && e.triple == 1) return 23.79;
    if (h == 1 && q == 0 && e.dbl == 1) return 23.85;
    if (h == 2 && q == 0 && e.single == 1) return 26.02;
    if (h == 2 && q == 1 && e.dbl == 1) return 25.59;
    if (h == 3 && q == 1 && e.single == 1) return 27.64;
  } else if (n == 2) {
    if (h == 0 && q == 0 && e.single == 1 && e.dbl == 1) return 12.36;
    if (h == 0 && q == 0 && e.triple == 1 && e.dbl == 1) return 13.60;
    if (h == 1 && q == 0 && e.single == 2 && e.in_3_ring) return 21.94;
    if (h == 1 && q == 0 && e.single == 2) return 12.03;
    if (h == 0 && q == 1 && e.triple == 1 && e.single == 1) return 4.36;
    if (h == 1 && q == 1 && e.dbl == 1 && e.single == 1) return 13.97;
    if (h == 2 && q == 1 && e.single == 2) return 16.61;
    if (h == 0 && q == 0 && e.aromatic == 2) return 12.89;
    if (h == 1 && q == 0 && e.aromatic == 2) return 15.79;
    if (h == 1 && q == 1 && e.aromatic == 2) return 14.14;
  } else if (n == 3) {
    if (h == 0 && q == 0 && e.single == 3 && e.in_3_ring) return 3.01;
    if (h == 0 && q == 0 && e.single == 3) return 3.24;
    if (h == 0 && q == 0 && e.single == 1 && e.dbl == 2) return 11.68;
    if (h == 0 && q == 1 && e.single == 2 && e.dbl == 1) return 3.01;
    if (h == 1 && q == 1 && e.single == 3) return 4.44;
    if (h == 0 && q == 0 && e.aromatic == 3) return 4.41;
    if (h == 0 && q == 0 && e.single == 1 && e.aromatic == 2) return 4.93;
    if (h == 0 && q == 0 && e.dbl == 1 && e.aromatic == 2) return 8.39;
    if (h == 0 && q == 1 && e.aromatic == 3) return 4.10;
    if (h == 0 && q == 1 && e.single == 1 && e.aromatic == 2) return 3.88;
  } else if (n == 4) {
    if (h == 0 && q == 1 && e.single == 4) return 0.0;
  }
  // Environments missing from the published table use the linear fallback.
  return std::max(0.0, 30.5 - n * 8.2 + h * 1.5);
}

double oxygen(const Environment& e) {
  const int n = e.heavy, h = e.h, q = e.charge;
  if (n == 1) {
    if (h == 0 && q == 0 && e.dbl == 1) return 17.07;
    if (h == 1 && q == 0 && e.single == 1) return 20.23;
    if (h == 0 && q == -1 && e.single == 1) return 23.06;
  } else if (n == 2) {
    if (h == 0 && q == 0 && e.single == 2 && e.in_3_ring) return 12.53;
    if (h == 0 && q == 0 && e.single == 2) return 9.23;
    if (h == 0 && q == 0 && e.aromatic == 2) return 13.14;
  }
  return std::max(0.0, 28.5 - n * 8.6 + h * 1.5);
}

}  // namespace

double tpsa(const MolGraph& mol) {
  double total = 0;
  for (int i = 0; i < mol.atom_count(); ++i) {
    const Atom& a = mol.atom(i);
    if (a.element != kNitrogen && a.element != kOxygen) continue;
    Environment e;
    e.h = a.total_h();
    e.charge = a.charge;
    e.in_3_ring = mol.smallest_ring(i) == 3;
    for (const auto& nb : mol.neighbors(i)) {
      if (mol.atom(nb.atom).element == kHydrogen) {
        ++e.h;
        continue;
      }
      ++e.heavy;
      switch (mol.bond(nb.bond).order) {
        case BondOrder::Single: ++e.single; break;
        case BondOrder::Double: ++e.dbl; break;
        case BondOrder::Triple: ++e.triple; break;
        case BondOrder::Aromatic: ++e.aromatic; break;
      }
    }
    total += a.element == kNitrogen ? nitrogen(e) : oxygen(e);
  }
  return total;
}

}  // namespace molex::descriptors
