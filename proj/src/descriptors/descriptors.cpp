#include "molex/descriptors/descriptors.hpp"

#include "molex/chem/elements.hpp"

namespace molex::descriptors {

using namespace chem;

double molecular_weight(const MolGraph& mol) {
  const double h = standard_atomic_weight(kHydrogen);
  double mw = 0;
  for (const auto& a : mol.atoms()) {
    std::optional<double> exact;
    if (a.isotope) exact = isotope_mass(a.element, *a.isotope);
    mw += exact ? *exact : standard_atomic_weight(a.element);
    mw += h * a.total_h();
  }
  return mw;
}

LipinskiCounts lipinski_counts(const MolGraph& mol) {
  LipinskiCounts c;
  for (int i = 0; i < mol.atom_count(); ++i) {
    const Atom& a = mol.atom(i);
    if (a.element != kNitrogen && a.element != kOxygen) continue;
    ++c.hba;
    c.hbd += a.total_h();
    for (const auto& nb : mol.neighbors(i))
      if (mol.atom(nb.atom).element == kHydrogen) ++c.hbd;
  }
  return c;
}

namespace {

bool is_amide_bond(const MolGraph& mol, const Bond& b) {
  auto carbonyl = [&](int c) {
    if (mol.atom(c).element != kCarbon) return false;
    for (const auto& nb : mol.neighbors(c)) {
      if (mol.bond(nb.bond).order == BondOrder::Double && mol.atom(nb.atom).element == kOxygen) return true;
    }
    return false;
  };
  const int za = mol.atom(b.a).element, zb = mol.atom(b.b).element;
  return (za == kNitrogen && carbonyl(b.b)) || (zb == kNitrogen && carbonyl(b.a));
}

int heavy_degree(const MolGraph& mol, int i) {
  int d = 0;
  for (const auto& nb : mol.neighbors(i))
    if (mol.atom(nb.atom).element != kHydrogen) ++d;
  return d;
}

}  // namespace

PhyschemProfile physchem_profile(const MolGraph& mol) {
  PhyschemProfile p;
  p.tpsa = tpsa(mol);
  for (int bi = 0; bi < mol.bond_count(); ++bi) {
    const Bond& b = mol.bond(bi);
    if (b.order != BondOrder::Single || mol.bond_in_ring(bi)) continue;
    if (mol.atom(b.a).element == kHydrogen || mol.atom(b.b).element == kHydrogen) continue;
    if (heavy_degree(mol, b.a) < 2 || heavy_degree(mol, b.b) < 2) continue;
    if (is_amide_bond(mol, b)) continue;
    ++p.rotb;
  }
  for (const auto& ring : mol.rings()) {
    bool aromatic = true;
    for (std::size_t i = 0; i < ring.size() && aromatic; ++i) {
      const int bi = mol.bond_between(ring[i], ring[(i + 1) % ring.size()]);
      aromatic = mol.bond(bi).order == BondOrder::Aromatic;
    }
    if (aromatic) ++p.arom_rings;
  }
  return p;
}

Ro5Result ro5_violations(const DescriptorSet& d) {
  Ro5Result r;
  r.violations = (d.mw > 500) + (d.logp > 5) + (d.hbd > 5) + (d.hba > 10);
  r.pass = r.violations <= 1;
  return r;
}

DescriptorSet compute_descriptors(const MolGraph& mol) {
  DescriptorSet d;
  d.mw = molecular_weight(mol);
  d.logp = crippen_logp(mol);
  const auto lip = lipinski_counts(mol);
  d.hbd = lip.hbd;
  d.hba = lip.hba;
  const auto phys = physchem_profile(mol);
  d.tpsa = phys.tpsa;
  d.rotb = phys.rotb;
  d.arom_rings = phys.arom_rings;
  QedProperties q = qed_properties(mol);
  q.alogp = d.logp;
  d.qed = qed_from_properties(q);
  const auto ro5 = ro5_violations(d);
  d.ro5_violations = ro5.violations;
  d.ro5_pass = ro5.pass;
  return d;
}

}  // namespace molex::descriptors
