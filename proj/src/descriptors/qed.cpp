#include <array>
#include <cmath>
#include <numeric>

#include "molex/chem/elements.hpp"
#include "molex/chem/query.hpp"
#include "molex/descriptors/descriptors.hpp"
#include "molex/params.hpp"
#include "tsv.hpp"

namespace molex::descriptors {

using namespace chem;

namespace {

struct Ads {
  double a, b, c, d, e, f, dmax, weight;
};

struct QedTables {
  std::array<Ads, 8> ads{};
  std::vector<Pattern> acceptors;
  std::vector<std::pair<int, Pattern>> alerts;
  Pattern donor = Pattern::parse("[$([N;!H0;v3]),$([N;!H0;+1;v4]),$([O,S;H1;+0]),$([n;H1;+0])]");
  Pattern rotor = Pattern::parse(
      "[!$(*#*)&!D1&!$(C(F)(F)F)&!$(C(Cl)(Cl)Cl)&!$(C(Br)(Br)Br)&!$(C([CH3])([CH3])[CH3])&"
      "!$([CD3](=[N,O,S])-!@[#7,O,S!D1])&!$([#7,O,S!D1]-!@[CD3]=[N,O,S])&!$([CD3](=[N+])-!@[#7!D1])&"
      "!$([#7!D1]-!@[CD3]=[N+])]-,:;!@[!$(*#*)&!D1&!$(C(F)(F)F)&!$(C(Cl)(Cl)Cl)&!$(C(Br)(Br)Br)&"
      "!$(C([CH3])([CH3])[CH3])]");
  Pattern aliphatic_ring_atom = Pattern::parse("[$([A;R][!a])]");

  QedTables() {
    static const char* kOrder[8] = {"MW", "ALOGP", "HBA", "HBD", "PSA", "ROTB", "AROM", "ALERTS"};
    auto rows = detail::read_tsv(params::table("qed_ads_v1.tsv"));
    for (int i = 0; i < 8; ++i) {
      for (const auto& r : rows) {
        if (r.at(0) != kOrder[i]) continue;
        ads[i] = {std::stod(r.at(1)), std::stod(r.at(2)), std::stod(r.at(3)), std::stod(r.at(4)),
                  std::stod(r.at(5)), std::stod(r.at(6)), std::stod(r.at(7)), std::stod(r.at(8))};
      }
    }
    for (const auto& r : detail::read_tsv(params::table("qed_acceptors_v1.tsv"))) acceptors.push_back(Pattern::parse(r.at(0)));
    for (const auto& r : detail::read_tsv(params::table("qed_alerts_v1.tsv")))
      alerts.emplace_back(std::stoi(r.at(0)), Pattern::parse(r.at(1)));
  }
};

const QedTables& tables() {
  static const QedTables t;
  return t;
}

// Cycle rank of the graph left after deleting the given atoms.
int cycle_rank_without(const MolGraph& mol, const std::vector<bool>& removed) {
  const int n = mol.atom_count();
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  int rank = 0;
  for (const auto& b : mol.bonds()) {
    if (removed[b.a] || removed[b.b]) continue;
    int ra = find(b.a), rb = find(b.b);
    if (ra == rb) ++rank;
    else parent[ra] = rb;
  }
  return rank;
}

}  // namespace

QedProperties qed_properties(const MolGraph& mol) {
  const auto& t = tables();
  const MatchTarget target(mol);
  QedProperties p;
  p.mw = molecular_weight(mol);
  p.alogp = crippen_logp(mol);
  for (const auto& acc : t.acceptors) p.hba += static_cast<int>(match_pattern(target, acc).size());
  p.hbd = static_cast<int>(match_pattern(target, t.donor).size());
  p.psa = tpsa(mol);
  p.rotb = static_cast<int>(match_pattern(target, t.rotor).size());
  std::vector<bool> removed(mol.atom_count(), false);
  for (const auto& m : match_pattern(target, t.aliphatic_ring_atom)) removed[m[0]] = true;
  p.arom = cycle_rank_without(mol, removed);
  for (const auto& [id, pattern] : t.alerts)
    if (has_match(target, pattern)) p.alerts.push_back(id);
  return p;
}

double qed_desirability(int index, double x) {
  const Ads& p = tables().ads.at(index);
  const double exp1 = 1 + std::exp(-(x - p.c + p.d / 2) / p.e);
  const double exp2 = 1 + std::exp(-(x - p.c - p.d / 2) / p.f);
  const double dx = p.a + p.b / exp1 * (1 - 1 / exp2);
  return dx / p.dmax;
}

double qed_from_properties(const QedProperties& p) {
  const auto& t = tables();
  const std::array<double, 8> values = {p.mw,   p.alogp,  static_cast<double>(p.hba), static_cast<double>(p.hbd),
                                        p.psa, static_cast<double>(p.rotb), static_cast<double>(p.arom),
                                        static_cast<double>(p.alerts.size())};
  double num = 0, den = 0;
  for (int i = 0; i < 8; ++i) {
    num += t.ads[i].weight * std::log(qed_desirability(i, values[i]));
    den += t.ads[i].weight;
  }
  return std::exp(num / den);
}

double qed(const MolGraph& mol) { return qed_from_properties(qed_properties(mol)); }

}  // namespace molex::descriptors
