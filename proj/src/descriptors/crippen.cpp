#include <string>
#include <vector>

#include "molex/chem/elements.hpp"
#include "molex/chem/query.hpp"
#include "molex/descriptors/descriptors.hpp"
#include "molex/params.hpp"
#include "tsv.hpp"

namespace molex::descriptors {

using namespace chem;

namespace {

struct CrippenType {
  std::string name;
  Pattern pattern;
  double logp;
};

// Patterns in table order; the first one matching an atom claims it.
const std::vector<CrippenType>& crippen_table() {
  static const std::vector<CrippenType> table = [] {
    std::vector<CrippenType> out;
    for (const auto& row : detail::read_tsv(params::table("crippen_v1.tsv")))
      out.push_back({row.at(0), Pattern::parse(row.at(1)), std::stod(row.at(2))});
    return out;
  }();
  return table;
}

}  // namespace

CrippenTyping crippen_typing(const MolGraph& mol) {
  const auto& table = crippen_table();
  const MatchTarget target(mol, true);
  CrippenTyping out;
  out.types.assign(mol.atom_count(), "");
  out.h_types.assign(mol.atom_count(), "");
  for (int ti = 0; ti < target.atom_count(); ++ti) {
    for (const auto& t : table) {
      if (!matches_at(target, t.pattern, ti)) continue;
      out.logp += t.logp;
      const int src = target.atom(ti).source;
      if (ti < mol.atom_count()) out.types[src] = t.name;
      else out.h_types[src] = t.name;
      break;
    }
  }
  return out;
}

double crippen_logp(const MolGraph& mol) { return crippen_typing(mol).logp; }

}  // namespace molex::descriptors
