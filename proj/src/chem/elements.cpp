#include "molex/chem/elements.hpp"

#include <array>
#include <charconv>
#include <map>
#include <string>
#include <vector>

#include "molex/params.hpp"
#include "tsv.hpp"

namespace molex::chem {
namespace {

struct ElementTable {
  std::vector<std::string> symbols;  // index = atomic number
  std::vector<double> weights;
  std::map<std::string, int, std::less<>> by_symbol;
  std::map<std::pair<int, int>, double> isotopes;

  ElementTable() {
    symbols.assign(1, "*");
    weights.assign(1, 0.0);
    for (const auto& row : detail::read_tsv(params::table("elements_v1.tsv"))) {
      const int z = std::stoi(row.at(0));
      if (static_cast<int>(symbols.size()) <= z) {
        symbols.resize(static_cast<std::size_t>(z) + 1);
        weights.resize(static_cast<std::size_t>(z) + 1);
      }
      symbols[static_cast<std::size_t>(z)] = row.at(1);
      weights[static_cast<std::size_t>(z)] = std::stod(row.at(2));
      by_symbol.emplace(row.at(1), z);
    }
    for (const auto& row : detail::read_tsv(params::table("isotopes_v1.tsv"))) {
      isotopes.emplace(std::pair{std::stoi(row.at(0)), std::stoi(row.at(1))}, std::stod(row.at(2)));
    }
  }
};

const ElementTable& table() {
  static const ElementTable t;
  return t;
}

// Valences of neutral elements; charged atoms are mapped onto their
// isoelectronic neighbour in the same period.
constexpr std::array<int, 1> kOne{1};
constexpr std::array<int, 1> kTwo{2};
constexpr std::array<int, 1> kThree{3};
constexpr std::array<int, 1> kFour{4};
constexpr std::array<int, 2> kThreeFive{3, 5};
constexpr std::array<int, 3> kTwoFourSix{2, 4, 6};
constexpr std::array<int, 3> kOneThreeFive{1, 3, 5};

std::span<const int> neutral_valences(int z) {
  switch (z) {
    case 1: return kOne;
    case 5: return kThree;
    case 6: return kFour;
    case 7: return kThree;
    case 8: return kTwo;
    case 9: return kOne;
    case 14: return kFour;
    case 15: return kThreeFive;
    case 16: return kTwoFourSix;
    case 17: return kOne;
    case 33: return kThreeFive;
    case 34: return kTwoFourSix;
    case 35: return kOne;
    case 53: return kOneThreeFive;
    default: return {};
  }
}

int period_of(int z) {
  if (z <= 2) return 1;
  if (z <= 10) return 2;
  if (z <= 18) return 3;
  if (z <= 36) return 4;
  if (z <= 54) return 5;
  return 6;
}

}  // namespace

int atomic_number(std::string_view symbol) {
  if (symbol == "*") return 0;
  const auto& t = table();
  auto it = t.by_symbol.find(symbol);
  return it == t.by_symbol.end() ? -1 : it->second;
}

std::string_view element_symbol(int z) {
  const auto& t = table();
  if (z < 0 || z >= static_cast<int>(t.symbols.size())) return "?";
  return t.symbols[static_cast<std::size_t>(z)];
}

double standard_atomic_weight(int z) {
  const auto& t = table();
  if (z <= 0 || z >= static_cast<int>(t.weights.size())) return 0.0;
  return t.weights[static_cast<std::size_t>(z)];
}

std::optional<double> isotope_mass(int z, int mass_number) {
  const auto& t = table();
  auto it = t.isotopes.find({z, mass_number});
  if (it == t.isotopes.end()) return std::nullopt;
  return it->second;
}

std::span<const int> allowed_valences(int z, int charge) {
  if (neutral_valences(z).empty()) return {};
  if (charge == 0) return neutral_valences(z);
  const int effective = z - charge;
  if (effective <= 0 || period_of(effective) != period_of(z)) {
    // Crossing a noble gas: only bare ions (valence 0) are meaningful. An empty
    // span would mean "unconstrained", so report the lowest sensible valence.
    static constexpr std::array<int, 1> kZero{0};
    return kZero;
  }
  // Boron-group cations and carbon-group anions stay within the table.
  if (effective == 5 || effective == 13) return kThree;
  if (effective == 6 || effective == 14) return kFour;
  return neutral_valences(effective);
}

bool in_organic_subset(int z) {
  switch (z) {
    case 0: case 5: case 6: case 7: case 8: case 9: case 15: case 16: case 17: case 35: case 53:
      return true;
    default:
      return false;
  }
}

bool aromatic_symbol_allowed(int z) {
  switch (z) {
    case 0: case 5: case 6: case 7: case 8: case 15: case 16: case 33: case 34: case 52:
      return true;
    default:
      return false;
  }
}

}  // namespace molex::chem
