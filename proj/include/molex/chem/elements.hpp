#pragma once

#include <optional>
#include <span>
#include <string_view>

namespace molex::chem {

/// Atomic number for an element symbol ("C", "Cl", ...). Returns 0 for "*"
/// and -1 for unknown symbols. Symbols are case-sensitive.
int atomic_number(std::string_view symbol);

/// Element symbol for an atomic number; "*" for 0.
std::string_view element_symbol(int z);

/// Standard atomic weight in g/mol (0 for the wildcard atom).
double standard_atomic_weight(int z);

/// Exact mass of a specific isotope, if tabulated.
std::optional<double> isotope_mass(int z, int mass_number);

/// Permitted valences for an element carrying `charge`. Charged atoms take the
/// valences of the isoelectronic neutral element (N+ behaves like C, O- like
/// F). Empty when the element is not constrained by the valence table.
std::span<const int> allowed_valences(int z, int charge);

/// Elements that may be written without brackets in SMILES.
bool in_organic_subset(int z);

/// Elements that may be written as lowercase aromatic symbols.
bool aromatic_symbol_allowed(int z);

inline constexpr int kHydrogen = 1;
inline constexpr int kBoron = 5;
inline constexpr int kCarbon = 6;
inline constexpr int kNitrogen = 7;
inline constexpr int kOxygen = 8;
inline constexpr int kFluorine = 9;
inline constexpr int kPhosphorus = 15;
inline constexpr int kSulfur = 16;
inline constexpr int kChlorine = 17;
inline constexpr int kBromine = 35;
inline constexpr int kIodine = 53;

}  // namespace molex::chem
