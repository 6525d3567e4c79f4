#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace molex::params {

// Raw contents of a versioned parameter table from data/params (e.g.
// "crippen_v1.tsv"). Throws std::out_of_range for unknown names.
std::string_view table(std::string_view name);

}  // namespace molex::params
