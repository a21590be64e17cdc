//
// solcur - solubility dataset curation and evaluation toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SOLCUR_ELEMENTS_HPP_
#define SOLCUR_ELEMENTS_HPP_

#include <optional>
#include <span>
#include <string_view>

namespace solcur {

// Atomic number 0 is reserved; valid elements are 1..118.
inline constexpr int kMaxAtomicNumber = 118;

std::string_view element_symbol(int atomic_number);

// Standard atomic weight in g/mol.
double element_mass(int atomic_number);

std::optional<int> find_element(std::string_view symbol);

// Normal valences used to derive implicit hydrogens for atoms written
// outside brackets. Empty span for elements without a default valence.
std::span<const int> default_valences(int atomic_number);

}  // namespace solcur

#endif  // SOLCUR_ELEMENTS_HPP_
