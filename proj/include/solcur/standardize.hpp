//
// solcur - solubility dataset curation and evaluation toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SOLCUR_STANDARDIZE_HPP_
#define SOLCUR_STANDARDIZE_HPP_

#include <compare>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "solcur/smiles.hpp"

namespace solcur {

// Identity of a molecule. plain_key ignores stereochemistry and is the key
// used for deduplication, weighting and fold assignment.
struct StructureKey {
  std::string stereo_key;
  std::string plain_key;

  friend bool operator==(const StructureKey &, const StructureKey &) = default;
};

enum class RejectReason {
  kNone,
  kMetal,
  kSingleHeavyAtom,
  kParseError,
};

std::string_view to_string(RejectReason reason);

struct StandardizeReport {
  int removed_fragments = 0;
  int neutralized_atoms = 0;
  RejectReason rejected_reason = RejectReason::kNone;
};

enum class OrganicClass {
  kAccepted,
  kMetal,
  kSingleHeavyAtom,
};

// Keeps the fragment with most heavy atoms. Ties go to the heavier
// fragment, then to the lexicographically smallest plain key.
MolGraph strip_salts(const MolGraph &g);

struct NeutralizeResult {
  MolGraph graph;
  int changed_atoms = 0;
};

// Removes formal charges by adjusting hydrogens:
//   +1 with at least one H        -> lose one H
//   -1 on N, O or S               -> gain one H (if valence allows)
// Atoms bonded to an atom of opposite charge are left alone.
NeutralizeResult neutralize(const MolGraph &g);

// Elements allowed in accepted molecules: H B C N O F Si P S Cl Se Br I.
bool is_organic_element(int atomic_number);

OrganicClass classify_organic(const MolGraph &g);

// Initial atom invariant of the canonical ranking.
struct AtomInvariant {
  int element;
  int degree;
  int charge;
  int hydrogens;
  bool aromatic;
  int isotope;

  friend auto operator<=>(const AtomInvariant &, const AtomInvariant &) = default;
};

AtomInvariant atom_invariant(const MolGraph &g, int atom);

// Canonical atom ranks (a permutation of 0..n-1) chosen so that the written
// SMILES is lexicographically smallest among all labellings reachable by
// invariant refinement with tie-breaking.
std::vector<int> canonical_ranks(const MolGraph &g);

StructureKey canonical_key(const MolGraph &g);

class NonFiniteValue : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

// "<plain_key>|<value rounded to 0.01, half away from zero>".
std::string record_key(const StructureKey &key, double value);

struct StandardizeOptions {
  bool neutralize = true;
};

struct StandardizedMolecule {
  std::optional<MolGraph> graph;  // empty on parse failure
  std::optional<StructureKey> key;  // empty when rejected
  StandardizeReport report;
  std::string error;  // parser message on parse failure
};

// parse -> strip_salts -> neutralize (optional) -> classify -> key.
StandardizedMolecule standardize(std::string_view smiles,
                                 const StandardizeOptions &options = {});

}  // namespace solcur

#endif  // SOLCUR_STANDARDIZE_HPP_
