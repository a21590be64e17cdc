//
// solcur - solubility dataset curation and evaluation toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SOLCUR_SMILES_HPP_
#define SOLCUR_SMILES_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace solcur {

enum class Chirality : std::uint8_t {
  kNone,
  kCounterClockwise,  // @
  kClockwise,         // @@
};

enum class BondOrder : std::uint8_t {
  kSingle = 1,
  kDouble = 2,
  kTriple = 3,
  kAromatic = 4,
};

// Direction of a '/' or '\' bond, relative to the bond's begin -> end
// orientation.
enum class BondDirection : std::uint8_t {
  kNone,
  kUp,    // '/'
  kDown,  // '\'
};

// Placeholder for a bracket hydrogen in Atom::stereo_neighbors.
inline constexpr int kImplicitHydrogen = -1;

struct Atom {
  int element = 6;  // atomic number
  int formal_charge = 0;
  bool aromatic = false;
  // Hydrogen count written inside brackets. Atoms written without brackets
  // leave this empty and derive hydrogens from default valences.
  std::optional<int> explicit_h;
  int isotope = 0;  // 0 = natural abundance
  Chirality chirality = Chirality::kNone;
  // Neighbour order the chirality mark refers to: the order in which the
  // neighbours were written, with kImplicitHydrogen for a bracket H.
  std::vector<int> stereo_neighbors;

  friend bool operator==(const Atom &, const Atom &) = default;
};

struct Bond {
  int begin = 0;
  int end = 0;
  BondOrder order = BondOrder::kSingle;
  BondDirection direction = BondDirection::kNone;

  int other(int atom) const { return atom == begin ? end : begin; }

  friend bool operator==(const Bond &, const Bond &) = default;
};

// Neighbour entry in the adjacency list: the adjacent atom and the index of
// the connecting bond.
struct Neighbor {
  int atom;
  int bond;
};

class MolGraph {
public:
  MolGraph() = default;
  // Throws std::invalid_argument if a bond references a missing atom, joins
  // an atom to itself, or duplicates another bond.
  MolGraph(std::vector<Atom> atoms, std::vector<Bond> bonds,
           std::string source_text = {});

  std::size_t atom_count() const { return atoms_.size(); }
  std::size_t bond_count() const { return bonds_.size(); }

  const Atom &atom(int i) const { return atoms_[static_cast<std::size_t>(i)]; }
  const Bond &bond(int i) const { return bonds_[static_cast<std::size_t>(i)]; }
  std::span<const Atom> atoms() const { return atoms_; }
  std::span<const Bond> bonds() const { return bonds_; }
  std::span<const Neighbor> neighbors(int i) const {
    return adjacency_[static_cast<std::size_t>(i)];
  }
  int degree(int i) const { return static_cast<int>(neighbors(i).size()); }

  const std::string &source_text() const { return source_text_; }

  // Index of the bond between a and b, or -1.
  int find_bond(int a, int b) const;

private:
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<std::vector<Neighbor>> adjacency_;
  std::string source_text_;
};

enum class SmilesErrorKind {
  kEmptyInput,
  kUnbalancedBranch,
  kUnclosedRing,
  kUnknownElement,
  kUnsupported,  // wildcard atoms, reactions, exotic stereo classes
  kSyntax,
};

std::string_view to_string(SmilesErrorKind kind);

class SmilesError : public std::runtime_error {
public:
  SmilesError(SmilesErrorKind kind, std::size_t offset,
              const std::string &detail);

  SmilesErrorKind kind() const { return kind_; }
  // Byte offset into the input text where the problem was detected.
  std::size_t offset() const { return offset_; }

private:
  SmilesErrorKind kind_;
  std::size_t offset_;
};

// Parses a SMILES string (OpenSMILES subset). Leading and trailing
// whitespace is ignored. Throws SmilesError.
MolGraph parse_smiles(std::string_view text);

// Writes g as SMILES, visiting atoms in the order given by ranks (lower rank
// first). ranks must be a permutation of 0..n-1.
std::string write_smiles(const MolGraph &g, std::span<const int> ranks,
                         bool include_stereo);

// Writes g using atom indices as ranks.
std::string write_smiles(const MolGraph &g, bool include_stereo = true);

struct SmilesOutput {
  std::string text;
  // Atom indices in the order they appear in text.
  std::vector<int> atom_order;
};

SmilesOutput write_smiles_traced(const MolGraph &g, std::span<const int> ranks,
                                 bool include_stereo);

// Connected components ordered by their lowest atom index. Atom order within
// a component follows the input graph.
std::vector<MolGraph> components(const MolGraph &g);

// Subgraph induced by the given atoms (in the given order).
MolGraph induced_subgraph(const MolGraph &g, std::span<const int> atoms);

// Total hydrogens on atom i: bracket count, or the count implied by default
// valences for atoms written without brackets.
int hydrogen_count(const MolGraph &g, int i);

// Hydrogens implied by default valences given the current bonds, ignoring
// any bracket count.
int implicit_hydrogens(const MolGraph &g, int i);

// Sum of bond orders with aromatic bonds counted as 1.
int bond_order_sum(const MolGraph &g, int i);

int heavy_atom_count(const MolGraph &g);

// Molecular mass including hydrogens.
double molecular_mass(const MolGraph &g);

}  // namespace solcur

#endif  // SOLCUR_SMILES_HPP_
