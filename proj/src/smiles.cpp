//
// solcur - solubility dataset curation and evaluation toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "solcur/smiles.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <numeric>
#include <string>

#include "solcur/elements.hpp"

namespace solcur {

MolGraph::MolGraph(std::vector<Atom> atoms, std::vector<Bond> bonds,
                   std::string source_text)
    : atoms_(std::move(atoms)), bonds_(std::move(bonds)),
      adjacency_(atoms_.size()), source_text_(std::move(source_text)) {
  const int n = static_cast<int>(atoms_.size());
  for (std::size_t b = 0; b < bonds_.size(); ++b) {
    const Bond &bond = bonds_[b];
    if (bond.begin < 0 || bond.begin >= n || bond.end < 0 || bond.end >= n)
      throw std::invalid_argument("bond endpoint out of range");
    if (bond.begin == bond.end)
      throw std::invalid_argument("bond joins an atom to itself");
    for (const Neighbor &nb : adjacency_[static_cast<std::size_t>(bond.begin)]) {
      if (nb.atom == bond.end)
        throw std::invalid_argument("duplicate bond between atoms");
    }
    const int bi = static_cast<int>(b);
    adjacency_[static_cast<std::size_t>(bond.begin)].push_back({bond.end, bi});
    adjacency_[static_cast<std::size_t>(bond.end)].push_back({bond.begin, bi});
  }
}

int MolGraph::find_bond(int a, int b) const {
  for (const Neighbor &nb : neighbors(a)) {
    if (nb.atom == b) return nb.bond;
  }
  return -1;
}

std::string_view to_string(SmilesErrorKind kind) {
  switch (kind) {
  case SmilesErrorKind::kEmptyInput:
    return "EmptyInput";
  case SmilesErrorKind::kUnbalancedBranch:
    return "UnbalancedBranch";
  case SmilesErrorKind::kUnclosedRing:
    return "UnclosedRing";
  case SmilesErrorKind::kUnknownElement:
    return "UnknownElement";
  case SmilesErrorKind::kUnsupported:
    return "Unsupported";
  case SmilesErrorKind::kSyntax:
    return "Syntax";
  }
  return "Unknown";
}

SmilesError::SmilesError(SmilesErrorKind kind, std::size_t offset,
                         const std::string &detail)
    : std::runtime_error(std::string(to_string(kind)) + " at offset " +
                         std::to_string(offset) + ": " + detail),
      kind_(kind), offset_(offset) {}

int bond_order_sum(const MolGraph &g, int i) {
  int sum = 0;
  for (const Neighbor &nb : g.neighbors(i)) {
    switch (g.bond(nb.bond).order) {
    case BondOrder::kSingle:
    case BondOrder::kAromatic:
      sum += 1;
      break;
    case BondOrder::kDouble:
      sum += 2;
      break;
    case BondOrder::kTriple:
      sum += 3;
      break;
    }
  }
  return sum;
}

int implicit_hydrogens(const MolGraph &g, int i) {
  const Atom &atom = g.atom(i);
  if (atom.formal_charge != 0) return 0;
  const int sum = bond_order_sum(g, i);
  for (int valence : default_valences(atom.element)) {
    if (valence >= sum) {
      // An aromatic atom spends one valence on the delocalised system.
      return std::max(0, valence - sum - (atom.aromatic ? 1 : 0));
    }
  }
  return 0;
}

int hydrogen_count(const MolGraph &g, int i) {
  const Atom &atom = g.atom(i);
  return atom.explicit_h ? *atom.explicit_h : implicit_hydrogens(g, i);
}

int heavy_atom_count(const MolGraph &g) {
  return static_cast<int>(std::count_if(
      g.atoms().begin(), g.atoms().end(),
      [](const Atom &a) { return a.element != 1; }));
}

double molecular_mass(const MolGraph &g) {
  double mass = 0.0;
  for (int i = 0; i < static_cast<int>(g.atom_count()); ++i) {
    mass += element_mass(g.atom(i).element) +
            hydrogen_count(g, i) * element_mass(1);
  }
  return mass;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

bool is_organic_subset(int z) {
  switch (z) {
  case 5:
  case 6:
  case 7:
  case 8:
  case 9:
  case 15:
  case 16:
  case 17:
  case 35:
  case 53:
    return true;
  default:
    return false;
  }
}

bool is_aromatic_organic(int z) {
  return z == 5 || z == 6 || z == 7 || z == 8 || z == 15 || z == 16;
}

// Elements that may be written in lowercase inside brackets.
bool is_aromatic_bracket(int z) {
  return is_aromatic_organic(z) || z == 33 || z == 34 || z == 52;
}

struct BondSpec {
  bool present = false;
  BondOrder order = BondOrder::kSingle;
  BondDirection direction = BondDirection::kNone;
  std::size_t offset = 0;
};

struct OpenRing {
  int atom;
  BondSpec spec;
  std::size_t offset;
  std::size_t slot;  // placeholder index in the opener's stereo_neighbors
};

class SmilesParser {
public:
  explicit SmilesParser(std::string_view text) : text_(text) {}

  MolGraph run() {
    if (text_.empty())
      throw SmilesError(SmilesErrorKind::kEmptyInput, 0, "empty SMILES");
    while (pos_ < text_.size()) step();
    if (!branches_.empty()) {
      throw SmilesError(SmilesErrorKind::kUnbalancedBranch,
                        branches_.back().second, "unclosed '('");
    }
    for (const auto &ring : rings_) {
      if (ring) {
        throw SmilesError(SmilesErrorKind::kUnclosedRing, ring->offset,
                          "ring bond digit never closed");
      }
    }
    if (pending_.present)
      fail(SmilesErrorKind::kSyntax, pending_.offset, "dangling bond symbol");
    if (atoms_.empty())
      fail(SmilesErrorKind::kEmptyInput, 0, "no atoms");
    return MolGraph(std::move(atoms_), std::move(bonds_), std::string(text_));
  }

private:
  [[noreturn]] static void fail(SmilesErrorKind kind, std::size_t offset,
                                const std::string &detail) {
    throw SmilesError(kind, offset, detail);
  }

  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
  }

  void step() {
    const std::size_t start = pos_;
    const char c = text_[pos_];
    switch (c) {
    case '(':
      if (prev_ < 0) fail(SmilesErrorKind::kSyntax, start, "branch without atom");
      if (pending_.present)
        fail(SmilesErrorKind::kSyntax, start, "bond symbol before '('");
      branches_.emplace_back(prev_, start);
      last_was_atom_ = false;
      ++pos_;
      return;
    case ')':
      if (branches_.empty())
        fail(SmilesErrorKind::kUnbalancedBranch, start, "unmatched ')'");
      if (pending_.present)
        fail(SmilesErrorKind::kSyntax, start, "bond symbol before ')'");
      if (!last_was_atom_)
        fail(SmilesErrorKind::kSyntax, start, "empty branch");
      prev_ = branches_.back().first;
      branches_.pop_back();
      ++pos_;
      return;
    case '.':
      if (pending_.present || prev_ < 0)
        fail(SmilesErrorKind::kSyntax, start, "misplaced '.'");
      if (!branches_.empty())
        fail(SmilesErrorKind::kSyntax, start, "'.' inside a branch");
      prev_ = -1;
      last_was_atom_ = false;
      ++pos_;
      return;
    case '-':
    case '=':
    case '#':
    case ':':
    case '/':
    case '\\':
      read_bond();
      return;
    case '$':
      fail(SmilesErrorKind::kUnsupported, start, "quadruple bonds");
    case '%':
      read_ring_number();
      return;
    case '[':
      read_bracket_atom();
      return;
    case '*':
      fail(SmilesErrorKind::kUnsupported, start, "wildcard atom '*'");
    case '>':
      fail(SmilesErrorKind::kUnsupported, start, "reaction SMILES");
    default:
      break;
    }
    if (c >= '0' && c <= '9') {
      ++pos_;
      ring_bond(c - '0', start);
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      read_organic_atom();
      return;
    }
    if (std::isspace(static_cast<unsigned char>(c)))
      fail(SmilesErrorKind::kSyntax, start, "embedded whitespace");
    fail(SmilesErrorKind::kSyntax, start,
         std::string("unexpected character '") + c + "'");
  }

  void read_bond() {
    const std::size_t start = pos_;
    if (pending_.present)
      fail(SmilesErrorKind::kSyntax, start, "consecutive bond symbols");
    if (prev_ < 0) fail(SmilesErrorKind::kSyntax, start, "bond without atom");
    BondSpec spec;
    spec.present = true;
    spec.offset = start;
    switch (text_[pos_]) {
    case '-':
      spec.order = BondOrder::kSingle;
      break;
    case '=':
      spec.order = BondOrder::kDouble;
      break;
    case '#':
      spec.order = BondOrder::kTriple;
      break;
    case ':':
      spec.order = BondOrder::kAromatic;
      break;
    case '/':
      spec.direction = BondDirection::kUp;
      break;
    case '\\':
      spec.direction = BondDirection::kDown;
      break;
    }
    pending_ = spec;
    ++pos_;
  }

  void read_ring_number() {
    const std::size_t start = pos_;
    if (!std::isdigit(static_cast<unsigned char>(peek(1))) ||
        !std::isdigit(static_cast<unsigned char>(peek(2)))) {
      fail(SmilesErrorKind::kSyntax, start, "'%' needs two digits");
    }
    const int number = (peek(1) - '0') * 10 + (peek(2) - '0');
    pos_ += 3;
    ring_bond(number, start);
  }

  void ring_bond(int number, std::size_t offset) {
    if (prev_ < 0 || !last_was_atom_)
      fail(SmilesErrorKind::kSyntax, offset, "ring bond without atom");
    auto &open = rings_[static_cast<std::size_t>(number)];
    const BondSpec spec = pending_;
    pending_ = {};
    Atom &here = atoms_[static_cast<std::size_t>(prev_)];
    if (!open) {
      here.stereo_neighbors.push_back(kImplicitHydrogen - 1);  // placeholder
      open = OpenRing{prev_, spec, offset, here.stereo_neighbors.size() - 1};
      return;
    }
    const OpenRing ring = *open;
    open.reset();
    if (ring.atom == prev_)
      fail(SmilesErrorKind::kSyntax, offset, "ring bond to the same atom");
    if (ring.spec.present && spec.present &&
        ring.spec.order != spec.order) {
      fail(SmilesErrorKind::kSyntax, offset, "conflicting ring bond orders");
    }
    Bond bond;
    if (spec.direction != BondDirection::kNone &&
        ring.spec.direction == BondDirection::kNone) {
      bond.begin = prev_;
      bond.end = ring.atom;
      bond.direction = spec.direction;
    } else {
      bond.begin = ring.atom;
      bond.end = prev_;
      bond.direction = ring.spec.direction;
    }
    if (ring.spec.present) {
      bond.order = ring.spec.order;
    } else if (spec.present) {
      bond.order = spec.order;
    } else {
      bond.order = default_order(ring.atom, prev_);
    }
    add_bond(bond, offset);
    atoms_[static_cast<std::size_t>(ring.atom)].stereo_neighbors[ring.slot] =
        prev_;
    atoms_[static_cast<std::size_t>(prev_)].stereo_neighbors.push_back(
        ring.atom);
  }

  BondOrder default_order(int a, int b) const {
    return atoms_[static_cast<std::size_t>(a)].aromatic &&
                   atoms_[static_cast<std::size_t>(b)].aromatic
               ? BondOrder::kAromatic
               : BondOrder::kSingle;
  }

  void add_bond(const Bond &bond, std::size_t offset) {
    for (const Bond &other : bonds_) {
      if ((other.begin == bond.begin && other.end == bond.end) ||
          (other.begin == bond.end && other.end == bond.begin)) {
        fail(SmilesErrorKind::kSyntax, offset, "duplicate bond");
      }
    }
    bonds_.push_back(bond);
  }

  void read_organic_atom() {
    const std::size_t start = pos_;
    const char c = text_[pos_];
    Atom atom;
    if (c == 'C' && peek(1) == 'l') {
      atom.element = 17;
      pos_ += 2;
    } else if (c == 'B' && peek(1) == 'r') {
      atom.element = 35;
      pos_ += 2;
    } else {
      static constexpr std::array<std::pair<char, int>, 16> kSingle = {{
          {'B', 5}, {'C', 6}, {'N', 7}, {'O', 8}, {'P', 15}, {'S', 16},
          {'F', 9}, {'I', 53}, {'b', 5}, {'c', 6}, {'n', 7}, {'o', 8},
          {'p', 15}, {'s', 16}, {'\0', 0}, {'\0', 0},
      }};
      const auto it = std::find_if(kSingle.begin(), kSingle.end(),
                                   [c](const auto &e) { return e.first == c; });
      if (it == kSingle.end() || it->second == 0) {
        fail(SmilesErrorKind::kUnknownElement, start,
             std::string("'") + c + "' is not an organic-subset atom");
      }
      atom.element = it->second;
      atom.aromatic = std::islower(static_cast<unsigned char>(c)) != 0;
      ++pos_;
    }
    add_atom(std::move(atom), start);
  }

  int read_number() {
    int value = 0;
    while (std::isdigit(static_cast<unsigned char>(peek()))) {
      value = value * 10 + (peek() - '0');
      if (value > 100000) fail(SmilesErrorKind::kSyntax, pos_, "number too large");
      ++pos_;
    }
    return value;
  }

  void read_bracket_atom() {
    const std::size_t start = pos_;
    ++pos_;  // '['
    Atom atom;
    if (std::isdigit(static_cast<unsigned char>(peek()))) atom.isotope = read_number();

    const std::size_t symbol_at = pos_;
    const char c0 = peek();
    if (c0 == '*') fail(SmilesErrorKind::kUnsupported, symbol_at, "wildcard atom '*'");
    if (std::isupper(static_cast<unsigned char>(c0))) {
      const char c1 = peek(1);
      std::optional<int> z;
      if (std::islower(static_cast<unsigned char>(c1))) {
        z = find_element(std::string{c0, c1});
        if (!z) {
          fail(SmilesErrorKind::kUnknownElement, symbol_at,
               "unknown element '" + std::string{c0, c1} + "'");
        }
        pos_ += 2;
      } else {
        z = find_element(std::string{c0});
        if (!z) {
          fail(SmilesErrorKind::kUnknownElement, symbol_at,
               "unknown element '" + std::string{c0} + "'");
        }
        ++pos_;
      }
      atom.element = *z;
    } else if (std::islower(static_cast<unsigned char>(c0))) {
      std::optional<int> z;
      const char c1 = peek(1);
      if (std::islower(static_cast<unsigned char>(c1))) {
        const std::string two{static_cast<char>(std::toupper(c0)), c1};
        if (auto found = find_element(two); found && is_aromatic_bracket(*found)) {
          z = found;
          pos_ += 2;
        }
      }
      if (!z) {
        const std::string one{static_cast<char>(std::toupper(c0))};
        if (auto found = find_element(one); found && is_aromatic_bracket(*found)) {
          z = found;
          ++pos_;
        }
      }
      if (!z) {
        fail(SmilesErrorKind::kUnknownElement, symbol_at,
             std::string("'") + c0 + "' is not an aromatic element");
      }
      atom.element = *z;
      atom.aromatic = true;
    } else {
      fail(SmilesErrorKind::kSyntax, symbol_at, "bracket atom without element");
    }

    if (peek() == '@') {
      const std::size_t at = pos_;
      ++pos_;
      if (peek() == '@') {
        ++pos_;
        atom.chirality = Chirality::kClockwise;
      } else if (peek() == 'T' && peek(1) == 'H') {
        pos_ += 2;
        const int cls = read_number();
        if (cls == 1) {
          atom.chirality = Chirality::kCounterClockwise;
        } else if (cls == 2) {
          atom.chirality = Chirality::kClockwise;
        } else {
          fail(SmilesErrorKind::kSyntax, at, "bad @TH class");
        }
      } else if (const std::string_view cls = text_.substr(pos_, 2);
                 cls == "SP" || cls == "TB" || cls == "OH" || cls == "AL") {
        fail(SmilesErrorKind::kUnsupported, at,
             "non-tetrahedral stereo classes");
      } else {
        atom.chirality = Chirality::kCounterClockwise;
      }
    }

    int hydrogens = 0;
    if (peek() == 'H') {
      ++pos_;
      hydrogens = std::isdigit(static_cast<unsigned char>(peek())) ? read_number() : 1;
    }
    atom.explicit_h = hydrogens;

    if (peek() == '+' || peek() == '-') {
      const char sign_char = peek();
      const int sign = sign_char == '+' ? 1 : -1;
      ++pos_;
      int magnitude = 1;
      if (std::isdigit(static_cast<unsigned char>(peek()))) {
        magnitude = read_number();
      } else {
        while (peek() == sign_char) {
          ++magnitude;
          ++pos_;
        }
      }
      atom.formal_charge = sign * magnitude;
    }

    if (peek() == ':') {
      ++pos_;
      if (!std::isdigit(static_cast<unsigned char>(peek())))
        fail(SmilesErrorKind::kSyntax, pos_, "atom class needs digits");
      read_number();
    }

    if (peek() != ']') fail(SmilesErrorKind::kSyntax, pos_, "expected ']'");
    ++pos_;
    add_atom(std::move(atom), start);
  }

  void add_atom(Atom atom, std::size_t offset) {
    const int index = static_cast<int>(atoms_.size());
    const bool bracket_h = atom.explicit_h && *atom.explicit_h > 0;
    if (prev_ >= 0) atom.stereo_neighbors.push_back(prev_);
    if (bracket_h) atom.stereo_neighbors.push_back(kImplicitHydrogen);
    atoms_.push_back(std::move(atom));
    if (prev_ >= 0) {
      Bond bond;
      bond.begin = prev_;
      bond.end = index;
      bond.direction = pending_.direction;
      bond.order = pending_.present ? pending_.order : default_order(prev_, index);
      add_bond(bond, offset);
      atoms_[static_cast<std::size_t>(prev_)].stereo_neighbors.push_back(index);
    } else if (pending_.present) {
      fail(SmilesErrorKind::kSyntax, pending_.offset, "bond without atom");
    }
    pending_ = {};
    prev_ = index;
    last_was_atom_ = true;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  int prev_ = -1;
  bool last_was_atom_ = false;
  BondSpec pending_;
  std::vector<std::pair<int, std::size_t>> branches_;
  std::array<std::optional<OpenRing>, 100> rings_;
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

}  // namespace

MolGraph parse_smiles(std::string_view text) {
  return SmilesParser(trim(text)).run();
}

// ---------------------------------------------------------------------------
// Writing

namespace {

// Geometric sense of a directional bond seen from atom x: +1 if the other
// atom lies "above" x, -1 if below, 0 if the bond carries no direction.
int side_of(const Bond &bond, int x) {
  if (bond.direction == BondDirection::kNone) return 0;
  const int up = bond.direction == BondDirection::kUp ? 1 : -1;
  return x == bond.begin ? up : -up;
}

struct DoubleBondStereo {
  int bond;
  int a;          // double-bond atom
  int b;          // double-bond atom
  int a_ref;      // neighbour of a whose relation is recorded
  int b_ref;      // neighbour of b
  bool cis;       // a_ref and b_ref on the same side
};

std::vector<DoubleBondStereo> find_double_bond_stereo(const MolGraph &g) {
  std::vector<DoubleBondStereo> result;
  for (int bi = 0; bi < static_cast<int>(g.bond_count()); ++bi) {
    const Bond &db = g.bond(bi);
    if (db.order != BondOrder::kDouble) continue;
    auto marked = [&](int x, int other) -> std::pair<int, int> {
      for (const Neighbor &nb : g.neighbors(x)) {
        if (nb.atom == other) continue;
        const int s = side_of(g.bond(nb.bond), x);
        if (s != 0) return {nb.atom, s};
      }
      return {-1, 0};
    };
    const auto [a_ref, a_side] = marked(db.begin, db.end);
    const auto [b_ref, b_side] = marked(db.end, db.begin);
    if (a_ref < 0 || b_ref < 0) continue;
    if (g.degree(db.begin) > 3 || g.degree(db.end) > 3) continue;
    result.push_back({bi, db.begin, db.end, a_ref, b_ref, a_side == b_side});
  }
  return result;
}

// Union-find over bonds with a parity bit relative to the root.
class ParityUnion {
public:
  explicit ParityUnion(std::size_t n) : parent_(n), parity_(n, 0) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }

  std::pair<int, int> find(int x) {
    int parity = 0;
    int root = x;
    while (parent_[static_cast<std::size_t>(root)] != root) {
      parity ^= parity_[static_cast<std::size_t>(root)];
      root = parent_[static_cast<std::size_t>(root)];
    }
    // Path compression.
    int p = parity;
    while (parent_[static_cast<std::size_t>(x)] != x) {
      const int next = parent_[static_cast<std::size_t>(x)];
      const int step = parity_[static_cast<std::size_t>(x)];
      parent_[static_cast<std::size_t>(x)] = root;
      parity_[static_cast<std::size_t>(x)] = p;
      p ^= step;
      x = next;
    }
    return {root, parity};
  }

  // Requires value(x) xor value(y) == differ. Returns false on conflict.
  bool unite(int x, int y, int differ) {
    const auto [rx, px] = find(x);
    const auto [ry, py] = find(y);
    if (rx == ry) return (px ^ py) == differ;
    parent_[static_cast<std::size_t>(ry)] = rx;
    parity_[static_cast<std::size_t>(ry)] = px ^ py ^ differ;
    return true;
  }

private:
  std::vector<int> parent_;
  std::vector<int> parity_;
};

class SmilesWriter {
public:
  SmilesWriter(const MolGraph &g, std::span<const int> ranks,
               bool include_stereo)
      : g_(g), ranks_(ranks), stereo_(include_stereo) {
    const std::size_t n = g.atom_count();
    if (ranks.size() != n)
      throw std::invalid_argument("ranks size differs from atom count");
    std::vector<bool> seen(n, false);
    for (int r : ranks) {
      if (r < 0 || static_cast<std::size_t>(r) >= n || seen[static_cast<std::size_t>(r)])
        throw std::invalid_argument("ranks is not a permutation");
      seen[static_cast<std::size_t>(r)] = true;
    }
  }

  SmilesOutput run() {
    plan();
    if (stereo_) {
      assign_bond_directions();
      assign_chirality();
    }
    ring_digit_.assign(g_.bond_count(), 0);
    SmilesOutput out;
    out.atom_order = preorder_;
    for (std::size_t c = 0; c < roots_.size(); ++c) {
      if (c > 0) out.text += '.';
      write_component(roots_[c], out.text);
    }
    return out;
  }

private:
  int rank(int atom) const { return ranks_[static_cast<std::size_t>(atom)]; }

  std::vector<Neighbor> sorted_neighbors(int v) const {
    std::vector<Neighbor> nbrs(g_.neighbors(v).begin(), g_.neighbors(v).end());
    std::sort(nbrs.begin(), nbrs.end(), [this](const Neighbor &x, const Neighbor &y) {
      return rank(x.atom) < rank(y.atom);
    });
    return nbrs;
  }

  void plan() {
    const std::size_t n = g_.atom_count();
    parent_bond_.assign(n, -1);
    parent_.assign(n, -1);
    children_.assign(n, {});
    ring_bonds_.assign(n, {});
    position_.assign(n, -1);
    first_written_.assign(g_.bond_count(), -1);
    std::vector<bool> ring_seen(g_.bond_count(), false);

    std::vector<int> by_rank(n);
    std::iota(by_rank.begin(), by_rank.end(), 0);
    std::sort(by_rank.begin(), by_rank.end(),
              [this](int x, int y) { return rank(x) < rank(y); });

    // Iterative DFS; each frame walks the rank-sorted neighbour list.
    struct Frame {
      int atom;
      std::vector<Neighbor> nbrs;
      std::size_t next;
    };
    for (int root : by_rank) {
      if (position_[static_cast<std::size_t>(root)] >= 0) continue;
      roots_.push_back(root);
      std::vector<Frame> stack;
      auto enter = [&](int v) {
        position_[static_cast<std::size_t>(v)] = static_cast<int>(preorder_.size());
        preorder_.push_back(v);
        stack.push_back({v, sorted_neighbors(v), 0});
      };
      enter(root);
      while (!stack.empty()) {
        Frame &frame = stack.back();
        if (frame.next == frame.nbrs.size()) {
          stack.pop_back();
          continue;
        }
        const Neighbor nb = frame.nbrs[frame.next++];
        const int v = frame.atom;
        if (nb.bond == parent_bond_[static_cast<std::size_t>(v)]) continue;
        if (position_[static_cast<std::size_t>(nb.atom)] >= 0) {
          if (!ring_seen[static_cast<std::size_t>(nb.bond)]) {
            ring_seen[static_cast<std::size_t>(nb.bond)] = true;
            ring_bonds_[static_cast<std::size_t>(nb.atom)].push_back(nb.bond);
            ring_bonds_[static_cast<std::size_t>(v)].push_back(nb.bond);
            first_written_[static_cast<std::size_t>(nb.bond)] = nb.atom;
          }
          continue;
        }
        parent_bond_[static_cast<std::size_t>(nb.atom)] = nb.bond;
        parent_[static_cast<std::size_t>(nb.atom)] = v;
        children_[static_cast<std::size_t>(v)].push_back(nb.atom);
        first_written_[static_cast<std::size_t>(nb.bond)] = v;
        enter(nb.atom);
      }
    }

    // Ring bonds at each atom in order of the partner's output position:
    // closures (partners already written) before openings.
    for (std::size_t v = 0; v < n; ++v) {
      auto &rb = ring_bonds_[v];
      std::sort(rb.begin(), rb.end(), [&](int x, int y) {
        return position_[static_cast<std::size_t>(g_.bond(x).other(static_cast<int>(v)))] <
               position_[static_cast<std::size_t>(g_.bond(y).other(static_cast<int>(v)))];
      });
    }
  }

  void assign_bond_directions() {
    out_direction_.assign(g_.bond_count(), BondDirection::kNone);
    const auto stereo_bonds = find_double_bond_stereo(g_);
    if (stereo_bonds.empty()) return;

    auto lowest_other = [&](int x, int exclude) {
      int best = -1;
      for (const Neighbor &nb : g_.neighbors(x)) {
        if (nb.atom == exclude) continue;
        if (best < 0 || rank(nb.atom) < rank(best)) best = nb.atom;
      }
      return best;
    };

    std::vector<bool> marked(g_.bond_count(), false);
    struct Requirement {
      int bond_a;
      int atom_a;
      int bond_b;
      int atom_b;
      bool same_side;
    };
    std::vector<Requirement> requirements;
    for (const DoubleBondStereo &s : stereo_bonds) {
      const int a_ref = lowest_other(s.a, s.b);
      const int b_ref = lowest_other(s.b, s.a);
      bool cis = s.cis;
      if (a_ref != s.a_ref) cis = !cis;
      if (b_ref != s.b_ref) cis = !cis;
      const int bond_a = g_.find_bond(s.a, a_ref);
      const int bond_b = g_.find_bond(s.b, b_ref);
      marked[static_cast<std::size_t>(bond_a)] = true;
      marked[static_cast<std::size_t>(bond_b)] = true;
      requirements.push_back({bond_a, s.a, bond_b, s.b, cis});
    }
    // Two marked bonds on the same end of a stereo double bond point to
    // opposite sides.
    for (const DoubleBondStereo &s : stereo_bonds) {
      for (int x : {s.a, s.b}) {
        const int other = x == s.a ? s.b : s.a;
        std::vector<int> at_x;
        for (const Neighbor &nb : g_.neighbors(x)) {
          if (nb.atom != other && marked[static_cast<std::size_t>(nb.bond)])
            at_x.push_back(nb.bond);
        }
        if (at_x.size() == 2)
          requirements.push_back({at_x[0], x, at_x[1], x, false});
      }
    }

    // value(bond) = +1 when the atom written second lies above the atom
    // written first. Seen from x: +value if x was written first.
    auto flip = [&](int bond, int x) {
      return first_written_[static_cast<std::size_t>(bond)] == x ? 0 : 1;
    };
    ParityUnion uf(g_.bond_count());
    for (const Requirement &r : requirements) {
      const int differ = (r.same_side ? 0 : 1) ^ flip(r.bond_a, r.atom_a) ^
                         flip(r.bond_b, r.atom_b);
      uf.unite(r.bond_a, r.bond_b, differ);
    }

    // Anchor each group on its earliest-written bond, which is drawn '/'.
    auto written_key = [&](int bond) {
      const Bond &b = g_.bond(bond);
      const int p = position_[static_cast<std::size_t>(b.begin)];
      const int q = position_[static_cast<std::size_t>(b.end)];
      return std::pair{std::min(p, q), std::max(p, q)};
    };
    std::vector<int> anchor(g_.bond_count(), -1);
    for (int b = 0; b < static_cast<int>(g_.bond_count()); ++b) {
      if (!marked[static_cast<std::size_t>(b)]) continue;
      const int root = uf.find(b).first;
      int &current = anchor[static_cast<std::size_t>(root)];
      if (current < 0 || written_key(b) < written_key(current)) current = b;
    }
    for (int b = 0; b < static_cast<int>(g_.bond_count()); ++b) {
      if (!marked[static_cast<std::size_t>(b)]) continue;
      const auto [root, parity] = uf.find(b);
      const int anchor_parity = uf.find(anchor[static_cast<std::size_t>(root)]).second;
      const bool up = (parity ^ anchor_parity) == 0;
      out_direction_[static_cast<std::size_t>(b)] =
          up ? BondDirection::kUp : BondDirection::kDown;
    }
  }

  // Neighbour order as it will appear in the output around atom v.
  std::vector<int> output_neighbor_order(int v) const {
    std::vector<int> order;
    const int parent = parent_[static_cast<std::size_t>(v)];
    if (parent >= 0) order.push_back(parent);
    if (hydrogen_count(g_, v) > 0) order.push_back(kImplicitHydrogen);
    for (int rb : ring_bonds_[static_cast<std::size_t>(v)])
      order.push_back(g_.bond(rb).other(v));
    for (int child : children_[static_cast<std::size_t>(v)]) order.push_back(child);
    return order;
  }

  void assign_chirality() {
    out_chirality_.assign(g_.atom_count(), Chirality::kNone);
    for (int v = 0; v < static_cast<int>(g_.atom_count()); ++v) {
      const Atom &atom = g_.atom(v);
      if (atom.chirality == Chirality::kNone) continue;
      const std::vector<int> &ref = atom.stereo_neighbors;
      const std::vector<int> out = output_neighbor_order(v);
      if (ref.size() != out.size() || ref.size() < 3) continue;
      // Permutation taking ref positions to out positions.
      std::vector<int> perm(out.size(), -1);
      bool valid = true;
      for (std::size_t k = 0; k < out.size() && valid; ++k) {
        const auto it = std::find(ref.begin(), ref.end(), out[k]);
        if (it == ref.end()) {
          valid = false;
        } else {
          perm[k] = static_cast<int>(it - ref.begin());
        }
      }
      if (!valid) continue;
      std::vector<bool> visited(perm.size(), false);
      int transpositions = 0;
      for (std::size_t k = 0; k < perm.size(); ++k) {
        if (visited[k]) continue;
        int length = 0;
        for (std::size_t j = k; !visited[j]; j = static_cast<std::size_t>(perm[j])) {
          visited[j] = true;
          ++length;
        }
        transpositions += length - 1;
      }
      Chirality c = atom.chirality;
      if (transpositions % 2 == 1) {
        c = c == Chirality::kClockwise ? Chirality::kCounterClockwise
                                       : Chirality::kClockwise;
      }
      out_chirality_[static_cast<std::size_t>(v)] = c;
    }
  }

  std::string atom_text(int v) const {
    const Atom &atom = g_.atom(v);
    const int hydrogens = hydrogen_count(g_, v);
    const Chirality chirality =
        stereo_ ? out_chirality_[static_cast<std::size_t>(v)] : Chirality::kNone;
    std::string symbol(element_symbol(atom.element));
    if (atom.aromatic) {
      std::transform(symbol.begin(), symbol.end(), symbol.begin(),
                     [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    }
    const bool plain = is_organic_subset(atom.element) &&
                       (!atom.aromatic || is_aromatic_organic(atom.element)) &&
                       atom.formal_charge == 0 && atom.isotope == 0 &&
                       chirality == Chirality::kNone &&
                       hydrogens == implicit_hydrogens(g_, v);
    if (plain) return symbol;
    std::string text = "[";
    if (atom.isotope > 0) text += std::to_string(atom.isotope);
    text += symbol;
    if (chirality == Chirality::kCounterClockwise) text += "@";
    if (chirality == Chirality::kClockwise) text += "@@";
    if (hydrogens > 0) {
      text += 'H';
      if (hydrogens > 1) text += std::to_string(hydrogens);
    }
    if (atom.formal_charge != 0) {
      text += atom.formal_charge > 0 ? '+' : '-';
      const int magnitude = std::abs(atom.formal_charge);
      if (magnitude > 1) text += std::to_string(magnitude);
    }
    text += ']';
    return text;
  }

  // Bond symbol for a bond written from `from` towards its partner.
  std::string bond_text(int bond, int from) const {
    const Bond &b = g_.bond(bond);
    const bool both_aromatic = g_.atom(b.begin).aromatic && g_.atom(b.end).aromatic;
    switch (b.order) {
    case BondOrder::kDouble:
      return "=";
    case BondOrder::kTriple:
      return "#";
    case BondOrder::kAromatic:
      return both_aromatic ? "" : ":";
    case BondOrder::kSingle:
      break;
    }
    if (stereo_) {
      const BondDirection dir = out_direction_[static_cast<std::size_t>(bond)];
      if (dir != BondDirection::kNone) {
        // Directions were assigned relative to the first-written atom.
        const bool forward = first_written_[static_cast<std::size_t>(bond)] == from;
        const bool up = (dir == BondDirection::kUp) == forward;
        return up ? "/" : "\\";
      }
    }
    return both_aromatic ? "-" : "";
  }

  static std::string ring_label(int digit) {
    if (digit < 10) return std::string(1, static_cast<char>('0' + digit));
    return "%" + std::to_string(digit);
  }

  void write_component(int root, std::string &out) {
    // Iterative pre-order emission mirroring the planned DFS tree.
    struct Frame {
      int atom;
      std::size_t next_child;
    };
    std::vector<Frame> stack;
    auto emit = [&](int v) {
      out += atom_text(v);
      std::vector<int> closed;
      for (int rb : ring_bonds_[static_cast<std::size_t>(v)]) {
        const int partner = g_.bond(rb).other(v);
        if (position_[static_cast<std::size_t>(partner)] <
            position_[static_cast<std::size_t>(v)]) {
          const int digit = ring_digit_[static_cast<std::size_t>(rb)];
          out += ring_label(digit);
          closed.push_back(digit);
        } else {
          int digit = 1;
          while (digit_in_use_[static_cast<std::size_t>(digit)]) ++digit;
          if (digit > 99) throw std::runtime_error("more than 99 open rings");
          digit_in_use_[static_cast<std::size_t>(digit)] = true;
          ring_digit_[static_cast<std::size_t>(rb)] = digit;
          out += bond_text(rb, v);
          out += ring_label(digit);
        }
      }
      for (int digit : closed) digit_in_use_[static_cast<std::size_t>(digit)] = false;
      stack.push_back({v, 0});
    };
    emit(root);
    while (!stack.empty()) {
      Frame &frame = stack.back();
      const auto &kids = children_[static_cast<std::size_t>(frame.atom)];
      if (frame.next_child == kids.size()) {
        stack.pop_back();
        if (!stack.empty()) {
          const Frame &up = stack.back();
          // A finished child that was not the last one closes its branch.
          if (up.next_child < children_[static_cast<std::size_t>(up.atom)].size())
            out += ')';
        }
        continue;
      }
      const int child = kids[frame.next_child++];
      const bool last = frame.next_child == kids.size();
      if (!last) out += '(';
      out += bond_text(parent_bond_[static_cast<std::size_t>(child)], frame.atom);
      emit(child);
    }
  }

  const MolGraph &g_;
  std::span<const int> ranks_;
  bool stereo_;
  std::vector<int> parent_bond_;
  std::vector<int> parent_;
  std::vector<std::vector<int>> children_;
  std::vector<std::vector<int>> ring_bonds_;
  std::vector<int> position_;
  std::vector<int> preorder_;
  std::vector<int> roots_;
  std::vector<int> first_written_;
  std::vector<BondDirection> out_direction_;
  std::vector<Chirality> out_chirality_;
  std::array<bool, 101> digit_in_use_{};
  std::vector<int> ring_digit_;
};

}  // namespace

}  // namespace solcur

namespace solcur {

SmilesOutput write_smiles_traced(const MolGraph &g, std::span<const int> ranks,
                                 bool include_stereo) {
  return SmilesWriter(g, ranks, include_stereo).run();
}

std::string write_smiles(const MolGraph &g, std::span<const int> ranks,
                         bool include_stereo) {
  return write_smiles_traced(g, ranks, include_stereo).text;
}

std::string write_smiles(const MolGraph &g, bool include_stereo) {
  std::vector<int> ranks(g.atom_count());
  std::iota(ranks.begin(), ranks.end(), 0);
  return write_smiles(g, ranks, include_stereo);
}

MolGraph induced_subgraph(const MolGraph &g, std::span<const int> atoms) {
  std::vector<int> index(g.atom_count(), -1);
  for (std::size_t k = 0; k < atoms.size(); ++k)
    index[static_cast<std::size_t>(atoms[k])] = static_cast<int>(k);
  std::vector<Atom> new_atoms;
  new_atoms.reserve(atoms.size());
  for (int old : atoms) {
    Atom atom = g.atom(old);
    bool intact = true;
    for (int &nb : atom.stereo_neighbors) {
      if (nb == kImplicitHydrogen) continue;
      if (nb < 0 || index[static_cast<std::size_t>(nb)] < 0) {
        intact = false;
      } else {
        nb = index[static_cast<std::size_t>(nb)];
      }
    }
    if (!intact) {
      atom.chirality = Chirality::kNone;
      atom.stereo_neighbors.clear();
    }
    new_atoms.push_back(std::move(atom));
  }
  std::vector<Bond> new_bonds;
  for (const Bond &bond : g.bonds()) {
    const int b = index[static_cast<std::size_t>(bond.begin)];
    const int e = index[static_cast<std::size_t>(bond.end)];
    if (b < 0 || e < 0) continue;
    Bond copy = bond;
    copy.begin = b;
    copy.end = e;
    new_bonds.push_back(copy);
  }
  return MolGraph(std::move(new_atoms), std::move(new_bonds), g.source_text());
}

std::vector<MolGraph> components(const MolGraph &g) {
  const std::size_t n = g.atom_count();
  std::vector<int> label(n, -1);
  std::vector<std::vector<int>> groups;
  for (std::size_t start = 0; start < n; ++start) {
    if (label[start] >= 0) continue;
    const int id = static_cast<int>(groups.size());
    groups.emplace_back();
    std::vector<int> queue{static_cast<int>(start)};
    label[start] = id;
    while (!queue.empty()) {
      const int v = queue.back();
      queue.pop_back();
      groups.back().push_back(v);
      for (const Neighbor &nb : g.neighbors(v)) {
        if (label[static_cast<std::size_t>(nb.atom)] < 0) {
          label[static_cast<std::size_t>(nb.atom)] = id;
          queue.push_back(nb.atom);
        }
      }
    }
  }
  if (groups.size() == 1) return {g};
  std::vector<MolGraph> result;
  result.reserve(groups.size());
  for (auto &group : groups) {
    std::sort(group.begin(), group.end());
    result.push_back(induced_subgraph(g, group));
  }
  return result;
}

}  // namespace solcur
