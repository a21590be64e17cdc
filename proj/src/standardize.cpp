//
// solcur - solubility dataset curation and evaluation toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "solcur/standardize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

#include "solcur/decimal.hpp"
#include "solcur/elements.hpp"

namespace solcur {

std::string_view to_string(RejectReason reason) {
  switch (reason) {
  case RejectReason::kNone:
    return "none";
  case RejectReason::kMetal:
    return "metal";
  case RejectReason::kSingleHeavyAtom:
    return "single-heavy-atom";
  case RejectReason::kParseError:
    return "parse-error";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Canonical ranking

AtomInvariant atom_invariant(const MolGraph &g, int atom) {
  const Atom &a = g.atom(atom);
  return {a.element,      g.degree(atom), a.formal_charge,
          hydrogen_count(g, atom), a.aromatic,     a.isotope};
}

namespace {

using Classes = std::vector<int>;

int class_count(const Classes &cls) {
  return cls.empty() ? 0 : *std::max_element(cls.begin(), cls.end()) + 1;
}

Classes initial_classes(const MolGraph &g) {
  const int n = static_cast<int>(g.atom_count());
  std::vector<AtomInvariant> inv;
  inv.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) inv.push_back(atom_invariant(g, i));
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int x, int y) {
    return inv[static_cast<std::size_t>(x)] < inv[static_cast<std::size_t>(y)];
  });
  Classes cls(static_cast<std::size_t>(n), 0);
  int id = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (k > 0 && inv[static_cast<std::size_t>(order[k - 1])] !=
                     inv[static_cast<std::size_t>(order[k])])
      ++id;
    cls[static_cast<std::size_t>(order[k])] = id;
  }
  return cls;
}

// Splits classes by the sorted multiset of (bond order, neighbour class)
// until the partition is stable. Class order is preserved: an atom's new
// class sorts by (old class, neighbourhood).
Classes refine(const MolGraph &g, Classes cls) {
  const std::size_t n = g.atom_count();
  std::vector<std::vector<std::pair<int, int>>> signature(n);
  std::vector<int> order(n);
  int count = class_count(cls);
  while (true) {
    for (std::size_t i = 0; i < n; ++i) {
      auto &sig = signature[i];
      sig.clear();
      for (const Neighbor &nb : g.neighbors(static_cast<int>(i))) {
        sig.emplace_back(static_cast<int>(g.bond(nb.bond).order),
                         cls[static_cast<std::size_t>(nb.atom)]);
      }
      std::sort(sig.begin(), sig.end());
    }
    std::iota(order.begin(), order.end(), 0);
    auto less = [&](int x, int y) {
      const auto ux = static_cast<std::size_t>(x);
      const auto uy = static_cast<std::size_t>(y);
      if (cls[ux] != cls[uy]) return cls[ux] < cls[uy];
      return signature[ux] < signature[uy];
    };
    std::sort(order.begin(), order.end(), less);
    Classes next(n, 0);
    int id = 0;
    for (std::size_t k = 0; k < n; ++k) {
      if (k > 0 && less(order[k - 1], order[k])) ++id;
      next[static_cast<std::size_t>(order[k])] = id;
    }
    const int next_count = n == 0 ? 0 : id + 1;
    cls = std::move(next);
    if (next_count == count) break;
    count = next_count;
  }
  return cls;
}

// Moves atom v ahead of the other members of its class.
Classes individualize(const Classes &cls, int v) {
  const int target = cls[static_cast<std::size_t>(v)];
  Classes out(cls.size());
  for (std::size_t i = 0; i < cls.size(); ++i) {
    const int c = cls[i];
    if (c > target || (c == target && static_cast<int>(i) != v)) {
      out[i] = c + 1;
    } else {
      out[i] = c;
    }
  }
  return out;
}

bool has_stereo(const MolGraph &g) {
  for (const Atom &a : g.atoms()) {
    if (a.chirality != Chirality::kNone) return true;
  }
  for (const Bond &b : g.bonds()) {
    if (b.direction != BondDirection::kNone) return true;
  }
  return false;
}

class CanonicalSearch {
public:
  // Upper bound on explored leaves; beyond it the best labelling found so far
  // is used. Only reached by highly symmetric graphs that the orbit pruning
  // cannot collapse.
  static constexpr int kLeafBudget = 20000;

  explicit CanonicalSearch(const MolGraph &g)
      : g_(g), with_stereo_(has_stereo(g)) {}

  std::vector<int> run() {
    if (g_.atom_count() == 0) return {};
    std::vector<int> path;
    search(initial_classes(g_), path);
    return best_ranks_;
  }

  const std::string &plain() const { return best_plain_; }
  const std::string &stereo() const { return best_stereo_; }

private:
  void search(Classes cls, std::vector<int> &path) {
    cls = refine(g_, std::move(cls));
    const int n = static_cast<int>(cls.size());
    if (class_count(cls) == n) {
      leaf(cls);
      return;
    }
    // Target cell: the first class (in class order) with several members.
    std::vector<int> size(static_cast<std::size_t>(n), 0);
    for (int c : cls) ++size[static_cast<std::size_t>(c)];
    int target = 0;
    while (size[static_cast<std::size_t>(target)] < 2) ++target;
    std::vector<int> cell;
    for (int i = 0; i < n; ++i) {
      if (cls[static_cast<std::size_t>(i)] == target) cell.push_back(i);
    }

    std::vector<int> explored;
    for (int v : cell) {
      if (leaves_ >= kLeafBudget) return;
      if (!explored.empty() && in_explored_orbit(v, explored, path)) continue;
      path.push_back(v);
      search(individualize(cls, v), path);
      path.pop_back();
      explored.push_back(v);
    }
  }

  // True if some automorphism fixing `path` pointwise maps an explored
  // candidate onto v.
  bool in_explored_orbit(int v, const std::vector<int> &explored,
                         const std::vector<int> &path) const {
    const std::size_t n = g_.atom_count();
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
      while (parent[static_cast<std::size_t>(x)] != x) {
        parent[static_cast<std::size_t>(x)] =
            parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
        x = parent[static_cast<std::size_t>(x)];
      }
      return x;
    };
    bool any = false;
    for (const auto &gamma : automorphisms_) {
      const bool fixes = std::all_of(path.begin(), path.end(), [&](int p) {
        return gamma[static_cast<std::size_t>(p)] == p;
      });
      if (!fixes) continue;
      any = true;
      for (std::size_t i = 0; i < n; ++i) {
        const int a = find(static_cast<int>(i));
        const int b = find(gamma[i]);
        if (a != b) parent[static_cast<std::size_t>(a)] = b;
      }
    }
    if (!any) return false;
    const int root = find(v);
    return std::any_of(explored.begin(), explored.end(),
                       [&](int u) { return find(u) == root; });
  }

  void leaf(const Classes &ranks) {
    ++leaves_;
    SmilesOutput plain = write_smiles_traced(g_, ranks, false);
    std::string stereo =
        with_stereo_ ? write_smiles(g_, ranks, true) : plain.text;
    if (best_ranks_.empty()) {
      accept(ranks, std::move(plain), std::move(stereo));
      return;
    }
    const auto cmp = std::tie(plain.text, stereo) <=> std::tie(best_plain_, best_stereo_);
    if (cmp < 0) {
      accept(ranks, std::move(plain), std::move(stereo));
    } else if (cmp == 0) {
      std::vector<int> gamma(g_.atom_count());
      bool identity = true;
      for (std::size_t k = 0; k < best_order_.size(); ++k) {
        gamma[static_cast<std::size_t>(best_order_[k])] = plain.atom_order[k];
        if (best_order_[k] != plain.atom_order[k]) identity = false;
      }
      if (!identity) automorphisms_.push_back(std::move(gamma));
    }
  }

  void accept(const Classes &ranks, SmilesOutput plain, std::string stereo) {
    best_ranks_ = ranks;
    best_plain_ = std::move(plain.text);
    best_order_ = std::move(plain.atom_order);
    best_stereo_ = std::move(stereo);
    // Automorphisms found so far remain valid symmetries of the graph.
  }

  const MolGraph &g_;
  bool with_stereo_;
  int leaves_ = 0;
  std::vector<int> best_ranks_;
  std::vector<int> best_order_;
  std::string best_plain_;
  std::string best_stereo_;
  std::vector<std::vector<int>> automorphisms_;
};

}  // namespace

std::vector<int> canonical_ranks(const MolGraph &g) {
  return CanonicalSearch(g).run();
}

StructureKey canonical_key(const MolGraph &g) {
  CanonicalSearch search(g);
  search.run();
  return {search.stereo(), search.plain()};
}

std::string record_key(const StructureKey &key, double value) {
  if (!std::isfinite(value))
    throw NonFiniteValue("record_key: value is not finite");
  return key.plain_key + "|" + format_fixed(value, 2);
}

// ---------------------------------------------------------------------------
// Fragment handling, neutralization, filtering

MolGraph strip_salts(const MolGraph &g) {
  std::vector<MolGraph> parts = components(g);
  if (parts.size() <= 1) return g;

  struct Candidate {
    std::size_t index;
    int heavy;
    double mass;
  };
  std::vector<Candidate> candidates;
  for (std::size_t i = 0; i < parts.size(); ++i)
    candidates.push_back({i, heavy_atom_count(parts[i]), molecular_mass(parts[i])});

  const int max_heavy =
      std::max_element(candidates.begin(), candidates.end(),
                       [](const Candidate &a, const Candidate &b) { return a.heavy < b.heavy; })
          ->heavy;
  std::erase_if(candidates, [&](const Candidate &c) { return c.heavy != max_heavy; });

  // Masses are compared at a tolerance well below any element mass gap.
  constexpr double kMassTolerance = 1e-6;
  const double max_mass =
      std::max_element(candidates.begin(), candidates.end(),
                       [](const Candidate &a, const Candidate &b) { return a.mass < b.mass; })
          ->mass;
  std::erase_if(candidates, [&](const Candidate &c) { return c.mass < max_mass - kMassTolerance; });

  if (candidates.size() == 1) return parts[candidates.front().index];
  std::size_t best = candidates.front().index;
  std::string best_key = canonical_key(parts[best]).plain_key;
  for (std::size_t k = 1; k < candidates.size(); ++k) {
    std::string key = canonical_key(parts[candidates[k].index]).plain_key;
    if (key < best_key) {
      best_key = std::move(key);
      best = candidates[k].index;
    }
  }
  return parts[best];
}

NeutralizeResult neutralize(const MolGraph &g) {
  std::vector<Atom> atoms(g.atoms().begin(), g.atoms().end());
  std::vector<Bond> bonds(g.bonds().begin(), g.bonds().end());
  int changed = 0;
  for (int i = 0; i < static_cast<int>(g.atom_count()); ++i) {
    const Atom &atom = g.atom(i);
    const int charge = atom.formal_charge;
    if (charge != 1 && charge != -1) continue;
    const bool paired = std::any_of(
        g.neighbors(i).begin(), g.neighbors(i).end(), [&](const Neighbor &nb) {
          return g.atom(nb.atom).formal_charge * charge < 0;
        });
    if (paired) continue;

    const int hydrogens = hydrogen_count(g, i);
    int new_h = hydrogens;
    if (charge == 1) {
      if (hydrogens < 1) continue;
      new_h = hydrogens - 1;
    } else {
      if (atom.element != 7 && atom.element != 8 && atom.element != 16) continue;
      const auto valences = default_valences(atom.element);
      const int used = bond_order_sum(g, i) + hydrogens + 1;
      if (valences.empty() || used > valences.back()) continue;
      new_h = hydrogens + 1;
    }
    Atom &out = atoms[static_cast<std::size_t>(i)];
    out.formal_charge = 0;
    out.explicit_h = new_h;
    if ((hydrogens > 0) != (new_h > 0)) {
      // The stereo reference order mentioned (or lacked) this hydrogen.
      out.chirality = Chirality::kNone;
      out.stereo_neighbors.erase(
          std::remove(out.stereo_neighbors.begin(), out.stereo_neighbors.end(),
                      kImplicitHydrogen),
          out.stereo_neighbors.end());
    }
    ++changed;
  }
  return {MolGraph(std::move(atoms), std::move(bonds), g.source_text()), changed};
}

bool is_organic_element(int z) {
  switch (z) {
  case 1:   // H
  case 5:   // B
  case 6:   // C
  case 7:   // N
  case 8:   // O
  case 9:   // F
  case 14:  // Si
  case 15:  // P
  case 16:  // S
  case 17:  // Cl
  case 34:  // Se
  case 35:  // Br
  case 53:  // I
    return true;
  default:
    return false;
  }
}

OrganicClass classify_organic(const MolGraph &g) {
  for (const Atom &a : g.atoms()) {
    if (!is_organic_element(a.element)) return OrganicClass::kMetal;
  }
  if (heavy_atom_count(g) < 2) return OrganicClass::kSingleHeavyAtom;
  return OrganicClass::kAccepted;
}

StandardizedMolecule standardize(std::string_view smiles,
                                 const StandardizeOptions &options) {
  StandardizedMolecule result;
  MolGraph parsed;
  try {
    parsed = parse_smiles(smiles);
  } catch (const SmilesError &e) {
    result.report.rejected_reason = RejectReason::kParseError;
    result.error = e.what();
    return result;
  }
  result.report.removed_fragments =
      static_cast<int>(components(parsed).size()) - 1;
  MolGraph main = strip_salts(parsed);
  if (options.neutralize) {
    NeutralizeResult neutral = neutralize(main);
    result.report.neutralized_atoms = neutral.changed_atoms;
    main = std::move(neutral.graph);
  }
  switch (classify_organic(main)) {
  case OrganicClass::kMetal:
    result.report.rejected_reason = RejectReason::kMetal;
    break;
  case OrganicClass::kSingleHeavyAtom:
    result.report.rejected_reason = RejectReason::kSingleHeavyAtom;
    break;
  case OrganicClass::kAccepted:
    result.key = canonical_key(main);
    break;
  }
  result.graph = std::move(main);
  return result;
}

}  // namespace solcur
