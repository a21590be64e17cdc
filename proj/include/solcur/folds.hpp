//
// solcur - solubility dataset curation and evaluation toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SOLCUR_FOLDS_HPP_
#define SOLCUR_FOLDS_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "solcur/dataset.hpp"

namespace solcur {

enum class SplitRole {
  kTrain,
  kEarlyStop,
  kEval,
};

std::string_view to_string(SplitRole role);

class FewerMoleculesThanFolds : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

class BadFoldIndex : public std::out_of_range {
public:
  using std::out_of_range::out_of_range;
};

// Molecule-level k-fold plan. Every plain key sits in exactly one fold; for
// each fold the remaining molecules are split about 90/10 into train and
// early-stop, so the whole set divides 81/9/10.
struct FoldPlan {
  int k = 10;
  std::uint64_t seed = 0;
  std::map<std::string, int> assignment;
  // internal[f][key] for every key outside fold f.
  std::vector<std::map<std::string, SplitRole>> internal;

  // Role of a molecule when fold f is evaluated.
  SplitRole role(int fold, const std::string &key) const;
  std::vector<std::string> molecules(int fold, SplitRole role) const;

  friend bool operator==(const FoldPlan &, const FoldPlan &) = default;
};

// Sorts the unique keys, shuffles them with Xoshiro256(seed), and deals them
// round-robin into k folds. Fold f's complement is shuffled with a seed
// derived from (seed, f); its first round(10%) molecules become early-stop.
FoldPlan assign_folds(std::vector<std::string> keys, int k, std::uint64_t seed);
FoldPlan assign_folds(const DataTable &t, int k, std::uint64_t seed);

struct Split {
  DataTable train;
  DataTable earlystop;
  DataTable eval;
};

// Record order within each part follows the input table.
Split materialize_split(const DataTable &t, const FoldPlan &plan, int fold_index);

// CSV with one row per (fold, molecule): plain_key, fold, role. The header
// line carries k and seed as "# k=<k> seed=<seed>".
std::string fold_plan_csv(const FoldPlan &plan);
void write_fold_plan(const FoldPlan &plan, const std::filesystem::path &path);
FoldPlan read_fold_plan(const std::filesystem::path &path);

}  // namespace solcur

#endif  // SOLCUR_FOLDS_HPP_
