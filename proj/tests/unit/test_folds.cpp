//
// solcur - solubility dataset curation and evaluation toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>

#include "doctest.h"
#include "solcur/folds.hpp"

using namespace solcur;

namespace {

std::vector<std::string> synthetic_keys(std::size_t n) {
  std::vector<std::string> keys;
  for (std::size_t i = 0; i < n; ++i) keys.push_back("M" + std::to_string(i));
  return keys;
}

DataTable table_with_repeats(std::size_t molecules, std::mt19937_64 &rng) {
  DataTable t{"T", {}};
  for (std::size_t i = 0; i < molecules; ++i) {
    const int copies = 1 + static_cast<int>(rng() % 3);
    for (int c = 0; c < copies; ++c) {
      SolubilityRecord r;
      r.raw_smiles = "M" + std::to_string(i);
      r.key = StructureKey{r.raw_smiles + (c ? "@" : ""), r.raw_smiles};
      r.value = static_cast<double>(c);
      r.set_id = "T";
      t.records.push_back(r);
    }
  }
  std::shuffle(t.records.begin(), t.records.end(), rng);
  return t;
}

}  // namespace

TEST_CASE("ten molecules, ten folds") {
  const FoldPlan plan = assign_folds(synthetic_keys(10), 10, 1);
  std::map<int, int> per_fold;
  for (const auto &[key, f] : plan.assignment) ++per_fold[f];
  CHECK(per_fold.size() == 10);
  for (const auto &[f, n] : per_fold) CHECK(n == 1);
  for (int f = 0; f < 10; ++f) {
    CHECK(plan.molecules(f, SplitRole::kEval).size() == 1);
    CHECK(plan.molecules(f, SplitRole::kEarlyStop).size() == 1);  // round(0.9)
    CHECK(plan.molecules(f, SplitRole::kTrain).size() == 8);
  }
}

TEST_CASE("1000 molecules give 100 / 810 / 90 per fold") {
  const FoldPlan plan = assign_folds(synthetic_keys(1000), 10, 42);
  for (int f = 0; f < 10; ++f) {
    CAPTURE(f);
    const auto eval = plan.molecules(f, SplitRole::kEval);
    const auto train = plan.molecules(f, SplitRole::kTrain);
    const auto stop = plan.molecules(f, SplitRole::kEarlyStop);
    CHECK(eval.size() == 100);
    CHECK(train.size() >= 809);
    CHECK(train.size() <= 811);
    CHECK(stop.size() >= 89);
    CHECK(stop.size() <= 91);
    CHECK(eval.size() + train.size() + stop.size() == 1000);
  }
}

TEST_CASE("fold sizes differ by at most one and plans are seed-deterministic") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const int k = 2 + static_cast<int>(rng() % 9);
    const std::size_t n = static_cast<std::size_t>(k) + rng() % 200;
    const std::uint64_t seed = rng();
    const FoldPlan plan = assign_folds(synthetic_keys(n), k, seed);
    std::vector<int> sizes(static_cast<std::size_t>(k), 0);
    for (const auto &[key, f] : plan.assignment) ++sizes[static_cast<std::size_t>(f)];
    const auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
    CHECK(*hi - *lo <= 1);
    CHECK(plan.assignment.size() == n);

    // Input order and duplicate keys do not matter.
    auto keys = synthetic_keys(n);
    const auto repeats = synthetic_keys(n / 3);
    keys.insert(keys.end(), repeats.begin(), repeats.end());
    std::shuffle(keys.begin(), keys.end(), rng);
    CHECK(assign_folds(keys, k, seed) == plan);
    CHECK_FALSE(assign_folds(synthetic_keys(n), k, seed + 1).assignment == plan.assignment);
  }
}

TEST_CASE("records of one molecule share fold and role") {
  std::mt19937_64 rng(3);
  const DataTable t = table_with_repeats(60, rng);
  const FoldPlan plan = assign_folds(t, 5, 9);
  for (int f = 0; f < 5; ++f) {
    const Split s = materialize_split(t, plan, f);
    CHECK(s.train.size() + s.earlystop.size() + s.eval.size() == t.size());
    std::map<std::string, std::set<int>> where;
    for (const auto &r : s.train.records) where[r.key->plain_key].insert(0);
    for (const auto &r : s.earlystop.records) where[r.key->plain_key].insert(1);
    for (const auto &r : s.eval.records) where[r.key->plain_key].insert(2);
    for (const auto &[key, parts] : where) CHECK(parts.size() == 1);
    for (const auto &r : s.eval.records) CHECK(plan.assignment.at(r.key->plain_key) == f);
    // Record order follows the input table.
    std::vector<std::size_t> positions;
    for (const auto &r : s.train.records) {
      const auto it = std::find(t.records.begin(), t.records.end(), r);
      positions.push_back(static_cast<std::size_t>(it - t.records.begin()));
    }
    CHECK(std::is_sorted(positions.begin(), positions.end()));
  }
  // Every molecule is evaluated exactly once across folds.
  std::map<std::string, int> evaluated;
  for (int f = 0; f < 5; ++f)
    for (const auto &key : plan.molecules(f, SplitRole::kEval)) ++evaluated[key];
  CHECK(evaluated.size() == 60);
  for (const auto &[key, n] : evaluated) CHECK(n == 1);
}

TEST_CASE("errors") {
  CHECK_THROWS_AS(assign_folds(synthetic_keys(9), 10, 1), FewerMoleculesThanFolds);
  auto keys = synthetic_keys(5);
  keys.push_back("M0");
  keys.push_back("M1");
  keys.push_back("M2");
  keys.push_back("M3");
  keys.push_back("M4");
  CHECK_THROWS_AS(assign_folds(keys, 6, 1), FewerMoleculesThanFolds);
  CHECK_THROWS_AS(assign_folds(synthetic_keys(5), 1, 1), std::invalid_argument);

  std::mt19937_64 rng(1);
  const DataTable t = table_with_repeats(20, rng);
  const FoldPlan plan = assign_folds(t, 4, 1);
  CHECK_THROWS_AS(materialize_split(t, plan, 4), BadFoldIndex);
  CHECK_THROWS_AS(materialize_split(t, plan, -1), BadFoldIndex);
}

TEST_CASE("fold plan file round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "solcur_test_folds";
  std::filesystem::create_directories(dir);
  auto keys = synthetic_keys(37);
  keys.push_back("C(=O)O,odd");
  const FoldPlan plan = assign_folds(keys, 7, 0xFFFFFFFFFFFFFFFFULL);
  write_fold_plan(plan, dir / "plan.csv");
  CHECK(read_fold_plan(dir / "plan.csv") == plan);
  const std::string text = fold_plan_csv(plan);
  CHECK(text.starts_with("# k=7 seed=18446744073709551615\nplain_key,fold,role\n"));

  auto write = [&](const std::string &s) {
    write_file(dir / "bad.csv", s);
    return dir / "bad.csv";
  };
  CHECK_THROWS_AS(read_fold_plan(write("plain_key,fold,role\n")), UnreadableRow);
  CHECK_THROWS_AS(read_fold_plan(write("# k=x seed=1\nplain_key,fold,role\n")), UnreadableRow);
  CHECK_THROWS_AS(read_fold_plan(write("# k=3 seed=1\nkey,fold\n")), MissingColumn);
  CHECK_THROWS_AS(read_fold_plan(write("# k=3 seed=1\nplain_key,fold,role\nA,3,eval\n")),
                  UnreadableRow);
  CHECK_THROWS_AS(read_fold_plan(write("# k=3 seed=1\nplain_key,fold,role\nA,0,test\n")),
                  UnreadableRow);
}
