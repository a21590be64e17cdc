//
// solcur - solubility dataset curation and evaluation toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "solcur/folds.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <span>
#include <sstream>

#include "solcur/random.hpp"

namespace solcur {

namespace {

template <class T>
bool parse_integer(std::string_view text, T &out) {
  const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  return res.ec == std::errc() && res.ptr == text.data() + text.size();
}

}  // namespace

std::string_view to_string(SplitRole role) {
  switch (role) {
    case SplitRole::kTrain: return "train";
    case SplitRole::kEarlyStop: return "earlystop";
    case SplitRole::kEval: return "eval";
  }
  return "?";
}

SplitRole FoldPlan::role(int fold, const std::string &key) const {
  const auto it = assignment.find(key);
  if (it == assignment.end()) throw std::out_of_range("molecule not in plan: " + key);
  if (it->second == fold) return SplitRole::kEval;
  return internal.at(static_cast<std::size_t>(fold)).at(key);
}

std::vector<std::string> FoldPlan::molecules(int fold, SplitRole wanted) const {
  std::vector<std::string> out;
  for (const auto &[key, f] : assignment) {
    if (role(fold, key) == wanted) out.push_back(key);
  }
  return out;
}

FoldPlan assign_folds(std::vector<std::string> keys, int k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("fold count must be at least 2");
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  if (keys.size() < static_cast<std::size_t>(k)) {
    throw FewerMoleculesThanFolds(std::to_string(keys.size()) + " molecules for " +
                                  std::to_string(k) + " folds");
  }
  Xoshiro256 rng(seed);
  shuffle(std::span<std::string>(keys), rng);

  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  std::vector<std::vector<std::string>> folds(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const int f = static_cast<int>(i % static_cast<std::size_t>(k));
    plan.assignment[keys[i]] = f;
    folds[static_cast<std::size_t>(f)].push_back(keys[i]);
  }
  plan.internal.resize(static_cast<std::size_t>(k));
  for (int f = 0; f < k; ++f) {
    // Complement in the shuffled order, then reshuffled per fold.
    std::vector<std::string> rest;
    for (const std::string &key : keys) {
      if (plan.assignment[key] != f) rest.push_back(key);
    }
    Xoshiro256 fold_rng(derive_seed(seed, static_cast<std::uint64_t>(f)));
    shuffle(std::span<std::string>(rest), fold_rng);
    const auto n_stop = static_cast<std::size_t>(std::lround(0.1 * static_cast<double>(rest.size())));
    auto &roles = plan.internal[static_cast<std::size_t>(f)];
    for (std::size_t i = 0; i < rest.size(); ++i)
      roles[rest[i]] = i < n_stop ? SplitRole::kEarlyStop : SplitRole::kTrain;
  }
  return plan;
}

FoldPlan assign_folds(const DataTable &t, int k, std::uint64_t seed) {
  std::vector<std::string> keys;
  keys.reserve(t.records.size());
  for (const SolubilityRecord &r : t.records) {
    if (!r.key) throw std::invalid_argument("record without structure key");
    keys.push_back(r.key->plain_key);
  }
  return assign_folds(std::move(keys), k, seed);
}

Split materialize_split(const DataTable &t, const FoldPlan &plan, int fold_index) {
  if (fold_index < 0 || fold_index >= plan.k)
    throw BadFoldIndex("fold " + std::to_string(fold_index) + " outside [0, " +
                       std::to_string(plan.k) + ")");
  Split s{{t.name, {}}, {t.name, {}}, {t.name, {}}};
  for (const SolubilityRecord &r : t.records) {
    if (!r.key) throw std::invalid_argument("record without structure key");
    switch (plan.role(fold_index, r.key->plain_key)) {
      case SplitRole::kTrain: s.train.records.push_back(r); break;
      case SplitRole::kEarlyStop: s.earlystop.records.push_back(r); break;
      case SplitRole::kEval: s.eval.records.push_back(r); break;
    }
  }
  return s;
}

std::string fold_plan_csv(const FoldPlan &plan) {
  std::string out = "# k=" + std::to_string(plan.k) + " seed=" + std::to_string(plan.seed) + "\n";
  out += "plain_key,fold,role\n";
  for (int f = 0; f < plan.k; ++f) {
    for (const auto &[key, home] : plan.assignment) {
      out += csv_field(key) + ',' + std::to_string(f) + ',' +
             std::string(to_string(plan.role(f, key))) + '\n';
    }
  }
  return out;
}

void write_fold_plan(const FoldPlan &plan, const std::filesystem::path &path) {
  write_file(path, fold_plan_csv(plan));
}

FoldPlan read_fold_plan(const std::filesystem::path &path) {
  std::string text = read_file(path);
  FoldPlan plan;
  if (!text.starts_with("# k=")) throw UnreadableRow(0, "fold plan header missing");
  const std::size_t eol = text.find('\n');
  const std::string meta = text.substr(0, eol);
  {
    std::istringstream in(meta.substr(2));
    std::string k_field, seed_field;
    in >> k_field >> seed_field;
    const bool ok = k_field.starts_with("k=") && seed_field.starts_with("seed=") &&
                    parse_integer(k_field.substr(2), plan.k) &&
                    parse_integer(seed_field.substr(5), plan.seed);
    if (!ok || plan.k < 2) throw UnreadableRow(0, "bad fold plan header");
  }
  const auto rows = parse_csv(std::string_view(text).substr(eol + 1));
  if (rows.empty() || rows[0] != std::vector<std::string>{"plain_key", "fold", "role"})
    throw MissingColumn("plain_key,fold,role");
  plan.internal.resize(static_cast<std::size_t>(plan.k));
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto &row = rows[r];
    if (row.size() != 3) throw UnreadableRow(r, "field count");
    int f = -1;
    if (!parse_integer(row[1], f) || f < 0 || f >= plan.k) throw UnreadableRow(r, "fold index out of range");
    if (row[2] == "eval") {
      plan.assignment[row[0]] = f;
    } else if (row[2] == "train" || row[2] == "earlystop") {
      plan.internal[static_cast<std::size_t>(f)][row[0]] =
          row[2] == "train" ? SplitRole::kTrain : SplitRole::kEarlyStop;
    } else {
      throw UnreadableRow(r, "unknown role " + row[2]);
    }
  }
  return plan;
}

}  // namespace solcur
