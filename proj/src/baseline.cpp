//
// solcur - solubility dataset curation and evaluation toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "solcur/baseline.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <tuple>
#include <unordered_map>

#include "solcur/decimal.hpp"
#include "solcur/random.hpp"
#include "solcur/standardize.hpp"

namespace solcur {

namespace {

constexpr std::uint64_t kHoldoutStream = 0x686f6c646f7574ULL;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t combine(std::uint64_t h, std::uint64_t v) {
  return mix64(h ^ (v + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2)));
}

std::uint64_t invariant_hash(const AtomInvariant &a) {
  std::uint64_t h = 0x736f6c637572ULL;
  for (std::int64_t v : {std::int64_t{a.element}, std::int64_t{a.degree},
                         std::int64_t{a.charge}, std::int64_t{a.hydrogens},
                         std::int64_t{a.aromatic}, std::int64_t{a.isotope}})
    h = combine(h, static_cast<std::uint64_t>(v));
  return h;
}

void check_config(const ModelConfig &c) {
  if (!(c.lambda >= 0.0) || !std::isfinite(c.lambda))
    throw std::invalid_argument("lambda must be finite and non-negative");
  if (c.radius < 0 || c.radius > 3) throw std::invalid_argument("radius must be in [0, 3]");
  if (c.n_bits < 1 || !std::has_single_bit(static_cast<unsigned>(c.n_bits)))
    throw std::invalid_argument("n_bits must be a power of two");
}

using Rows = std::vector<Eigen::Index>;

struct Fold {
  Rows train;
  Rows eval;
};

Eigen::VectorXd fit_predict(const Eigen::MatrixXd &X, const Eigen::VectorXd &y,
                            const Eigen::VectorXd &w, double lambda, const Rows &train,
                            const Rows &eval) {
  const RidgeModel m = fit_ridge(X(train, Eigen::all), y(train), w(train), lambda);
  return m.predict(X(eval, Eigen::all));
}

// Pooled RMSE over every eval row of the scheme.
double cv_rmse(const Eigen::MatrixXd &X, const Eigen::VectorXd &y, const Eigen::VectorXd &w,
               double lambda, const std::vector<Fold> &scheme) {
  double ss = 0.0;
  std::size_t n = 0;
  for (const Fold &f : scheme) {
    if (f.eval.empty()) continue;
    const Eigen::VectorXd pred = fit_predict(X, y, w, lambda, f.train, f.eval);
    ss += (pred - y(f.eval)).squaredNorm();
    n += f.eval.size();
  }
  return std::sqrt(ss / static_cast<double>(n));
}

std::size_t argmin_candidate(const HpoProblem &p, std::size_t limit, const Eigen::VectorXd &w,
                             const std::vector<Fold> &scheme, double *best_value) {
  std::size_t best = 0;
  double best_rmse = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < limit; ++c) {
    const auto &cand = p.candidates[c];
    const double r = cv_rmse(p.designs[cand.design], p.y, w, cand.lambda, scheme);
    if (r < best_rmse) {
      best_rmse = r;
      best = c;
    }
  }
  if (best_value) *best_value = best_rmse;
  return best;
}

}  // namespace

std::size_t fold_identifier(std::uint64_t id, int n_bits) {
  if (n_bits <= 1) return 0;
  const int shift = 64 - std::countr_zero(static_cast<unsigned>(n_bits));
  return static_cast<std::size_t>((id * kFoldMultiplier) >> shift);
}

FeatureVector featurize(const MolGraph &g, int radius, int n_bits) {
  check_config(ModelConfig{1.0, radius, n_bits});
  FeatureVector fv;
  fv.n_bits = n_bits;
  fv.radius = radius;
  fv.counts.assign(static_cast<std::size_t>(n_bits), 0);
  const int n = static_cast<int>(g.atom_count());
  std::vector<std::uint64_t> ids(static_cast<std::size_t>(n)), next(ids.size());
  for (int i = 0; i < n; ++i) ids[static_cast<std::size_t>(i)] = invariant_hash(atom_invariant(g, i));
  for (int r = 0;; ++r) {
    for (int i = 0; i < n; ++i) {
      if (g.atom(i).element == 1) continue;
      ++fv.counts[fold_identifier(ids[static_cast<std::size_t>(i)], n_bits)];
    }
    if (r == radius) break;
    for (int i = 0; i < n; ++i) {
      std::vector<std::pair<int, std::uint64_t>> env;
      for (const Neighbor &nb : g.neighbors(i))
        env.emplace_back(static_cast<int>(g.bond(nb.bond).order),
                         ids[static_cast<std::size_t>(nb.atom)]);
      std::sort(env.begin(), env.end());
      std::uint64_t h = combine(static_cast<std::uint64_t>(r + 1), ids[static_cast<std::size_t>(i)]);
      for (const auto &[order, id] : env) h = combine(combine(h, static_cast<std::uint64_t>(order)), id);
      next[static_cast<std::size_t>(i)] = h;
    }
    ids.swap(next);
  }
  return fv;
}

double RidgeModel::predict_row(const Eigen::Ref<const Eigen::RowVectorXd> &x) const {
  if (x.size() != coefficients.size()) throw DimensionMismatch("feature length mismatch");
  return intercept + x.dot(coefficients);
}

Eigen::VectorXd RidgeModel::predict(const Eigen::Ref<const Eigen::MatrixXd> &X) const {
  if (X.cols() != coefficients.size()) throw DimensionMismatch("feature length mismatch");
  return (X * coefficients).array() + intercept;
}

RidgeModel fit_ridge(const Eigen::Ref<const Eigen::MatrixXd> &X,
                     const Eigen::Ref<const Eigen::VectorXd> &y,
                     const Eigen::Ref<const Eigen::VectorXd> &sample_weights, double lambda) {
  const Eigen::Index n = X.rows(), p = X.cols();
  if (y.size() != n || sample_weights.size() != n)
    throw DimensionMismatch("X has " + std::to_string(n) + " rows, y " + std::to_string(y.size()) +
                            ", weights " + std::to_string(sample_weights.size()));
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("lambda must be finite and non-negative");
  if (n == 0) throw std::invalid_argument("no training rows");
  if ((sample_weights.array() < 0.0).any() || !(sample_weights.sum() > 0.0))
    throw std::invalid_argument("sample weights must be non-negative with a positive sum");

  const double wsum = sample_weights.sum();
  const Eigen::RowVectorXd xbar = (sample_weights.transpose() * X) / wsum;
  const double ybar = sample_weights.dot(y) / wsum;
  const Eigen::VectorXd sw = sample_weights.cwiseSqrt();

  RidgeModel m;
  m.lambda = lambda;
  if (p == 0) {
    m.coefficients = Eigen::VectorXd(0);
    m.intercept = ybar;
    return m;
  }
  Eigen::MatrixXd A(n + p, p);
  A.topRows(n) = sw.asDiagonal() * (X.rowwise() - xbar);
  A.bottomRows(p) = std::sqrt(lambda) * Eigen::MatrixXd::Identity(p, p);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n + p);
  b.head(n) = sw.cwiseProduct(y.array().matrix() - Eigen::VectorXd::Constant(n, ybar));

  if (lambda > 0.0) {
    m.coefficients = A.colPivHouseholderQr().solve(b);
  } else {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A.topRows(n));
    m.coefficients = cod.solve(b.head(n));
    m.rank_deficient = cod.rank() < p;
  }
  m.intercept = ybar - xbar.dot(m.coefficients);
  return m;
}

RidgeModel fit_ridge(const Eigen::Ref<const Eigen::MatrixXd> &X,
                     const Eigen::Ref<const Eigen::VectorXd> &y, double lambda) {
  return fit_ridge(X, y, Eigen::VectorXd::Ones(X.rows()), lambda);
}

std::string describe(const ModelConfig &c) {
  return "lambda=" + format_shortest(c.lambda) + " radius=" + std::to_string(c.radius) +
         " n_bits=" + std::to_string(c.n_bits);
}

HpoConfigSpace::HpoConfigSpace(std::vector<ModelConfig> configs) : configs_(std::move(configs)) {
  if (configs_.empty()) throw std::invalid_argument("empty hyperparameter space");
  std::set<std::tuple<double, int, int>> seen;
  for (const ModelConfig &c : configs_) {
    check_config(c);
    if (!seen.emplace(c.lambda, c.radius, c.n_bits).second)
      throw std::invalid_argument("duplicate hyperparameter config: " + describe(c));
  }
}

HpoConfigSpace HpoConfigSpace::grid(const std::vector<double> &lambdas,
                                    const std::vector<int> &radii,
                                    const std::vector<int> &n_bits) {
  std::vector<ModelConfig> configs;
  for (int bits : n_bits)
    for (int r : radii)
      for (double l : lambdas) configs.push_back({l, r, bits});
  return HpoConfigSpace(std::move(configs));
}

Eigen::MatrixXd feature_matrix(const DataTable &t, int radius, int n_bits) {
  Eigen::MatrixXd X(static_cast<Eigen::Index>(t.records.size()), n_bits);
  std::unordered_map<std::string, Eigen::RowVectorXd> cache;
  for (std::size_t i = 0; i < t.records.size(); ++i) {
    const SolubilityRecord &r = t.records[i];
    if (!r.key) throw std::invalid_argument("record without structure key");
    auto it = cache.find(r.key->plain_key);
    if (it == cache.end()) {
      const FeatureVector fv = featurize(parse_smiles(r.key->plain_key), radius, n_bits);
      Eigen::RowVectorXd row(n_bits);
      for (int b = 0; b < n_bits; ++b) row(b) = fv.counts[static_cast<std::size_t>(b)];
      it = cache.emplace(r.key->plain_key, std::move(row)).first;
    }
    X.row(static_cast<Eigen::Index>(i)) = it->second;
  }
  return X;
}

std::vector<FoldPredictions> evaluate_cv(const DataTable &t, const FoldPlan &plan,
                                         const ModelConfig &config) {
  check_config(config);
  const Eigen::MatrixXd X = feature_matrix(t, config.radius, config.n_bits);
  Eigen::VectorXd y(X.rows()), w(X.rows());
  for (std::size_t i = 0; i < t.records.size(); ++i) {
    y(static_cast<Eigen::Index>(i)) = t.records[i].value;
    w(static_cast<Eigen::Index>(i)) = t.records[i].weight;
  }
  std::vector<FoldPredictions> out;
  for (int f = 0; f < plan.k; ++f) {
    Rows train, eval;
    for (std::size_t i = 0; i < t.records.size(); ++i) {
      const SplitRole role = plan.role(f, t.records[i].key->plain_key);
      if (role == SplitRole::kTrain) train.push_back(static_cast<Eigen::Index>(i));
      if (role == SplitRole::kEval) eval.push_back(static_cast<Eigen::Index>(i));
    }
    FoldPredictions fp;
    fp.fold = f;
    if (!eval.empty()) {
      if (train.empty()) throw std::invalid_argument("fold " + std::to_string(f) + " has no training data");
      const Eigen::VectorXd pred = fit_predict(X, y, w, config.lambda, train, eval);
      for (std::size_t j = 0; j < eval.size(); ++j) {
        const SolubilityRecord &r = t.records[static_cast<std::size_t>(eval[j])];
        fp.pairs.push_back({r.key->plain_key, pred(static_cast<Eigen::Index>(j)), r.value, r.weight});
      }
    }
    out.push_back(std::move(fp));
  }
  return out;
}

std::vector<EvalPair> concatenate(const std::vector<FoldPredictions> &folds) {
  std::vector<EvalPair> out;
  for (const FoldPredictions &f : folds) out.insert(out.end(), f.pairs.begin(), f.pairs.end());
  return out;
}

std::string_view to_string(HpoProtocol p) {
  return p == HpoProtocol::kNaive ? "naive" : "nested";
}

namespace {

// Selection restricted to the first `limit` candidates.
HpoOutcome run_hpo_limited(const HpoProblem &problem, std::size_t limit, int k,
                           HpoProtocol protocol, std::uint64_t seed) {
  const auto n = static_cast<Eigen::Index>(problem.groups.size());
  if (problem.candidates.empty() || limit == 0) throw std::invalid_argument("no candidates");
  limit = std::min(limit, problem.candidates.size());
  if (problem.y.size() != n) throw DimensionMismatch("targets and groups differ in length");
  for (const Eigen::MatrixXd &d : problem.designs) {
    if (d.rows() != n) throw DimensionMismatch("design rows differ from target length");
  }
  for (const auto &c : problem.candidates) {
    if (c.design >= problem.designs.size()) throw std::out_of_range("candidate design index");
  }
  const Eigen::VectorXd w =
      problem.weights.size() == 0 ? Eigen::VectorXd::Ones(n) : problem.weights;

  std::vector<std::string> keys(problem.groups.begin(), problem.groups.end());
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  Xoshiro256 rng(derive_seed(seed, kHoldoutStream));
  shuffle(std::span<std::string>(keys), rng);
  const bool fresh = problem.fresh_y.size() > 0;
  if (fresh && problem.fresh_designs.size() != problem.designs.size())
    throw DimensionMismatch("one fresh design per design is required");
  const auto n_hold =
      fresh ? std::size_t{0}
            : static_cast<std::size_t>(std::lround(0.2 * static_cast<double>(keys.size())));
  const std::set<std::string> holdout(keys.begin(), keys.begin() + static_cast<long>(n_hold));
  const FoldPlan plan =
      assign_folds(std::vector<std::string>(keys.begin() + static_cast<long>(n_hold), keys.end()), k, seed);

  Rows selection_rows, holdout_rows;
  std::vector<int> fold_of(static_cast<std::size_t>(n), -1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::string &g = problem.groups[static_cast<std::size_t>(i)];
    if (holdout.count(g)) {
      holdout_rows.push_back(i);
    } else {
      selection_rows.push_back(i);
      fold_of[static_cast<std::size_t>(i)] = plan.assignment.at(g);
    }
  }

  // Outer scheme: train role rows, eval fold rows.
  std::vector<Fold> outer(static_cast<std::size_t>(k));
  for (Eigen::Index i : selection_rows) {
    const std::string &g = problem.groups[static_cast<std::size_t>(i)];
    for (int f = 0; f < k; ++f) {
      const SplitRole role = plan.role(f, g);
      if (role == SplitRole::kEval) outer[static_cast<std::size_t>(f)].eval.push_back(i);
      if (role == SplitRole::kTrain) outer[static_cast<std::size_t>(f)].train.push_back(i);
    }
  }

  HpoOutcome out;
  if (protocol == HpoProtocol::kNaive) {
    out.chosen = argmin_candidate(problem, limit, w, outer, &out.reported_rmse);
  } else {
    double ss = 0.0;
    std::size_t count = 0;
    std::vector<std::size_t> votes(limit, 0);
    for (int f = 0; f < k; ++f) {
      std::vector<Fold> inner;
      for (int g = 0; g < k; ++g) {
        if (g == f) continue;
        Fold fold;
        for (Eigen::Index i : selection_rows) {
          const int home = fold_of[static_cast<std::size_t>(i)];
          if (home == g) fold.eval.push_back(i);
          else if (home != f) fold.train.push_back(i);
        }
        inner.push_back(std::move(fold));
      }
      const std::size_t c = argmin_candidate(problem, limit, w, inner, nullptr);
      out.chosen_per_fold.push_back(c);
      ++votes[c];
      const Fold &of = outer[static_cast<std::size_t>(f)];
      if (of.eval.empty()) continue;
      const auto &cand = problem.candidates[c];
      const Eigen::VectorXd pred =
          fit_predict(problem.designs[cand.design], problem.y, w, cand.lambda, of.train, of.eval);
      ss += (pred - problem.y(of.eval)).squaredNorm();
      count += of.eval.size();
    }
    out.reported_rmse = std::sqrt(ss / static_cast<double>(count));
    out.chosen = static_cast<std::size_t>(
        std::max_element(votes.begin(), votes.end()) - votes.begin());
  }

  // Score the models behind the reported number (one per outer fold, fit on
  // that fold's training rows) on data selection never saw.
  const std::size_t n_test = fresh ? static_cast<std::size_t>(problem.fresh_y.size())
                                   : holdout_rows.size();
  if (n_test > 0) {
    double ss = 0.0;
    std::size_t count = 0;
    for (int f = 0; f < k; ++f) {
      const Fold &of = outer[static_cast<std::size_t>(f)];
      const std::size_t c = protocol == HpoProtocol::kNested
                                ? out.chosen_per_fold[static_cast<std::size_t>(f)]
                                : out.chosen;
      const auto &cand = problem.candidates[c];
      const Eigen::MatrixXd &X = problem.designs[cand.design];
      const RidgeModel m =
          fit_ridge(X(of.train, Eigen::all), problem.y(of.train), w(of.train), cand.lambda);
      if (fresh) {
        ss += (m.predict(problem.fresh_designs[cand.design]) - problem.fresh_y).squaredNorm();
      } else {
        ss += (m.predict(X(holdout_rows, Eigen::all)) - problem.y(holdout_rows)).squaredNorm();
      }
      count += n_test;
    }
    out.holdout_rmse = std::sqrt(ss / static_cast<double>(count));
  }
  return out;
}

}  // namespace

HpoOutcome run_hpo(const HpoProblem &problem, int k, HpoProtocol protocol, std::uint64_t seed) {
  return run_hpo_limited(problem, problem.candidates.size(), k, protocol, seed);
}

HpoResult hpo_select(const DataTable &t, int k, const HpoConfigSpace &space,
                     HpoProtocol protocol, std::uint64_t seed) {
  HpoProblem problem;
  std::map<std::pair<int, int>, std::size_t> design_index;
  for (const ModelConfig &c : space.configs()) {
    const auto key = std::make_pair(c.radius, c.n_bits);
    auto it = design_index.find(key);
    if (it == design_index.end()) {
      it = design_index.emplace(key, problem.designs.size()).first;
      problem.designs.push_back(feature_matrix(t, c.radius, c.n_bits));
    }
    problem.candidates.push_back({it->second, c.lambda});
  }
  const auto n = static_cast<Eigen::Index>(t.records.size());
  problem.y.resize(n);
  problem.weights.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const SolubilityRecord &r = t.records[static_cast<std::size_t>(i)];
    problem.y(i) = r.value;
    problem.weights(i) = r.weight;
    problem.groups.push_back(r.key->plain_key);
  }
  const HpoOutcome o = run_hpo(problem, k, protocol, seed);
  HpoResult res;
  res.chosen = space.configs()[o.chosen];
  for (std::size_t c : o.chosen_per_fold) res.chosen_per_fold.push_back(space.configs()[c]);
  res.reported_rmse = o.reported_rmse;
  res.holdout_rmse = o.holdout_rmse;
  return res;
}

std::vector<GapRow> overfit_gap_experiment(std::size_t n_samples, std::size_t n_features,
                                           const std::vector<std::size_t> &config_counts,
                                           int trials, std::uint64_t seed, int k,
                                           std::size_t fresh_samples) {
  if (trials < 20) throw std::invalid_argument("the gap experiment needs at least 20 trials");
  if (config_counts.empty() || n_features == 0)
    throw std::invalid_argument("need config counts and at least one feature");
  const std::size_t max_configs = *std::max_element(config_counts.begin(), config_counts.end());
  if (max_configs == 0) throw std::invalid_argument("config counts must be positive");
  if (fresh_samples == 0) throw std::invalid_argument("need fresh samples");
  const auto n_fresh = static_cast<Eigen::Index>(fresh_samples);
  const auto n = static_cast<Eigen::Index>(n_samples);
  const auto p = static_cast<Eigen::Index>(n_features);
  const Eigen::Index subset = std::max<Eigen::Index>(1, p / 2);

  std::vector<std::vector<double>> gaps(config_counts.size()), reported(config_counts.size()),
      holdout(config_counts.size());
  for (int t = 0; t < trials; ++t) {
    const std::uint64_t trial_seed = derive_seed(seed, static_cast<std::uint64_t>(t));
    Xoshiro256 rng(trial_seed);
    Eigen::MatrixXd X(n, p);
    for (Eigen::Index j = 0; j < p; ++j)
      for (Eigen::Index i = 0; i < n; ++i) X(i, j) = rng.normal();
    HpoProblem full;
    full.y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      full.y(i) = rng.normal();
      full.groups.push_back("m" + std::to_string(i));
    }
    Eigen::MatrixXd X_fresh(n_fresh, p);
    for (Eigen::Index j = 0; j < p; ++j)
      for (Eigen::Index i = 0; i < n_fresh; ++i) X_fresh(i, j) = rng.normal();
    full.fresh_y.resize(n_fresh);
    for (Eigen::Index i = 0; i < n_fresh; ++i) full.fresh_y(i) = rng.normal();
    std::vector<Eigen::Index> columns(static_cast<std::size_t>(p));
    std::iota(columns.begin(), columns.end(), Eigen::Index{0});
    for (std::size_t c = 0; c < max_configs; ++c) {
      const double lambda = std::pow(10.0, -2.0 + 3.0 * rng.uniform());
      shuffle(std::span<Eigen::Index>(columns), rng);
      std::vector<Eigen::Index> chosen(columns.begin(), columns.begin() + subset);
      std::sort(chosen.begin(), chosen.end());
      full.designs.push_back(X(Eigen::all, chosen));
      full.fresh_designs.push_back(X_fresh(Eigen::all, chosen));
      full.candidates.push_back({c, lambda});
    }
    for (std::size_t ci = 0; ci < config_counts.size(); ++ci) {
      const HpoOutcome o =
          run_hpo_limited(full, config_counts[ci], k, HpoProtocol::kNaive, trial_seed);
      gaps[ci].push_back(o.holdout_rmse - o.reported_rmse);
      reported[ci].push_back(o.reported_rmse);
      holdout[ci].push_back(o.holdout_rmse);
    }
  }

  auto mean = [](const std::vector<double> &v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  };
  std::vector<GapRow> rows;
  for (std::size_t ci = 0; ci < config_counts.size(); ++ci) {
    GapRow row;
    row.configs = config_counts[ci];
    row.mean_gap = mean(gaps[ci]);
    double ss = 0.0;
    for (double g : gaps[ci]) ss += (g - row.mean_gap) * (g - row.mean_gap);
    row.std_error = std::sqrt(ss / (trials - 1)) / std::sqrt(static_cast<double>(trials));
    row.mean_reported = mean(reported[ci]);
    row.mean_holdout = mean(holdout[ci]);
    rows.push_back(row);
  }
  return rows;
}

std::string gap_table_csv(const std::vector<GapRow> &rows) {
  std::string out = "configs,mean_gap,std_error,mean_reported_rmse,mean_holdout_rmse\n";
  for (const GapRow &r : rows) {
    out += std::to_string(r.configs) + ',' + format_fixed(r.mean_gap, 6) + ',' +
           format_fixed(r.std_error, 6) + ',' + format_fixed(r.mean_reported, 6) + ',' +
           format_fixed(r.mean_holdout, 6) + '\n';
  }
  return out;
}

}  // namespace solcur
