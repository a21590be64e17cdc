//
// solcur - solubility dataset curation and evaluation toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SOLCUR_BASELINE_HPP_
#define SOLCUR_BASELINE_HPP_

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "solcur/dataset.hpp"
#include "solcur/folds.hpp"
#include "solcur/metrics.hpp"
#include "solcur/smiles.hpp"

namespace solcur {

// Hashed circular-substructure counts.
struct FeatureVector {
  std::vector<std::uint32_t> counts;
  int n_bits = 0;
  int radius = 0;

  friend bool operator==(const FeatureVector &, const FeatureVector &) = default;
};

// Multiplier of the multiply-shift bucket hash: (id * kFoldMultiplier) >>
// (64 - log2(n_bits)).
inline constexpr std::uint64_t kFoldMultiplier = 0x9E3779B97F4A7C15ULL;

std::size_t fold_identifier(std::uint64_t id, int n_bits);

// Every heavy atom contributes one identifier per radius 0..radius. The
// radius-0 identifier hashes the atom invariant used to seed canonical
// ranking; radius r hashes the atom's radius r-1 identifier with the sorted
// (bond order, neighbour identifier) pairs. Identifiers are folded into
// n_bits buckets; collisions are kept. n_bits must be a power of two and
// radius in [0, 3].
FeatureVector featurize(const MolGraph &g, int radius, int n_bits);

class DimensionMismatch : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

struct RidgeModel {
  Eigen::VectorXd coefficients;
  double intercept = 0.0;
  double lambda = 0.0;
  // Set when lambda is 0 and the weighted design is rank deficient; the
  // coefficients are then the minimum-norm solution.
  bool rank_deficient = false;

  double predict_row(const Eigen::Ref<const Eigen::RowVectorXd> &x) const;
  Eigen::VectorXd predict(const Eigen::Ref<const Eigen::MatrixXd> &X) const;
};

// Minimizes sum_i s_i (y_i - x_i.beta - b)^2 + lambda |beta|^2 with the
// intercept b unpenalized. Features and targets are centred on their
// weighted means and the penalty is appended as sqrt(lambda) I rows; the
// stacked system is solved by column-pivoted Householder QR (complete
// orthogonal decomposition at lambda = 0).
RidgeModel fit_ridge(const Eigen::Ref<const Eigen::MatrixXd> &X,
                     const Eigen::Ref<const Eigen::VectorXd> &y,
                     const Eigen::Ref<const Eigen::VectorXd> &sample_weights, double lambda);
RidgeModel fit_ridge(const Eigen::Ref<const Eigen::MatrixXd> &X,
                     const Eigen::Ref<const Eigen::VectorXd> &y, double lambda);

struct ModelConfig {
  double lambda = 1.0;
  int radius = 2;
  int n_bits = 512;

  friend bool operator==(const ModelConfig &, const ModelConfig &) = default;
};

std::string describe(const ModelConfig &c);

class HpoConfigSpace {
public:
  // Throws on an empty list, duplicates, or invalid radius/n_bits/lambda.
  explicit HpoConfigSpace(std::vector<ModelConfig> configs);
  static HpoConfigSpace grid(const std::vector<double> &lambdas, const std::vector<int> &radii,
                             const std::vector<int> &n_bits);

  const std::vector<ModelConfig> &configs() const { return configs_; }
  std::size_t size() const { return configs_.size(); }

private:
  std::vector<ModelConfig> configs_;
};

// Feature matrix (records x n_bits) built from each record's plain key.
Eigen::MatrixXd feature_matrix(const DataTable &t, int radius, int n_bits);

struct FoldPredictions {
  int fold = 0;
  std::vector<EvalPair> pairs;
};

// For each fold: fit on the train molecules, predict the eval molecules.
// The early-stop molecules are left out of the fit; ridge has nothing to
// stop early.
std::vector<FoldPredictions> evaluate_cv(const DataTable &t, const FoldPlan &plan,
                                         const ModelConfig &config);
std::vector<EvalPair> concatenate(const std::vector<FoldPredictions> &folds);

enum class HpoProtocol {
  kNaive,
  kNested,
};

std::string_view to_string(HpoProtocol p);

// Model selection over candidate (design matrix, lambda) pairs. Rows are
// grouped into molecules by key.
struct HpoProblem {
  std::vector<Eigen::MatrixXd> designs;
  struct Candidate {
    std::size_t design = 0;
    double lambda = 1.0;
  };
  std::vector<Candidate> candidates;
  Eigen::VectorXd y;
  Eigen::VectorXd weights;  // empty for unit weights
  std::vector<std::string> groups;
  // Optional independent test data (one design per entry of designs). When
  // fresh_y is non-empty no slice is held aside: every row takes part in
  // selection and the final fit is scored on the fresh rows.
  std::vector<Eigen::MatrixXd> fresh_designs;
  Eigen::VectorXd fresh_y;
};

struct HpoOutcome {
  std::size_t chosen = 0;
  // Nested protocol only: the candidate picked for each outer fold.
  std::vector<std::size_t> chosen_per_fold;
  double reported_rmse = 0.0;
  double holdout_rmse = 0.0;
};

// Unless fresh data is supplied, a random 20% of the molecules is held aside
// first; the rest gets a k-fold
// plan. Naive: pick the candidate with the lowest CV RMSE and report that
// RMSE. Nested: for each outer fold pick by CV over the other k-1 folds,
// then report the pooled outer-fold RMSE. The holdout RMSE scores the same
// per-fold models that produced the reported number (fit on each fold's
// training molecules with the candidate chosen for that fold) on data that
// selection never saw, pooled over folds. `chosen` is the naive pick, or
// the most frequent per-fold pick under nesting.
HpoOutcome run_hpo(const HpoProblem &problem, int k, HpoProtocol protocol, std::uint64_t seed);

struct HpoResult {
  ModelConfig chosen;
  std::vector<ModelConfig> chosen_per_fold;
  double reported_rmse = 0.0;
  double holdout_rmse = 0.0;
};

HpoResult hpo_select(const DataTable &t, int k, const HpoConfigSpace &space,
                     HpoProtocol protocol, std::uint64_t seed);

struct GapRow {
  std::size_t configs = 0;
  double mean_gap = 0.0;
  double std_error = 0.0;
  double mean_reported = 0.0;
  double mean_holdout = 0.0;
};

// Zero-signal experiment: standard-normal features and independent
// standard-normal targets. Each trial draws max(config_counts) candidates
// (lambda log-uniform in [1e-2, 10], a random half of the features); the
// first c of them form the search space for config count c. All n_samples
// rows take part in selection; the chosen models are scored on
// fresh_samples new draws from the same generator. The gap is that fresh RMSE minus the
// naive reported RMSE, averaged over trials.
std::vector<GapRow> overfit_gap_experiment(std::size_t n_samples, std::size_t n_features,
                                           const std::vector<std::size_t> &config_counts,
                                           int trials, std::uint64_t seed, int k = 10,
                                           std::size_t fresh_samples = 5000);

std::string gap_table_csv(const std::vector<GapRow> &rows);

}  // namespace solcur

#endif  // SOLCUR_BASELINE_HPP_
