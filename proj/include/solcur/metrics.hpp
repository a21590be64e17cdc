//
// solcur - solubility dataset curation and evaluation toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SOLCUR_METRICS_HPP_
#define SOLCUR_METRICS_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace solcur {

struct EvalPair {
  std::string molecule_key;
  double predicted = 0.0;
  double observed = 0.0;
  double weight = 1.0;

  friend bool operator==(const EvalPair &, const EvalPair &) = default;
};

class EmptyInput : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

class WeightOutOfRange : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// sqrt(sum (p - o)^2 / n)
double rmse(std::span<const EvalPair> pairs);

// sqrt(sum w (p - o)^2 / n). The weight scales the squared error and the
// denominator stays the record count.
double cu_rmse(std::span<const EvalPair> pairs);

// sqrt(sum (w (p - o))^2 / n): the weight scales the error before squaring.
// Two records with error 0.6 and weight 0.5 give 0.3 here and about 0.424
// with cu_rmse.
double cu_rmse_error_weighted(std::span<const EvalPair> pairs);

enum class Metric {
  kRmse,
  kCuRmse,
  kCuRmseErrorWeighted,
};

std::string_view to_string(Metric m);
// Accepts "rmse", "curmse", "curmse-error-weighted".
Metric parse_metric(std::string_view name);
double compute_metric(Metric m, std::span<const EvalPair> pairs);

struct MetricReport {
  std::string metric_name;
  double point = 0.0;
  double ci_halfwidth = 0.0;
  std::size_t n_records = 0;
  std::size_t n_molecules = 0;
  std::string formatted;

  friend bool operator==(const MetricReport &, const MetricReport &) = default;
};

// "0.58 ± 0.02": both numbers at two decimals, half away from zero.
std::string format_report(double point, double halfwidth);
std::string format_report(const MetricReport &r);

// Molecule-level bootstrap. Molecules (all their records together) are
// drawn with replacement up to the original molecule count; the half-width
// is the sample standard deviation of the metric over b resamples. Each
// resample has its own seed derived from (seed, resample index).
MetricReport bootstrap_ci(std::span<const EvalPair> pairs, Metric metric, int b,
                          std::uint64_t seed);

// Predictions file: molecule_key, predicted, observed, weight (extra columns
// ignored).
std::vector<EvalPair> read_predictions(const std::filesystem::path &path);
void write_predictions(std::span<const EvalPair> pairs, const std::filesystem::path &path);

}  // namespace solcur

#endif  // SOLCUR_METRICS_HPP_
