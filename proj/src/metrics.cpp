//
// solcur - solubility dataset curation and evaluation toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "solcur/metrics.hpp"

#include <cmath>
#include <map>
#include <unordered_map>

#include "solcur/dataset.hpp"
#include "solcur/decimal.hpp"
#include "solcur/random.hpp"

namespace solcur {

namespace {

void require_nonempty(std::span<const EvalPair> pairs) {
  if (pairs.empty()) throw EmptyInput("metric over an empty list");
}

void require_weights(std::span<const EvalPair> pairs) {
  for (const EvalPair &p : pairs) {
    if (!(p.weight > 0.0 && p.weight <= 1.0))
      throw WeightOutOfRange("weight " + format_shortest(p.weight) + " outside (0, 1]");
  }
}

}  // namespace

double rmse(std::span<const EvalPair> pairs) {
  require_nonempty(pairs);
  double s = 0.0;
  for (const EvalPair &p : pairs) {
    const double e = p.predicted - p.observed;
    s += e * e;
  }
  return std::sqrt(s / static_cast<double>(pairs.size()));
}

double cu_rmse(std::span<const EvalPair> pairs) {
  require_nonempty(pairs);
  require_weights(pairs);
  double s = 0.0;
  for (const EvalPair &p : pairs) {
    const double e = p.predicted - p.observed;
    s += p.weight * (e * e);
  }
  return std::sqrt(s / static_cast<double>(pairs.size()));
}

double cu_rmse_error_weighted(std::span<const EvalPair> pairs) {
  require_nonempty(pairs);
  require_weights(pairs);
  double s = 0.0;
  for (const EvalPair &p : pairs) {
    const double e = p.weight * (p.predicted - p.observed);
    s += e * e;
  }
  return std::sqrt(s / static_cast<double>(pairs.size()));
}

std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::kRmse: return "rmse";
    case Metric::kCuRmse: return "curmse";
    case Metric::kCuRmseErrorWeighted: return "curmse-error-weighted";
  }
  return "?";
}

Metric parse_metric(std::string_view name) {
  if (name == "rmse") return Metric::kRmse;
  if (name == "curmse") return Metric::kCuRmse;
  if (name == "curmse-error-weighted") return Metric::kCuRmseErrorWeighted;
  throw std::invalid_argument("unknown metric: " + std::string(name));
}

double compute_metric(Metric m, std::span<const EvalPair> pairs) {
  switch (m) {
    case Metric::kRmse: return rmse(pairs);
    case Metric::kCuRmse: return cu_rmse(pairs);
    case Metric::kCuRmseErrorWeighted: return cu_rmse_error_weighted(pairs);
  }
  return 0.0;
}

std::string format_report(double point, double halfwidth) {
  return format_fixed(point, 2) + " ± " + format_fixed(halfwidth, 2);
}

std::string format_report(const MetricReport &r) {
  return format_report(r.point, r.ci_halfwidth);
}

MetricReport bootstrap_ci(std::span<const EvalPair> pairs, Metric metric, int b,
                          std::uint64_t seed) {
  require_nonempty(pairs);
  if (b < 100) throw std::invalid_argument("bootstrap needs at least 100 resamples");

  // Molecules in first-appearance order.
  std::unordered_map<std::string, std::size_t> index;
  std::vector<std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto [it, fresh] = index.emplace(pairs[i].molecule_key, members.size());
    if (fresh) members.emplace_back();
    members[it->second].push_back(i);
  }

  MetricReport rep;
  rep.metric_name = std::string(to_string(metric));
  rep.point = compute_metric(metric, pairs);
  rep.n_records = pairs.size();
  rep.n_molecules = members.size();

  const std::size_t m = members.size();
  std::vector<double> values(static_cast<std::size_t>(b));
  std::vector<EvalPair> sample;
  for (int r = 0; r < b; ++r) {
    Xoshiro256 rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    sample.clear();
    for (std::size_t k = 0; k < m; ++k) {
      for (std::size_t i : members[rng.below(m)]) sample.push_back(pairs[i]);
    }
    values[static_cast<std::size_t>(r)] = compute_metric(metric, sample);
  }
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= b;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  rep.ci_halfwidth = std::sqrt(ss / (b - 1));
  rep.formatted = format_report(rep);
  return rep;
}

std::vector<EvalPair> read_predictions(const std::filesystem::path &path) {
  const auto rows = parse_csv(read_file(path));
  if (rows.empty()) throw EmptyFile("empty predictions file: " + path.string());
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < rows[0].size(); ++i) col.emplace(rows[0][i], i);
  for (const char *name : {"molecule_key", "predicted", "observed"}) {
    if (!col.count(name)) throw MissingColumn(name);
  }
  const bool has_weight = col.count("weight") != 0;
  std::vector<EvalPair> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto &row = rows[r];
    if (row.size() != rows[0].size()) throw UnreadableRow(r, "field count");
    EvalPair p;
    p.molecule_key = row[col["molecule_key"]];
    bool ok = parse_double(row[col["predicted"]], p.predicted) &&
              parse_double(row[col["observed"]], p.observed);
    if (has_weight) ok = ok && parse_double(row[col["weight"]], p.weight);
    if (!ok || !std::isfinite(p.predicted) || !std::isfinite(p.observed))
      throw UnreadableRow(r, "bad number");
    out.push_back(std::move(p));
  }
  return out;
}

void write_predictions(std::span<const EvalPair> pairs, const std::filesystem::path &path) {
  std::string out = "molecule_key,predicted,observed,weight\n";
  for (const EvalPair &p : pairs) {
    out += csv_field(p.molecule_key) + ',' + format_shortest(p.predicted) + ',' +
           format_shortest(p.observed) + ',' + format_shortest(p.weight) + '\n';
  }
  write_file(path, out);
}

}  // namespace solcur
