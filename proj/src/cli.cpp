//
// solcur - solubility dataset curation and evaluation toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "solcur/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <json.hpp>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "solcur/baseline.hpp"
#include "solcur/curate.hpp"
#include "solcur/dataset.hpp"
#include "solcur/decimal.hpp"
#include "solcur/dedupe.hpp"
#include "solcur/folds.hpp"

namespace solcur {

namespace fs = std::filesystem;

namespace {

struct RunConfig {
  std::vector<std::string> inputs;  // "NAME=path" or "path"
  std::string smiles_column;
  std::string value_column;
  std::string weight_column;
  std::string source_column;
  std::string temperature_column;
  std::string ph_column;
  bool neutralize = true;
  bool protocol_filter = false;
  unsigned threads = 0;

  std::string target;
  double merge_threshold = 0.5;
  std::string quality_weights;

  int folds = 10;
  std::uint64_t seed = 42;

  std::string metric = "rmse";
  int bootstrap = 1000;
  std::string dataset;
  std::string method = "ridge";

  double lambda = 1.0;
  int radius = 2;
  int n_bits = 512;

  std::vector<double> hpo_lambdas = {0.01, 0.1, 1.0, 10.0, 100.0};
  std::vector<int> hpo_radii = {1, 2};
  std::vector<int> hpo_bits = {256, 1024};
  std::size_t hpo_samples = 200;
  std::size_t hpo_features = 50;
  std::vector<std::size_t> hpo_config_counts = {1, 4, 16, 64};
  int hpo_trials = 50;

  std::string table;
  std::string plan;
  std::string predictions;
  std::vector<std::string> reports;
  std::string output_dir;
};

struct Input {
  std::string name;
  fs::path path;
};

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static const char *digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xF];
  return s;
}

nlohmann::json file_entry(const fs::path &p) {
  nlohmann::json j;
  j["path"] = p.generic_string();
  std::error_code ec;
  if (fs::is_regular_file(p, ec)) {
    const std::string content = read_file(p);
    j["bytes"] = content.size();
    j["fnv1a64"] = hex64(fnv1a64(content));
  }
  return j;
}

std::vector<Input> parse_inputs(const RunConfig &cfg) {
  std::vector<Input> out;
  std::set<std::string> names;
  for (const std::string &spec : cfg.inputs) {
    Input in;
    const std::size_t eq = spec.find('=');
    if (eq != std::string::npos) {
      in.name = spec.substr(0, eq);
      in.path = spec.substr(eq + 1);
    } else {
      in.path = spec;
      in.name = in.path.stem().string();
    }
    if (in.name.empty()) throw ConfigError("empty dataset name in input " + spec);
    if (!names.insert(in.name).second) throw ConfigError("duplicate dataset name " + in.name);
    out.push_back(std::move(in));
  }
  return out;
}

std::string toml_string(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + '"';
}

template <typename T>
std::string toml_array(const std::vector<T> &values) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    if constexpr (std::is_same_v<T, std::string>) out += toml_string(values[i]);
    else if constexpr (std::is_floating_point_v<T>) out += format_shortest(values[i]);
    else out += std::to_string(values[i]);
  }
  return out + "]";
}

// Every resolved option as TOML that --config reads back.
std::string effective_config_toml(const RunConfig &c) {
  std::ostringstream o;
  auto str = [&](const char *key, const std::string &v) { o << key << " = " << toml_string(v) << '\n'; };
  auto num = [&](const char *key, double v) { o << key << " = " << format_shortest(v) << '\n'; };
  // Empty lists have no TOML spelling CLI11 accepts; they are left out.
  if (!c.inputs.empty()) o << "input = " << toml_array(c.inputs) << '\n';
  str("smiles-column", c.smiles_column);
  str("value-column", c.value_column);
  str("weight-column", c.weight_column);
  str("source-column", c.source_column);
  str("temperature-column", c.temperature_column);
  str("ph-column", c.ph_column);
  o << "neutralize = " << (c.neutralize ? "true" : "false") << '\n';
  o << "protocol-filter = " << (c.protocol_filter ? "true" : "false") << '\n';
  o << "threads = " << c.threads << '\n';
  str("target", c.target);
  num("merge-threshold", c.merge_threshold);
  str("quality-weights", c.quality_weights);
  o << "folds = " << c.folds << '\n';
  o << "seed = " << c.seed << '\n';
  str("metric", c.metric);
  o << "bootstrap = " << c.bootstrap << '\n';
  str("dataset", c.dataset);
  str("method", c.method);
  num("lambda", c.lambda);
  o << "radius = " << c.radius << '\n';
  o << "n-bits = " << c.n_bits << '\n';
  o << "hpo-lambdas = " << toml_array(c.hpo_lambdas) << '\n';
  o << "hpo-radii = " << toml_array(c.hpo_radii) << '\n';
  o << "hpo-bits = " << toml_array(c.hpo_bits) << '\n';
  o << "hpo-samples = " << c.hpo_samples << '\n';
  o << "hpo-features = " << c.hpo_features << '\n';
  o << "hpo-config-counts = " << toml_array(c.hpo_config_counts) << '\n';
  o << "hpo-trials = " << c.hpo_trials << '\n';
  str("table", c.table);
  str("plan", c.plan);
  str("predictions", c.predictions);
  if (!c.reports.empty()) o << "reports = " << toml_array(c.reports) << '\n';
  str("output-dir", c.output_dir);
  return o.str();
}

// Orchestrates one subcommand; every stage writes into <output>/<stage>/.
class Runner {
public:
  Runner(RunConfig cfg, std::string stage, std::string effective_config, std::ostream &err)
      : cfg_(std::move(cfg)),
        stage_(std::move(stage)),
        effective_config_(std::move(effective_config)),
        err_(err) {
    root_ = cfg_.output_dir;
    dir_ = root_ / stage_;
  }

  void run() {
    const auto start = std::chrono::steady_clock::now();
    validate();
    fs::create_directories(dir_);
    if (stage_ == "clean") clean();
    else if (stage_ == "curate") curate();
    else if (stage_ == "split") split();
    else if (stage_ == "train-eval") train_eval();
    else if (stage_ == "eval") eval();
    else if (stage_ == "report") report();
    else if (stage_ == "hpo-demo") hpo_demo();
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_manifest(seconds);
  }

private:
  void validate() const {
    if (cfg_.folds < 2) throw ConfigError("--folds must be at least 2");
    if (!(cfg_.merge_threshold > 0.0)) throw ConfigError("--merge-threshold must be positive");
    if (cfg_.bootstrap < 100) throw ConfigError("--bootstrap must be at least 100");
    try {
      parse_metric(cfg_.metric);
      HpoConfigSpace({ModelConfig{cfg_.lambda, cfg_.radius, cfg_.n_bits}});
    } catch (const std::invalid_argument &e) {
      throw ConfigError(e.what());
    }
  }

  std::vector<Input> inputs() const {
    std::vector<Input> in = parse_inputs(cfg_);
    if (in.empty()) throw ConfigError("no --input given");
    return in;
  }

  std::string target_name() const {
    if (!cfg_.target.empty()) return cfg_.target;
    if (!cfg_.inputs.empty()) return inputs().front().name;
    throw ConfigError("no --target and no --input to take it from");
  }

  fs::path default_table() const {
    if (!cfg_.table.empty()) return cfg_.table;
    const std::string target = target_name();
    const fs::path curated = root_ / "curate" / (target + ".csv");
    if (fs::exists(curated)) return curated;
    return root_ / "clean" / (target + ".csv");
  }

  DataTable load(const fs::path &p) {
    read_.push_back(p);
    return read_table(p);
  }

  void save(const fs::path &p, std::string_view content) {
    write_file(p, content);
    written_.push_back(p);
  }

  void clean() {
    std::string report_csv = clean_report_csv_header();
    std::string report_text;
    for (const Input &in : inputs()) {
      SchemaMapping mapping;
      if (cfg_.smiles_column.empty() || cfg_.value_column.empty()) {
        const auto rows = parse_csv(read_file(in.path));
        if (rows.empty()) throw EmptyFile("empty file: " + in.path.string());
        mapping = detect_schema(rows[0]);
      }
      if (!cfg_.smiles_column.empty()) mapping.smiles_column = cfg_.smiles_column;
      if (!cfg_.value_column.empty()) mapping.value_column = cfg_.value_column;
      if (!cfg_.weight_column.empty()) mapping.weight_column = cfg_.weight_column;
      if (!cfg_.source_column.empty()) mapping.source_column = cfg_.source_column;
      if (!cfg_.temperature_column.empty()) mapping.temperature_column = cfg_.temperature_column;
      if (!cfg_.ph_column.empty()) mapping.ph_column = cfg_.ph_column;
      // Keys and set ids always come from standardization and the input name.
      mapping.stereo_key_column.clear();
      mapping.plain_key_column.clear();
      mapping.set_column.clear();

      read_.push_back(in.path);
      IngestResult ing = ingest_csv(in.path, mapping, in.name);
      err_ << in.name << ": read " << ing.input_rows << " rows, " << ing.table.size()
           << " records, " << ing.rejections.size() << " rejected at ingestion\n";

      // Data rows that became records, in order, for mapping back to rows.
      std::vector<std::size_t> row_of_record;
      {
        std::set<std::size_t> rejected;
        for (const Rejection &r : ing.rejections) rejected.insert(r.row);
        for (std::size_t row = 1; row <= ing.input_rows; ++row)
          if (!rejected.count(row)) row_of_record.push_back(row);
      }
      DataTable table = std::move(ing.table);
      std::vector<Rejection> rejections = ing.rejections;
      if (cfg_.protocol_filter) {
        DataTable kept = protocol_filter(table);
        // The filter preserves order, so a two-pointer walk recovers rows.
        std::vector<std::size_t> kept_rows;
        std::size_t j = 0;
        for (std::size_t i = 0; i < table.size(); ++i) {
          if (j < kept.size() && kept.records[j] == table.records[i]) {
            kept_rows.push_back(row_of_record[i]);
            ++j;
          } else {
            const SolubilityRecord &r = table.records[i];
            rejections.push_back(
                Rejection{row_of_record[i], "protocol-filter", r.raw_smiles, format_shortest(r.value)});
          }
        }
        err_ << in.name << ": protocol filter dropped " << table.size() - kept.size()
             << " records\n";
        table = std::move(kept);
        row_of_record = std::move(kept_rows);
      }
      CleanResult res = clean_set(table, CleanOptions{cfg_.neutralize, cfg_.threads});
      for (Rejection r : res.rejections) {
        r.row = row_of_record[r.row - 1];
        rejections.push_back(std::move(r));
      }
      std::stable_sort(rejections.begin(), rejections.end(),
                       [](const Rejection &a, const Rejection &b) { return a.row < b.row; });
      const DataTable weighted = assign_intra_weights(res.table);
      save(dir_ / (in.name + ".csv"), to_csv(weighted));
      const fs::path rej = rejection_path(dir_, in.name);
      write_rejections(rejections, rej);
      written_.push_back(rej);
      report_csv += clean_report_csv_row(res.report);
      report_text += format_clean_report(res.report);
    }
    save(dir_ / "clean_report.csv", report_csv);
    save(dir_ / "clean_report.txt", report_text);
    err_ << report_text;
  }

  void curate() {
    const std::string target = target_name();
    CurationConfig cc;
    cc.d = cfg_.merge_threshold;
    if (!cfg_.quality_weights.empty()) {
      read_.push_back(cfg_.quality_weights);
      try {
        const QualityTable extra = QualityTable::load(cfg_.quality_weights);
        for (const auto &[set, w] : extra.entries()) cc.qualities.set(set, w);
      } catch (const std::invalid_argument &e) {
        throw ConfigError(e.what());
      }
    }
    std::optional<DataTable> target_table;
    std::vector<DataTable> others;
    for (const Input &in : inputs()) {
      DataTable t = load(root_ / "clean" / (in.name + ".csv"));
      if (in.name == target) target_table = std::move(t);
      else others.push_back(std::move(t));
    }
    if (!target_table) throw ConfigError("target " + target + " is not among the inputs");
    DataTable curated;
    try {
      curated = curate_target(*target_table, others, cc);
    } catch (const UnknownSetId &e) {
      throw ConfigError(e.what());
    }
    const CurationSummary summary = curation_summary(*target_table, curated);
    save(dir_ / (target + ".csv"), to_csv(curated));
    save(dir_ / "curation_summary.csv",
         curation_summary_csv_header() + curation_summary_csv_row(summary));
    err_ << target << ": " << summary.records_before << " records (mean weight "
         << format_fixed(summary.mean_weight_before, 3) << ") -> " << summary.records_after
         << " records (mean weight " << format_fixed(summary.mean_weight_after, 3) << ")\n";
    if (summary.no_op) err_ << "notice: curation was a no-op for " << target << '\n';
  }

  FoldPlan plan_for(const DataTable &t) {
    if (!cfg_.plan.empty()) {
      read_.push_back(cfg_.plan);
      return read_fold_plan(cfg_.plan);
    }
    const fs::path stored = root_ / "split" / "folds.csv";
    if (fs::exists(stored)) {
      read_.push_back(stored);
      return read_fold_plan(stored);
    }
    return assign_folds(t, cfg_.folds, cfg_.seed);
  }

  void split() {
    const DataTable t = load(default_table());
    const FoldPlan plan = assign_folds(t, cfg_.folds, cfg_.seed);
    save(dir_ / "folds.csv", fold_plan_csv(plan));
    err_ << t.name << ": " << plan.assignment.size() << " molecules in " << plan.k
         << " folds (seed " << plan.seed << ")\n";
  }

  void train_eval() {
    const DataTable t = load(default_table());
    const FoldPlan plan = plan_for(t);
    const ModelConfig mc{cfg_.lambda, cfg_.radius, cfg_.n_bits};
    const std::vector<EvalPair> pairs = concatenate(evaluate_cv(t, plan, mc));
    const fs::path out = dir_ / "predictions.csv";
    write_predictions(pairs, out);
    written_.push_back(out);
    err_ << t.name << ": " << pairs.size() << " cross-validated predictions (" << describe(mc)
         << "), rmse " << format_fixed(rmse(pairs), 3) << '\n';
  }

  void eval() {
    const fs::path path =
        cfg_.predictions.empty() ? root_ / "train-eval" / "predictions.csv" : fs::path(cfg_.predictions);
    read_.push_back(path);
    const std::vector<EvalPair> pairs = read_predictions(path);
    ReportCell cell;
    cell.dataset = cfg_.dataset.empty() ? target_name() : cfg_.dataset;
    cell.method = cfg_.method;
    cell.report = bootstrap_ci(pairs, parse_metric(cfg_.metric), cfg_.bootstrap, cfg_.seed);
    save(dir_ / "metric_report.csv", metric_report_csv_header() + metric_report_csv_row(cell));
    err_ << cell.dataset << " / " << cell.method << ": " << cell.report.metric_name << ' '
         << cell.report.formatted << " (" << cell.report.n_records << " records, "
         << cell.report.n_molecules << " molecules)\n";
  }

  void report() {
    std::vector<fs::path> paths(cfg_.reports.begin(), cfg_.reports.end());
    if (paths.empty()) paths.push_back(root_ / "eval" / "metric_report.csv");
    std::vector<ReportCell> cells;
    for (const fs::path &p : paths) {
      read_.push_back(p);
      const auto part = read_metric_reports(p);
      cells.insert(cells.end(), part.begin(), part.end());
    }
    const std::string md = emit_report(cells);
    save(dir_ / "report.md", md);
    err_ << md;
  }

  void hpo_demo() {
    const std::vector<GapRow> rows =
        overfit_gap_experiment(cfg_.hpo_samples, cfg_.hpo_features, cfg_.hpo_config_counts,
                               cfg_.hpo_trials, cfg_.seed, cfg_.folds);
    save(dir_ / "gap_table.csv", gap_table_csv(rows));
    for (const GapRow &r : rows) {
      err_ << "configs " << r.configs << ": holdout - reported = " << format_fixed(r.mean_gap, 4)
           << " +/- " << format_fixed(r.std_error, 4) << '\n';
    }
    if (!cfg_.table.empty()) {
      const DataTable t = load(cfg_.table);
      HpoConfigSpace space = [&] {
        try {
          return HpoConfigSpace::grid(cfg_.hpo_lambdas, cfg_.hpo_radii, cfg_.hpo_bits);
        } catch (const std::invalid_argument &e) {
          throw ConfigError(e.what());
        }
      }();
      std::string out = "protocol,chosen,reported_rmse,holdout_rmse\n";
      for (HpoProtocol p : {HpoProtocol::kNaive, HpoProtocol::kNested}) {
        const HpoResult r = hpo_select(t, cfg_.folds, space, p, cfg_.seed);
        out += std::string(to_string(p)) + ',' + csv_field(describe(r.chosen)) + ',' +
               format_fixed(r.reported_rmse, 6) + ',' + format_fixed(r.holdout_rmse, 6) + '\n';
        err_ << to_string(p) << ": reported " << format_fixed(r.reported_rmse, 3)
             << ", held-aside " << format_fixed(r.holdout_rmse, 3) << '\n';
      }
      save(dir_ / "hpo_select.csv", out);
    }
  }

  void write_manifest(double seconds) {
    save(dir_ / "effective_config.toml", effective_config_);
    nlohmann::json m;
    m["tool"] = "solcur";
    m["version"] = std::string(kVersion);
    m["subcommand"] = stage_;
    m["seed"] = cfg_.seed;
    m["effective_config"] = effective_config_;
    m["inputs"] = nlohmann::json::array();
    for (const fs::path &p : read_) m["inputs"].push_back(file_entry(p));
    m["outputs"] = nlohmann::json::array();
    for (const fs::path &p : written_) m["outputs"].push_back(file_entry(p));
    m["wall_time_seconds"] = seconds;
    write_file(dir_ / "manifest.json", m.dump(2) + '\n');
  }

  RunConfig cfg_;
  std::string stage_;
  std::string effective_config_;
  std::ostream &err_;
  fs::path root_;
  fs::path dir_;
  std::vector<fs::path> read_;
  std::vector<fs::path> written_;
};

double rounded_point(const MetricReport &r) {
  double v = 0.0;
  parse_double(format_fixed(r.point, 2), v);
  return v;
}

}  // namespace

std::string emit_report(const std::vector<ReportCell> &cells) {
  std::vector<std::string> datasets, methods;
  std::map<std::pair<std::string, std::string>, const ReportCell *> lookup;
  for (const ReportCell &c : cells) {
    if (std::find(datasets.begin(), datasets.end(), c.dataset) == datasets.end())
      datasets.push_back(c.dataset);
    if (std::find(methods.begin(), methods.end(), c.method) == methods.end())
      methods.push_back(c.method);
    lookup[{c.dataset, c.method}] = &c;
  }
  std::string md = "| Dataset |";
  for (const std::string &m : methods) md += ' ' + m + " |";
  md += "\n|---|";
  for (std::size_t i = 0; i < methods.size(); ++i) md += "---|";
  md += '\n';
  for (const std::string &d : datasets) {
    double best = std::numeric_limits<double>::infinity();
    for (const std::string &m : methods) {
      const auto it = lookup.find({d, m});
      if (it != lookup.end()) best = std::min(best, rounded_point(it->second->report));
    }
    md += "| " + d + " |";
    for (const std::string &m : methods) {
      const auto it = lookup.find({d, m});
      if (it == lookup.end()) {
        md += " n/a |";
        continue;
      }
      const MetricReport &r = it->second->report;
      const std::string text = format_report(r);
      md += rounded_point(r) == best ? " **" + text + "** |" : " " + text + " |";
    }
    md += '\n';
  }
  return md;
}

std::string metric_report_csv_header() {
  return "dataset,method,metric,point,ci_halfwidth,n_records,n_molecules,formatted\n";
}

std::string metric_report_csv_row(const ReportCell &c) {
  const MetricReport &r = c.report;
  return csv_field(c.dataset) + ',' + csv_field(c.method) + ',' + csv_field(r.metric_name) + ',' +
         format_shortest(r.point) + ',' + format_shortest(r.ci_halfwidth) + ',' +
         std::to_string(r.n_records) + ',' + std::to_string(r.n_molecules) + ',' +
         csv_field(r.formatted) + '\n';
}

std::vector<ReportCell> read_metric_reports(const fs::path &path) {
  const auto rows = parse_csv(read_file(path));
  if (rows.empty()) throw EmptyFile("empty metric report: " + path.string());
  const std::vector<std::string> header = {"dataset",   "method",       "metric",
                                           "point",     "ci_halfwidth", "n_records",
                                           "n_molecules", "formatted"};
  if (rows[0] != header) throw MissingColumn("metric report header in " + path.string());
  std::vector<ReportCell> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto &row = rows[i];
    if (row.size() != header.size()) throw UnreadableRow(i, "field count");
    ReportCell c;
    c.dataset = row[0];
    c.method = row[1];
    c.report.metric_name = row[2];
    double records = 0, molecules = 0;
    if (!parse_double(row[3], c.report.point) || !parse_double(row[4], c.report.ci_halfwidth) ||
        !parse_double(row[5], records) || !parse_double(row[6], molecules))
      throw UnreadableRow(i, "bad number");
    c.report.n_records = static_cast<std::size_t>(records);
    c.report.n_molecules = static_cast<std::size_t>(molecules);
    c.report.formatted = row[7];
    out.push_back(std::move(c));
  }
  return out;
}

int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  RunConfig cfg;
  if (const char *env = std::getenv(kOutputDirEnv); env && *env) cfg.output_dir = env;
  else cfg.output_dir = "solcur-out";

  CLI::App app{"solcur - solubility dataset curation and evaluation toolkit", "solcur"};
  app.set_config("--config", "", "Read options from a TOML/INI file");
  app.set_version_flag("--version", std::string(kVersion));
  app.fallthrough();
  app.require_subcommand(1, 1);

  app.add_option("--input", cfg.inputs, "Input CSV as NAME=path or path (name = file stem)");
  app.add_option("--smiles-column", cfg.smiles_column, "SMILES column (auto-detected when empty)");
  app.add_option("--value-column", cfg.value_column, "log10 solubility column (auto-detected)");
  app.add_option("--weight-column", cfg.weight_column, "Optional record weight column");
  app.add_option("--source-column", cfg.source_column, "Optional source id column");
  app.add_option("--temperature-column", cfg.temperature_column, "Optional temperature column");
  app.add_option("--ph-column", cfg.ph_column, "Optional pH column");
  app.add_flag("--neutralize,!--no-neutralize", cfg.neutralize, "Neutralize charges");
  app.add_flag("--protocol-filter", cfg.protocol_filter, "Keep 20-30 C and pH 6-8 records");
  app.add_option("--threads", cfg.threads, "Standardization threads (0 = all cores)");
  app.add_option("--target", cfg.target, "Dataset to curate/split/evaluate (default first input)");
  app.add_option("--merge-threshold", cfg.merge_threshold, "Curation merge threshold d");
  app.add_option("--quality-weights", cfg.quality_weights, "File of set = weight lines");
  app.add_option("--folds", cfg.folds, "Cross-validation fold count");
  app.add_option("--seed", cfg.seed, "Seed for splits, bootstrap and experiments");
  app.add_option("--metric", cfg.metric, "rmse, curmse or curmse-error-weighted");
  app.add_option("--bootstrap", cfg.bootstrap, "Bootstrap resamples");
  app.add_option("--dataset", cfg.dataset, "Dataset label for eval (default target)");
  app.add_option("--method", cfg.method, "Method label for eval");
  app.add_option("--lambda", cfg.lambda, "Ridge penalty");
  app.add_option("--radius", cfg.radius, "Fingerprint radius (0-3)");
  app.add_option("--n-bits", cfg.n_bits, "Fingerprint length (power of two)");
  app.add_option("--hpo-lambdas", cfg.hpo_lambdas, "Penalty grid for hpo-demo on a table");
  app.add_option("--hpo-radii", cfg.hpo_radii, "Radius grid for hpo-demo on a table");
  app.add_option("--hpo-bits", cfg.hpo_bits, "Fingerprint length grid for hpo-demo on a table");
  app.add_option("--hpo-samples", cfg.hpo_samples, "Synthetic samples per trial");
  app.add_option("--hpo-features", cfg.hpo_features, "Synthetic feature count");
  app.add_option("--hpo-config-counts", cfg.hpo_config_counts, "Search-space sizes to compare");
  app.add_option("--hpo-trials", cfg.hpo_trials, "Synthetic trials");
  app.add_option("--table", cfg.table, "Table for split/train-eval/hpo-demo");
  app.add_option("--plan", cfg.plan, "Fold plan CSV for train-eval");
  app.add_option("--predictions", cfg.predictions, "Predictions CSV for eval");
  app.add_option("--reports", cfg.reports, "Metric report CSVs for report");
  app.add_option("--output-dir", cfg.output_dir, "Output directory (env SOLCUR_OUTPUT_DIR)");

  const std::vector<std::pair<std::string, std::string>> stages = {
      {"clean", "Standardize, filter and deduplicate each input; assign intra-set weights"},
      {"curate", "Extend the target with other sets' records and merge close values"},
      {"split", "Write a molecule-level k-fold plan"},
      {"train-eval", "Cross-validated ridge predictions for the target"},
      {"eval", "RMSE/cuRMSE with a bootstrap interval from a predictions file"},
      {"report", "Markdown dataset x method table from metric reports"},
      {"hpo-demo", "Overfitting-by-selection experiment"}};
  for (const auto &[name, help] : stages) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion &) {
    out << kVersion << '\n';
    return 0;
  } catch (const CLI::ParseError &e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  const std::string stage = app.get_subcommands().front()->get_name();
  try {
    Runner runner(cfg, stage, effective_config_toml(cfg), err);
    runner.run();
  } catch (const ConfigError &e) {
    err << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  std::vector<const char *> argv;
  argv.push_back("solcur");
  for (const std::string &a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace solcur
