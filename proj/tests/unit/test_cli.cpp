//
// solcur - solubility dataset curation and evaluation toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include <cstdlib>
#include <filesystem>
#include <json.hpp>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "doctest.h"
#include "solcur/cli.hpp"
#include "solcur/dataset.hpp"

using namespace solcur;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = SOLCUR_FIXTURE_DIR;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string &name) {
  const fs::path d = fs::temp_directory_path() / ("solcur_test_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::vector<std::string> fixture_inputs() {
  return {"--input", "AQUA=" + (kFixtures / "aqua_mini.csv").string(),
          "ESOL=" + (kFixtures / "esol_mini.csv").string(),
          "OCHEM=" + (kFixtures / "ochem_mini.csv").string()};
}

std::vector<std::string> with(std::vector<std::string> a, const std::vector<std::string> &b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

ReportCell cell(const std::string &d, const std::string &m, double point, double hw = 0.01) {
  ReportCell c;
  c.dataset = d;
  c.method = m;
  c.report.metric_name = "rmse";
  c.report.point = point;
  c.report.ci_halfwidth = hw;
  c.report.n_records = 10;
  c.report.n_molecules = 9;
  c.report.formatted = format_report(point, hw);
  return c;
}

// Every file under dir, keyed by relative path, except per-run metadata.
std::map<std::string, std::string> primary_outputs(const fs::path &dir) {
  std::map<std::string, std::string> files;
  for (const auto &e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const std::string name = e.path().filename().string();
    if (name == "manifest.json" || name == "effective_config.toml") continue;
    files[fs::relative(e.path(), dir).generic_string()] = read_file(e.path());
  }
  return files;
}

}  // namespace

TEST_CASE("emit_report layout and bold minima") {
  CHECK(emit_report({cell("AQUA", "ridge", 0.58349, 0.0151)}) ==
        "| Dataset | ridge |\n|---|---|\n| AQUA | **0.58 ± 0.02** |\n");

  const std::string three =
      emit_report({cell("ESOL", "A", 0.61), cell("ESOL", "B", 0.58), cell("ESOL", "C", 0.70)});
  CHECK(three == "| Dataset | A | B | C |\n|---|---|---|---|\n"
                 "| ESOL | 0.61 ± 0.01 | **0.58 ± 0.01** | 0.70 ± 0.01 |\n");

  // Ties after rounding are all bold.
  const std::string tie = emit_report({cell("X", "A", 0.581), cell("X", "B", 0.579)});
  CHECK(tie.find("| X | **0.58 ± 0.01** | **0.58 ± 0.01** |") != std::string::npos);

  const std::string gaps = emit_report({cell("X", "A", 1.0), cell("Y", "B", 2.0)});
  CHECK(gaps.find("| X | **1.00 ± 0.01** | n/a |") != std::string::npos);
  CHECK(gaps.find("| Y | n/a | **2.00 ± 0.01** |") != std::string::npos);
}

TEST_CASE("metric report csv round trip") {
  const fs::path dir = fresh_dir("reports");
  const std::vector<ReportCell> cells = {cell("AQUA, cleaned", "ridge", 0.5), cell("ESOL", "knn", 0.25)};
  std::string text = metric_report_csv_header();
  for (const auto &c : cells) text += metric_report_csv_row(c);
  write_file(dir / "r.csv", text);
  const auto back = read_metric_reports(dir / "r.csv");
  REQUIRE(back.size() == 2);
  CHECK(back[0].dataset == "AQUA, cleaned");
  CHECK(back[0].report == cells[0].report);
  CHECK(back[1].report == cells[1].report);
  write_file(dir / "bad.csv", "dataset,method\nA,B\n");
  CHECK_THROWS(read_metric_reports(dir / "bad.csv"));
}

TEST_CASE("usage errors exit 2") {
  const Run unknown = run({"frobnicate"});
  CHECK(unknown.code == 2);
  CHECK(unknown.err.find("Usage") != std::string::npos);
  CHECK(run({}).code == 2);
  CHECK(run({"--folds", "ten", "split"}).code == 2);
  const Run help = run({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("train-eval") != std::string::npos);
  const Run version = run({"--version"});
  CHECK(version.code == 0);
  CHECK(version.out == std::string(kVersion) + "\n");

  const fs::path dir = fresh_dir("usage");
  CHECK(run({"--output-dir", dir.string(), "--folds", "1", "split"}).code == 2);
  CHECK(run({"--output-dir", dir.string(), "--metric", "mae", "eval"}).code == 2);
  CHECK(run({"--output-dir", dir.string(), "--n-bits", "100", "train-eval"}).code == 2);
  CHECK(run({"--output-dir", dir.string(), "clean"}).code == 2);  // no inputs
}

TEST_CASE("data errors exit 1") {
  const fs::path dir = fresh_dir("data");
  const Run missing = run({"--output-dir", dir.string(), "--input", "X=/nonexistent/file.csv", "clean"});
  CHECK(missing.code == 1);
  CHECK(missing.err.find("nonexistent") != std::string::npos);
  write_file(dir / "nocol.csv", "name,weight\nA,1\n");
  CHECK(run({"--output-dir", dir.string(), "--input", (dir / "nocol.csv").string(), "clean"}).code == 1);
  CHECK(run({"--output-dir", dir.string(), "--predictions", (dir / "none.csv").string(), "--dataset",
             "X", "eval"}).code == 1);
}

TEST_CASE("clean writes tables, sidecars, reports and a manifest") {
  const fs::path dir = fresh_dir("clean");
  const Run r = run(with(fixture_inputs(), {"--output-dir", dir.string(), "clean"}));
  REQUIRE(r.code == 0);
  for (const char *name : {"AQUA.csv", "ESOL.csv", "OCHEM.csv", "AQUA.rejected.csv",
                           "clean_report.csv", "clean_report.txt", "manifest.json",
                           "effective_config.toml"})
    CHECK(fs::exists(dir / "clean" / name));

  const auto report = parse_csv(read_file(dir / "clean" / "clean_report.csv"));
  REQUIRE(report.size() == 4);
  CHECK(report[1][0] == "AQUA");

  const DataTable aqua = read_table(dir / "clean" / "AQUA.csv");
  double total = 0;
  std::set<std::string> molecules;
  for (const auto &rec : aqua.records) {
    REQUIRE(rec.key.has_value());
    total += rec.weight;
    molecules.insert(rec.key->plain_key);
  }
  CHECK(std::abs(total - static_cast<double>(molecules.size())) < 1e-9 * aqua.size());

  // Rejected rows keep their original row numbers.
  const auto rejected = parse_csv(read_file(dir / "clean" / "AQUA.rejected.csv"));
  bool saw_nan = false;
  for (const auto &row : rejected)
    if (row[1] == "non-finite-value") saw_nan = row[0] == "32" && row[2] == "CCN";
  CHECK(saw_nan);

  const auto manifest = nlohmann::json::parse(read_file(dir / "clean" / "manifest.json"));
  CHECK(manifest["tool"] == "solcur");
  CHECK(manifest["version"] == std::string(kVersion));
  CHECK(manifest["subcommand"] == "clean");
  CHECK(manifest["inputs"].size() == 3);
  CHECK(manifest["outputs"].size() >= 8);
  CHECK(manifest["outputs"][0]["fnv1a64"].get<std::string>().size() == 16);
  CHECK(manifest.contains("wall_time_seconds"));
  CHECK(manifest["effective_config"].get<std::string>().find("neutralize = true") != std::string::npos);
}

TEST_CASE("flags override config file values") {
  const fs::path dir = fresh_dir("override");
  REQUIRE(run(with(fixture_inputs(), {"--output-dir", dir.string(), "clean"})).code == 0);
  const std::string cfg = (kFixtures / "e2e.toml").string();
  REQUIRE(run({"--config", cfg, "--output-dir", dir.string(), "--folds", "3", "split"}).code == 0);
  const std::string plan = read_file(dir / "split" / "folds.csv");
  CHECK(plan.starts_with("# k=3 seed=7\n"));
  CHECK(read_file(dir / "split" / "effective_config.toml").find("folds = 3") != std::string::npos);
}

TEST_CASE("protocol filter and neutralization flags") {
  const fs::path dir = fresh_dir("flags");
  const auto ochem = std::vector<std::string>{"--input", "OCHEM=" + (kFixtures / "ochem_mini.csv").string()};
  REQUIRE(run(with(ochem, {"--output-dir", dir.string(), "--protocol-filter", "clean"})).code == 0);
  const auto rejected = parse_csv(read_file(dir / "clean" / "OCHEM.rejected.csv"));
  std::map<std::string, std::string> reason_by_row;
  for (std::size_t i = 1; i < rejected.size(); ++i) reason_by_row[rejected[i][0]] = rejected[i][1];
  CHECK(reason_by_row["5"] == "protocol-filter");   // 37 C
  CHECK(reason_by_row["10"] == "protocol-filter");  // pH 9.5
  CHECK(reason_by_row["13"] == "single-heavy-atom");

  const fs::path salts = dir / "salts.csv";
  write_file(salts, "smiles,value\nCC(=O)[O-].[Na+],1\nCC(=O)O,1\n");
  const auto in = std::vector<std::string>{"--input", "S=" + salts.string()};
  REQUIRE(run(with(in, {"--output-dir", dir.string(), "clean"})).code == 0);
  CHECK(read_table(dir / "clean" / "S.csv").size() == 1);
  REQUIRE(run(with(in, {"--output-dir", dir.string(), "--no-neutralize", "clean"})).code == 0);
  CHECK(read_table(dir / "clean" / "S.csv").size() == 2);
}

TEST_CASE("curation needs a quality for every set") {
  const fs::path dir = fresh_dir("quality");
  const auto in = std::vector<std::string>{"--input", "AQUA=" + (kFixtures / "aqua_mini.csv").string(),
                                           "KINECT=" + (kFixtures / "esol_mini.csv").string()};
  REQUIRE(run(with(in, {"--output-dir", dir.string(), "clean"})).code == 0);
  CHECK(run(with(in, {"--output-dir", dir.string(), "curate"})).code == 2);
  write_file(dir / "q.ini", "[quality]\nKINECT = 0.3\n");
  const Run ok = run(with(in, {"--output-dir", dir.string(), "--quality-weights",
                               (dir / "q.ini").string(), "--merge-threshold", "0.25", "curate"}));
  CHECK(ok.code == 0);
  CHECK(fs::exists(dir / "curate" / "AQUA.csv"));
  CHECK(run(with(in, {"--output-dir", dir.string(), "--merge-threshold", "0", "curate"})).code == 2);
  CHECK(run(with(in, {"--output-dir", dir.string(), "--target", "NOPE", "curate"})).code == 2);
}

TEST_CASE("full pipeline is reproducible from its manifest") {
  const fs::path dir = fresh_dir("pipeline");
  const std::string cfg = (kFixtures / "e2e.toml").string();
  const auto base = with(fixture_inputs(), {"--config", cfg, "--output-dir", dir.string()});
  for (const char *stage : {"clean", "curate", "split", "train-eval", "eval", "report"}) {
    CAPTURE(stage);
    REQUIRE(run(with(base, {stage})).code == 0);
  }
  const std::string md = read_file(dir / "report" / "report.md");
  CHECK(md.starts_with("| Dataset | ridge |\n"));
  CHECK(md.find("| AQUA | **") != std::string::npos);

  const auto before = primary_outputs(dir);
  // Re-run every stage from the configuration its manifest recorded.
  for (const char *stage : {"clean", "curate", "split", "train-eval", "eval", "report"}) {
    const auto manifest = nlohmann::json::parse(read_file(dir / stage / "manifest.json"));
    const fs::path replay = dir.parent_path() / "solcur_test_cli_replay.toml";
    write_file(replay, manifest["effective_config"].get<std::string>());
    REQUIRE(run({"--config", replay.string(), stage}).code == 0);
  }
  CHECK(primary_outputs(dir) == before);
}

TEST_CASE("output directory falls back to the environment") {
  const fs::path dir = fresh_dir("env");
  ::setenv(kOutputDirEnv, dir.string().c_str(), 1);
  const Run r = run({"--hpo-samples", "60", "--hpo-features", "10", "--hpo-trials", "20",
                     "--hpo-config-counts", "1", "4", "--folds", "3", "hpo-demo"});
  ::unsetenv(kOutputDirEnv);
  CHECK(r.code == 0);
  const auto rows = parse_csv(read_file(dir / "hpo-demo" / "gap_table.csv"));
  CHECK(rows.size() == 3);
}
