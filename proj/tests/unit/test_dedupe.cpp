//
// solcur - solubility dataset curation and evaluation toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include <cmath>
#include <map>
#include <random>
#include <set>
#include <string>

#include "corpus.hpp"
#include "doctest.h"
#include "solcur/dataset.hpp"
#include "solcur/dedupe.hpp"

using namespace solcur;
namespace fs = std::filesystem;

namespace {

DataTable make_table(const std::vector<std::pair<std::string, double>> &rows) {
  DataTable t{"T", {}};
  for (const auto &[smiles, value] : rows) {
    SolubilityRecord r;
    r.raw_smiles = smiles;
    r.value = value;
    r.set_id = "T";
    t.records.push_back(r);
  }
  return t;
}

void check_conservation(const CleanReport &r) {
  CHECK(r.input_records == r.output_records + r.parse_failures + r.metals_removed +
                               r.single_atom_removed + r.duplicates_removed);
  CHECK(r.unique_molecules_plain <= r.unique_molecules_stereo);
  CHECK(r.unique_molecules_stereo <= r.output_records);
}

DataTable fixture(const std::string &file) {
  const fs::path p = fs::path(SOLCUR_FIXTURE_DIR) / file;
  return ingest_csv(p, detect_schema(parse_csv(read_file(p)).at(0))).table;
}

}  // namespace

TEST_CASE("exact duplicates collapse, near values survive") {
  const CleanResult same = clean_set(make_table({{"CCO", 1.23}, {"OCC", 1.23}}));
  CHECK(same.table.size() == 1);
  CHECK(same.report.duplicates_removed == 1);
  CHECK(same.table.records[0].raw_smiles == "CCO");  // first occurrence wins

  const CleanResult near = clean_set(make_table({{"CCO", 1.23}, {"CCO", 1.24}}));
  CHECK(near.table.size() == 2);
  CHECK(near.report.duplicates_removed == 0);

  // Values are compared after rounding to 0.01.
  CHECK(clean_set(make_table({{"CCO", 1.231}, {"CCO", 1.234}})).table.size() == 1);
  CHECK(clean_set(make_table({{"CCO", 1.2349}, {"CCO", 1.2351}})).table.size() == 2);
}

TEST_CASE("removal categories") {
  const DataTable t = make_table({{"CCO", 1.0},
                                  {"C1CC", 0.0},
                                  {"C[Hg]C", 0.2},
                                  {"[CH4]", -1.4},
                                  {"[Mg+2]", 0.5},
                                  {"CC(=O)[O-].[Na+]", 0.97},
                                  {"CCO", 1.0},
                                  {"N[C@@H](C)C(=O)O", 0.25},
                                  {"N[C@H](C)C(=O)O", 0.27}});
  const CleanResult r = clean_set(t);
  CHECK(r.report.input_records == 9);
  CHECK(r.report.parse_failures == 1);
  CHECK(r.report.metals_removed == 2);
  CHECK(r.report.single_atom_removed == 1);
  CHECK(r.report.duplicates_removed == 1);
  CHECK(r.report.output_records == 4);
  CHECK(r.report.unique_molecules_stereo == 4);
  CHECK(r.report.unique_molecules_plain == 3);
  check_conservation(r.report);
  REQUIRE(r.rejections.size() == 4);
  CHECK(r.rejections[0].row == 2);
  CHECK(r.rejections[0].reason == "parse-error");
  // The salt keeps only its neutralized organic fragment.
  CHECK(r.table.records[1].key->plain_key == r.table.records[1].key->stereo_key);
  for (const SolubilityRecord &rec : r.table.records) CHECK(rec.key.has_value());
}

TEST_CASE("neutralization can be switched off") {
  const DataTable t = make_table({{"CC(=O)[O-].[Na+]", 0.97}, {"CC(=O)O", 0.97}});
  CHECK(clean_set(t, CleanOptions{true, 1}).table.size() == 1);
  CHECK(clean_set(t, CleanOptions{false, 1}).table.size() == 2);
}

TEST_CASE("intra-set weights") {
  const CleanResult r = clean_set(make_table({{"CCO", 1.0}, {"OCC", 1.1}, {"CCCO", 0.6}}));
  const DataTable w = assign_intra_weights(r.table);
  REQUIRE(w.size() == 3);
  CHECK(w.records[0].weight == 0.5);
  CHECK(w.records[1].weight == 0.5);
  CHECK(w.records[2].weight == 1.0);

  DataTable missing = make_table({{"CCO", 1.0}});
  CHECK_THROWS_AS(assign_intra_weights(missing), MissingKey);
}

TEST_CASE("properties over random tables drawn from the corpus") {
  std::mt19937_64 rng(31);
  const auto &corpus = solcur::testing::kCorpus;
  const std::vector<std::string> junk = {"C1CC", "[Mg+2]", "[CH4]", "[Fe+3].[Cl-].[Cl-].[Cl-]", "Q"};
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<std::pair<std::string, double>> rows;
    const int n = 20 + static_cast<int>(rng() % 60);
    for (int i = 0; i < n; ++i) {
      std::string s = rng() % 8 == 0 ? junk[rng() % junk.size()]
                                     : std::string(corpus[rng() % 15]);
      rows.emplace_back(s, static_cast<double>(static_cast<int>(rng() % 7)) / 10.0 - 0.3);
    }
    const DataTable t = make_table(rows);
    const CleanResult r = clean_set(t, CleanOptions{true, 1 + static_cast<unsigned>(trial % 3)});
    CAPTURE(trial);
    check_conservation(r.report);

    // Idempotence.
    const CleanResult again = clean_set(r.table);
    CHECK(again.table == r.table);
    CHECK(again.report.duplicates_removed == 0);

    // Weight normalization, checked against a direct count.
    const DataTable w = assign_intra_weights(r.table);
    std::map<std::string, int> counts;
    for (const SolubilityRecord &rec : r.table.records) ++counts[rec.key->plain_key];
    double total = 0.0;
    for (const SolubilityRecord &rec : w.records) {
      CHECK(rec.weight == doctest::Approx(1.0 / counts[rec.key->plain_key]));
      total += rec.weight;
    }
    CHECK(std::abs(total - static_cast<double>(counts.size())) <= 1e-9 * w.size());
    CHECK(counts.size() == r.report.unique_molecules_plain);

    // Thread count does not change anything.
    CHECK(clean_set(t, CleanOptions{true, 1}).table == r.table);
  }
}

TEST_CASE("fixtures: output is deterministic and reports add up") {
  for (const char *f : {"aqua_mini.csv", "esol_mini.csv", "ochem_mini.csv"}) {
    CAPTURE(f);
    const DataTable t = fixture(f);
    const CleanResult a = clean_set(t, CleanOptions{true, 4});
    const CleanResult b = clean_set(t, CleanOptions{true, 1});
    CHECK(to_csv(a.table) == to_csv(b.table));
    check_conservation(a.report);
  }
  const CleanResult aqua = clean_set(fixture("aqua_mini.csv"));
  CHECK(aqua.report.parse_failures == 1);
  CHECK(aqua.report.metals_removed == 1);
  CHECK(aqua.report.single_atom_removed == 1);
  CHECK(aqua.report.duplicates_removed == 1);
  CHECK(aqua.report.unique_molecules_stereo == aqua.report.unique_molecules_plain + 2);
}

TEST_CASE("report formatting") {
  CleanReport r;
  r.set_name = "ESOL";
  r.input_records = 1116;
  r.duplicates_removed = 1;
  r.output_records = 1115;
  r.unique_molecules_stereo = 1115;
  r.unique_molecules_plain = 1110;
  const std::string text = format_clean_report(r);
  CHECK(text.find("ESOL") != std::string::npos);
  CHECK(text.find("1116") != std::string::npos);
  const auto rows = parse_csv(clean_report_csv_header() + clean_report_csv_row(r));
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].size() == rows[1].size());
  CHECK(rows[1][0] == "ESOL");
  CHECK(rows[1][1] == "1116");
}
