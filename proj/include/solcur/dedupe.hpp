//
// solcur - solubility dataset curation and evaluation toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SOLCUR_DEDUPE_HPP_
#define SOLCUR_DEDUPE_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "solcur/dataset.hpp"

namespace solcur {

// Counts from one clean_set run; the columns mirror a per-dataset cleaning
// summary (input, removals by cause, output, unique molecules).
struct CleanReport {
  std::string set_name;
  std::size_t input_records = 0;
  std::size_t parse_failures = 0;
  std::size_t metals_removed = 0;
  std::size_t single_atom_removed = 0;
  std::size_t duplicates_removed = 0;
  std::size_t output_records = 0;
  std::size_t unique_molecules_stereo = 0;
  std::size_t unique_molecules_plain = 0;

  friend bool operator==(const CleanReport &, const CleanReport &) = default;
};

struct CleanOptions {
  bool neutralize = true;
  // Worker threads for standardization; 0 picks the hardware concurrency.
  unsigned threads = 0;
};

struct CleanResult {
  DataTable table;
  CleanReport report;
  // Records dropped before deduplication, with their reject reason.
  std::vector<Rejection> rejections;
};

// Standardizes every record, drops parse failures, metal-containing and
// single-heavy-atom structures, then drops records whose record key (plain
// key plus value rounded to 0.01) was already seen. The first occurrence in
// input order survives. Kept records carry their structure key.
CleanResult clean_set(const DataTable &t, const CleanOptions &opts = {});

class MissingKey : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Sets each record's weight to 1 / (records sharing its plain key), so each
// molecule's weights sum to one.
DataTable assign_intra_weights(const DataTable &t);

std::string format_clean_report(const CleanReport &r);
std::string clean_report_csv_header();
std::string clean_report_csv_row(const CleanReport &r);

}  // namespace solcur

#endif  // SOLCUR_DEDUPE_HPP_
