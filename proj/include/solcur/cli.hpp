//
// solcur - solubility dataset curation and evaluation toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SOLCUR_CLI_HPP_
#define SOLCUR_CLI_HPP_

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "solcur/metrics.hpp"

namespace solcur {

inline constexpr std::string_view kVersion = "0.1.0";

// Default output directory comes from this variable when --output-dir is
// not given; otherwise "solcur-out".
inline constexpr const char *kOutputDirEnv = "SOLCUR_OUTPUT_DIR";

// One table cell: a metric for a dataset under a method.
struct ReportCell {
  std::string dataset;
  std::string method;
  MetricReport report;
};

// Markdown table with one row per dataset and one column per method, both
// in first-appearance order. Cells read "0.58 ± 0.02"; in each row the
// cells whose point value is lowest after rounding to two decimals are
// bold. Missing combinations print "n/a".
std::string emit_report(const std::vector<ReportCell> &cells);

std::string metric_report_csv_header();
std::string metric_report_csv_row(const ReportCell &cell);
std::vector<ReportCell> read_metric_reports(const std::filesystem::path &path);

class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Entry point behind the solcur executable. Subcommands: clean, curate,
// split, eval, train-eval, hpo-demo, report. Returns 0 on success, 1 on
// data errors and 2 on usage or configuration errors. Diagnostics go to
// err; --help and --version text goes to out.
int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err);
int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

}  // namespace solcur

#endif  // SOLCUR_CLI_HPP_
