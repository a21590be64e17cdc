//
// solcur - solubility dataset curation and evaluation toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SOLCUR_DATASET_HPP_
#define SOLCUR_DATASET_HPP_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "solcur/standardize.hpp"

namespace solcur {

// One measurement. value is log10 of solubility in mol/L.
struct SolubilityRecord {
  std::string raw_smiles;
  std::optional<StructureKey> key;
  double value = 0.0;
  double weight = 1.0;
  std::string set_id;
  std::optional<std::string> source_id;
  std::optional<double> temperature_c;
  std::optional<double> ph;

  friend bool operator==(const SolubilityRecord &, const SolubilityRecord &) = default;
};

struct DataTable {
  std::string name;
  std::vector<SolubilityRecord> records;

  std::size_t size() const { return records.size(); }
  friend bool operator==(const DataTable &, const DataTable &) = default;
};

// Column names in an input file. Empty optional columns are not read.
struct SchemaMapping {
  std::string smiles_column = "smiles";
  std::string value_column = "value";
  std::string weight_column;
  std::string source_column;
  std::string temperature_column;
  std::string ph_column;
  std::string set_column;
  std::string stereo_key_column;
  std::string plain_key_column;

  // The layout written by emit_csv.
  static SchemaMapping native();
};

// Guesses a mapping from a header row: the native layout when it matches,
// otherwise the first column mentioning "smiles" and the first value column
// among common solubility headers (logS, log_s, solubility, value, ...).
// Columns that cannot be found are left empty.
SchemaMapping detect_schema(const std::vector<std::string> &header);

class MissingColumn : public std::runtime_error {
public:
  explicit MissingColumn(const std::string &column);
  const std::string &column() const { return column_; }

private:
  std::string column_;
};

class EmptyFile : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class UnreadableRow : public std::runtime_error {
public:
  UnreadableRow(std::size_t row, const std::string &what);
  std::size_t row() const { return row_; }

private:
  std::size_t row_;
};

class IoFailure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// A data row that did not become a record. row is 1-based over data rows
// (the header is row 0).
struct Rejection {
  std::size_t row = 0;
  std::string reason;
  std::string raw_smiles;
  std::string raw_value;

  friend bool operator==(const Rejection &, const Rejection &) = default;
};

struct IngestResult {
  DataTable table;
  std::vector<Rejection> rejections;
  std::size_t input_rows = 0;
};

// Splits CSV text into rows of fields (RFC 4180 quoting, CRLF or LF line
// ends, optional UTF-8 byte-order mark). Throws UnreadableRow on an
// unterminated quoted field.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

// Quotes a field when it contains a comma, quote, or line break.
std::string csv_field(std::string_view field);

// Reads a CSV file into records. Rows with a missing or non-finite value,
// an empty SMILES, a malformed optional number, an out-of-range weight or
// the wrong field count are returned as rejections. set_id comes from the
// mapping's set column when present, otherwise from set_name (or the file
// stem when set_name is empty).
IngestResult ingest_csv(const std::filesystem::path &path,
                        const SchemaMapping &mapping,
                        const std::string &set_name = {});

void write_rejections(const std::vector<Rejection> &rejections,
                      const std::filesystem::path &path);

// Sidecar file name for rejected rows: "<name>.rejected.csv".
std::filesystem::path rejection_path(const std::filesystem::path &dir,
                                     const std::string &name);

// Keeps records with temperature in [20, 30] C and pH in [6, 8]; records
// without the metadata pass.
DataTable protocol_filter(const DataTable &t);

// Writes the native layout. Numbers use the shortest text that reads back
// to the same double, so emit then ingest is lossless.
void emit_csv(const DataTable &t, const std::filesystem::path &path);
std::string to_csv(const DataTable &t);

// Ingests a file written by emit_csv. The table name is the file stem.
DataTable read_table(const std::filesystem::path &path);

std::string read_file(const std::filesystem::path &path);
void write_file(const std::filesystem::path &path, std::string_view content);

}  // namespace solcur

#endif  // SOLCUR_DATASET_HPP_
