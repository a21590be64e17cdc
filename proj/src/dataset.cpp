//
// solcur - solubility dataset curation and evaluation toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "solcur/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "solcur/decimal.hpp"

namespace solcur {

namespace {

const std::vector<std::string> kNativeHeader = {
    "smiles", "value",         "weight", "set_id",     "source_id",
    "temperature_c", "ph",     "stereo_key", "plain_key"};

std::string lower(std::string_view s) {
  std::string out(s);
  for (char &c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

std::string optional_number_text(const std::optional<double> &v) {
  return v ? format_shortest(*v) : std::string();
}

}  // namespace

SchemaMapping SchemaMapping::native() {
  SchemaMapping m;
  m.smiles_column = "smiles";
  m.value_column = "value";
  m.weight_column = "weight";
  m.set_column = "set_id";
  m.source_column = "source_id";
  m.temperature_column = "temperature_c";
  m.ph_column = "ph";
  m.stereo_key_column = "stereo_key";
  m.plain_key_column = "plain_key";
  return m;
}

SchemaMapping detect_schema(const std::vector<std::string> &header) {
  if (header == kNativeHeader) return SchemaMapping::native();
  SchemaMapping m;
  m.smiles_column.clear();
  m.value_column.clear();
  for (const std::string &name : header) {
    if (m.smiles_column.empty() && lower(name).find("smiles") != std::string::npos)
      m.smiles_column = name;
  }
  static const std::vector<std::string> value_names = {
      "logs", "log_s", "logsol", "log_sol", "solubility", "value", "y",
      "target", "measured log solubility in mols per litre", "expt"};
  for (const std::string &want : value_names) {
    for (const std::string &name : header) {
      if (lower(name) == want) {
        m.value_column = name;
        break;
      }
    }
    if (!m.value_column.empty()) break;
  }
  for (const std::string &name : header) {
    const std::string l = lower(name);
    if (l == "weight" || l == "weights" || l == "w") m.weight_column = name;
    if (l == "source" || l == "source_id" || l == "reference") m.source_column = name;
    if (l == "temperature" || l == "temperature_c" || l == "t") m.temperature_column = name;
    if (l == "ph") m.ph_column = name;
  }
  return m;
}

MissingColumn::MissingColumn(const std::string &column)
    : std::runtime_error("missing column: " + column), column_(column) {}

UnreadableRow::UnreadableRow(std::size_t row, const std::string &what)
    : std::runtime_error("row " + std::to_string(row) + ": " + what), row_(row) {}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t row_start_line = 0;
  auto end_row = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
    // Blank lines carry no data.
    if (!(row.size() == 1 && row[0].empty())) rows.push_back(std::move(row));
    row.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"' && !field_started) {
      in_quotes = true;
      field_started = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      field_started = false;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      end_row();
      row_start_line = rows.size();
    } else {
      field += c;
      field_started = true;
    }
  }
  if (in_quotes) throw UnreadableRow(row_start_line, "unterminated quoted field");
  if (field_started || !row.empty()) end_row();
  return rows;
}

std::string csv_field(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string read_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path &path, std::string_view content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoFailure("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw IoFailure("write failed: " + path.string());
}

IngestResult ingest_csv(const std::filesystem::path &path, const SchemaMapping &mapping,
                        const std::string &set_name) {
  const std::string text = read_file(path);
  const auto rows = parse_csv(text);
  if (rows.empty()) throw EmptyFile("empty file: " + path.string());

  const std::vector<std::string> &header = rows[0];
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < header.size(); ++i) index.emplace(trim(header[i]), i);
  auto required = [&](const std::string &name) {
    const auto it = index.find(name);
    if (name.empty() || it == index.end()) throw MissingColumn(name.empty() ? "<unset>" : name);
    return static_cast<long>(it->second);
  };
  auto optional = [&](const std::string &name) -> long {
    if (name.empty()) return -1;
    const auto it = index.find(name);
    if (it == index.end()) throw MissingColumn(name);
    return static_cast<long>(it->second);
  };
  const long smiles_col = required(mapping.smiles_column);
  const long value_col = required(mapping.value_column);
  const long weight_col = optional(mapping.weight_column);
  const long source_col = optional(mapping.source_column);
  const long temp_col = optional(mapping.temperature_column);
  const long ph_col = optional(mapping.ph_column);
  const long set_col = optional(mapping.set_column);
  const long stereo_col = optional(mapping.stereo_key_column);
  const long plain_col = optional(mapping.plain_key_column);

  IngestResult result;
  result.table.name = set_name.empty() ? path.stem().string() : set_name;
  result.input_rows = rows.size() - 1;

  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto &row = rows[r];
    auto cell = [&](long col) -> std::string {
      return col >= 0 && static_cast<std::size_t>(col) < row.size()
                 ? row[static_cast<std::size_t>(col)]
                 : std::string();
    };
    Rejection rej{r, {}, trim(cell(smiles_col)), trim(cell(value_col))};
    if (row.size() != header.size()) {
      rej.reason = "field-count";
      result.rejections.push_back(std::move(rej));
      continue;
    }
    SolubilityRecord rec;
    rec.raw_smiles = rej.raw_smiles;
    if (rec.raw_smiles.empty()) {
      rej.reason = "empty-smiles";
      result.rejections.push_back(std::move(rej));
      continue;
    }
    if (rej.raw_value.empty()) {
      rej.reason = "missing-value";
      result.rejections.push_back(std::move(rej));
      continue;
    }
    if (!parse_double(rej.raw_value, rec.value)) {
      rej.reason = "unparseable-value";
      result.rejections.push_back(std::move(rej));
      continue;
    }
    if (!std::isfinite(rec.value)) {
      rej.reason = "non-finite-value";
      result.rejections.push_back(std::move(rej));
      continue;
    }
    auto read_optional = [&](long col, std::optional<double> &out) {
      const std::string text_value = trim(cell(col));
      if (col < 0 || text_value.empty()) return true;
      double v = 0.0;
      if (!parse_double(text_value, v) || !std::isfinite(v)) return false;
      out = v;
      return true;
    };
    std::optional<double> weight;
    if (!read_optional(weight_col, weight) || (weight && !(*weight > 0.0 && *weight <= 1.0))) {
      rej.reason = "bad-weight";
      result.rejections.push_back(std::move(rej));
      continue;
    }
    rec.weight = weight.value_or(1.0);
    if (!read_optional(temp_col, rec.temperature_c)) {
      rej.reason = "bad-temperature";
      result.rejections.push_back(std::move(rej));
      continue;
    }
    if (!read_optional(ph_col, rec.ph)) {
      rej.reason = "bad-ph";
      result.rejections.push_back(std::move(rej));
      continue;
    }
    rec.set_id = set_col >= 0 ? trim(cell(set_col)) : std::string();
    if (rec.set_id.empty()) rec.set_id = result.table.name;
    if (source_col >= 0 && !cell(source_col).empty()) rec.source_id = cell(source_col);
    const std::string stereo = cell(stereo_col);
    const std::string plain = cell(plain_col);
    if (!stereo.empty() && !plain.empty()) rec.key = StructureKey{stereo, plain};
    result.table.records.push_back(std::move(rec));
  }
  return result;
}

std::filesystem::path rejection_path(const std::filesystem::path &dir, const std::string &name) {
  return dir / (name + ".rejected.csv");
}

void write_rejections(const std::vector<Rejection> &rejections, const std::filesystem::path &path) {
  std::string out = "row,reason,smiles,value\n";
  for (const Rejection &r : rejections) {
    out += std::to_string(r.row) + ',' + csv_field(r.reason) + ',' + csv_field(r.raw_smiles) +
           ',' + csv_field(r.raw_value) + '\n';
  }
  write_file(path, out);
}

DataTable protocol_filter(const DataTable &t) {
  DataTable out{t.name, {}};
  for (const SolubilityRecord &r : t.records) {
    if (r.temperature_c && !(*r.temperature_c >= 20.0 && *r.temperature_c <= 30.0)) continue;
    if (r.ph && !(*r.ph >= 6.0 && *r.ph <= 8.0)) continue;
    out.records.push_back(r);
  }
  return out;
}

std::string to_csv(const DataTable &t) {
  std::string out;
  for (std::size_t i = 0; i < kNativeHeader.size(); ++i) {
    if (i) out += ',';
    out += kNativeHeader[i];
  }
  out += '\n';
  for (const SolubilityRecord &r : t.records) {
    out += csv_field(r.raw_smiles);
    out += ',' + format_shortest(r.value);
    out += ',' + format_shortest(r.weight);
    out += ',' + csv_field(r.set_id);
    out += ',' + csv_field(r.source_id.value_or(""));
    out += ',' + optional_number_text(r.temperature_c);
    out += ',' + optional_number_text(r.ph);
    out += ',' + csv_field(r.key ? r.key->stereo_key : "");
    out += ',' + csv_field(r.key ? r.key->plain_key : "");
    out += '\n';
  }
  return out;
}

void emit_csv(const DataTable &t, const std::filesystem::path &path) {
  write_file(path, to_csv(t));
}

DataTable read_table(const std::filesystem::path &path) {
  IngestResult r = ingest_csv(path, SchemaMapping::native());
  if (!r.rejections.empty()) {
    throw UnreadableRow(r.rejections.front().row,
                        "invalid row in " + path.string() + ": " + r.rejections.front().reason);
  }
  return std::move(r.table);
}

}  // namespace solcur
