//
// solcur - solubility dataset curation and evaluation toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SOLCUR_CURATE_HPP_
#define SOLCUR_CURATE_HPP_

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <stdexcept>
#include <string>

#include "solcur/dataset.hpp"

namespace solcur {

class UnknownSetId : public std::out_of_range {
public:
  explicit UnknownSetId(const std::string &set_id);
};

// Per-dataset quality weights in (0, 1]. Set ids compare case-insensitively.
class QualityTable {
public:
  QualityTable() = default;

  // AQUA, PHYSP, ESOL 1.0; OCHEM 0.85; CHEMBL 0.8; AQSOL 0.4.
  static QualityTable defaults();

  // Reads "set = weight" lines (INI style; '#' and ';' start comments,
  // section headers are ignored) or "set,weight" CSV rows.
  static QualityTable load(const std::filesystem::path &path);
  static QualityTable parse(std::string_view text);

  void set(const std::string &set_id, double weight);
  bool contains(const std::string &set_id) const;
  double at(const std::string &set_id) const;
  const std::map<std::string, double> &entries() const { return weights_; }

private:
  std::map<std::string, double> weights_;  // upper-cased keys
};

struct CurationConfig {
  double d = 0.5;
  QualityTable qualities = QualityTable::defaults();
};

// Extends each molecule of the target with same-molecule records from the
// other tables. Per plain key, records are weighted by their set quality,
// sorted by value and grouped left to right: a value joins the open group
// when it is closer than d to the group's weighted mean and the enlarged
// group's mean stays closer than d to its smallest member. Each group of two
// or more becomes one record with the weighted-mean value and weight
// min(1, sum of member weights); single records keep their fields and take
// their set quality as weight. Output is ordered by plain key, then value.
// Molecules absent from the target are never added.
DataTable curate_target(const DataTable &target, std::span<const DataTable> others,
                        const CurationConfig &cfg);

struct CurationSummary {
  std::string set_name;
  std::size_t records_before = 0;
  std::size_t records_after = 0;
  double mean_weight_before = 0.0;
  double mean_weight_after = 0.0;
  // True when both tables hold byte-identical serialized records.
  bool no_op = false;
};

CurationSummary curation_summary(const DataTable &before, const DataTable &after);
std::string curation_summary_csv_header();
std::string curation_summary_csv_row(const CurationSummary &s);

}  // namespace solcur

#endif  // SOLCUR_CURATE_HPP_
