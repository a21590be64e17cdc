//
// solcur - solubility dataset curation and evaluation toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "solcur/curate.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>

#include "solcur/decimal.hpp"

namespace solcur {

namespace {

std::string upper(std::string_view s) {
  std::string out(s);
  for (char &c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

struct Member {
  const SolubilityRecord *record;
  double weight;
  bool from_target;
};

SolubilityRecord merge(const std::vector<Member> &group, const std::string &target_name) {
  if (group.size() == 1) {
    SolubilityRecord r = *group[0].record;
    r.weight = group[0].weight;
    return r;
  }
  double wsum = 0.0, wv = 0.0;
  std::set<std::string> sets;
  const SolubilityRecord *representative = group[0].record;
  bool have_target = group[0].from_target;
  for (const Member &m : group) {
    wsum += m.weight;
    wv += m.weight * m.record->value;
    sets.insert(m.record->set_id);
    if (!have_target && m.from_target) {
      representative = m.record;
      have_target = true;
    }
  }
  SolubilityRecord r;
  r.raw_smiles = representative->raw_smiles;
  r.key = representative->key;
  r.value = wv / wsum;
  r.weight = std::min(1.0, wsum);
  r.set_id = target_name;
  std::string joined;
  for (const std::string &s : sets) joined += (joined.empty() ? "" : "+") + s;
  r.source_id = joined;
  return r;
}

// Serialized data rows in sorted order, so tables holding the same records
// in a different order compare equal.
std::vector<std::string> sorted_rows(const DataTable &t) {
  std::vector<std::string> rows;
  std::istringstream in(to_csv(t));
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) rows.push_back(line);
  std::sort(rows.begin(), rows.end());
  return rows;
}

}  // namespace

UnknownSetId::UnknownSetId(const std::string &set_id)
    : std::out_of_range("no quality weight for set " + set_id) {}

QualityTable QualityTable::defaults() {
  QualityTable q;
  q.set("AQUA", 1.0);
  q.set("PHYSP", 1.0);
  q.set("ESOL", 1.0);
  q.set("OCHEM", 0.85);
  q.set("AQSOL", 0.4);
  q.set("CHEMBL", 0.8);
  return q;
}

QualityTable QualityTable::parse(std::string_view text) {
  QualityTable q;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t comment = line.find_first_of("#;");
    if (comment != std::string::npos) line.erase(comment);
    line = trim(line);
    if (line.empty() || line.front() == '[') continue;
    std::size_t sep = line.find('=');
    if (sep == std::string::npos) sep = line.find(',');
    if (sep == std::string::npos)
      throw std::invalid_argument("quality weights line " + std::to_string(lineno) +
                                  ": expected set = weight");
    const std::string name = trim(line.substr(0, sep));
    double w = 0.0;
    if (!parse_double(line.substr(sep + 1), w)) {
      // A CSV header row such as "set,weight".
      if (lineno == 1 && line.find(',') != std::string::npos) continue;
      throw std::invalid_argument("quality weights line " + std::to_string(lineno) +
                                  ": bad weight");
    }
    q.set(name, w);
  }
  return q;
}

QualityTable QualityTable::load(const std::filesystem::path &path) {
  return parse(read_file(path));
}

void QualityTable::set(const std::string &set_id, double weight) {
  if (!(weight > 0.0 && weight <= 1.0))
    throw std::invalid_argument("quality weight for " + set_id + " must be in (0, 1]");
  weights_[upper(set_id)] = weight;
}

bool QualityTable::contains(const std::string &set_id) const {
  return weights_.count(upper(set_id)) != 0;
}

double QualityTable::at(const std::string &set_id) const {
  const auto it = weights_.find(upper(set_id));
  if (it == weights_.end()) throw UnknownSetId(set_id);
  return it->second;
}

DataTable curate_target(const DataTable &target, std::span<const DataTable> others,
                        const CurationConfig &cfg) {
  if (!(cfg.d > 0.0)) throw std::invalid_argument("merge threshold d must be positive");
  std::map<std::string, std::vector<Member>> by_key;
  for (const SolubilityRecord &r : target.records) {
    if (!r.key) throw std::invalid_argument("target record without structure key");
    by_key[r.key->plain_key].push_back({&r, cfg.qualities.at(r.set_id), true});
  }
  for (const DataTable &t : others) {
    for (const SolubilityRecord &r : t.records) {
      if (!r.key) throw std::invalid_argument("record without structure key in " + t.name);
      const auto it = by_key.find(r.key->plain_key);
      if (it != by_key.end()) it->second.push_back({&r, cfg.qualities.at(r.set_id), false});
    }
  }

  DataTable out{target.name, {}};
  for (auto &[key, members] : by_key) {
    std::stable_sort(members.begin(), members.end(), [](const Member &a, const Member &b) {
      return a.record->value < b.record->value;
    });
    std::vector<Member> group;
    double wsum = 0.0, wv = 0.0;
    for (const Member &m : members) {
      if (!group.empty()) {
        const double mean = wv / wsum;
        const double grown = (wv + m.weight * m.record->value) / (wsum + m.weight);
        const bool joins = std::fabs(m.record->value - mean) < cfg.d &&
                           grown - group.front().record->value < cfg.d;
        if (!joins) {
          out.records.push_back(merge(group, target.name));
          group.clear();
          wsum = wv = 0.0;
        }
      }
      group.push_back(m);
      wsum += m.weight;
      wv += m.weight * m.record->value;
    }
    if (!group.empty()) out.records.push_back(merge(group, target.name));
  }
  return out;
}

CurationSummary curation_summary(const DataTable &before, const DataTable &after) {
  auto mean_weight = [](const DataTable &t) {
    if (t.records.empty()) return 0.0;
    double s = 0.0;
    for (const SolubilityRecord &r : t.records) s += r.weight;
    return s / static_cast<double>(t.records.size());
  };
  CurationSummary s;
  s.set_name = after.name;
  s.records_before = before.records.size();
  s.records_after = after.records.size();
  s.mean_weight_before = mean_weight(before);
  s.mean_weight_after = mean_weight(after);
  s.no_op = sorted_rows(before) == sorted_rows(after);
  return s;
}

std::string curation_summary_csv_header() {
  return "set,records_before,mean_weight_before,records_after,mean_weight_after,no_op\n";
}

std::string curation_summary_csv_row(const CurationSummary &s) {
  return csv_field(s.set_name) + ',' + std::to_string(s.records_before) + ',' +
         format_fixed(s.mean_weight_before, 3) + ',' + std::to_string(s.records_after) + ',' +
         format_fixed(s.mean_weight_after, 3) + ',' + (s.no_op ? "true" : "false") + '\n';
}

}  // namespace solcur
