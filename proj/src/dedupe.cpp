//
// solcur - solubility dataset curation and evaluation toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "solcur/dedupe.hpp"

#include <algorithm>
#include <sstream>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "solcur/decimal.hpp"

namespace solcur {

namespace {

std::vector<StandardizedMolecule> standardize_all(const DataTable &t, const CleanOptions &opts) {
  std::vector<StandardizedMolecule> out(t.records.size());
  const StandardizeOptions sopts{opts.neutralize};
  unsigned threads = opts.threads ? opts.threads : std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(out.size() / 64 + 1)));
  // Each worker writes a disjoint stride of slots, so the result does not
  // depend on scheduling.
  auto work = [&](unsigned w) {
    for (std::size_t i = w; i < out.size(); i += threads)
      out[i] = standardize(t.records[i].raw_smiles, sopts);
  };
  if (threads == 1) {
    work(0);
    return out;
  }
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w);
  for (auto &th : pool) th.join();
  return out;
}

}  // namespace

CleanResult clean_set(const DataTable &t, const CleanOptions &opts) {
  CleanResult result;
  result.table.name = t.name;
  CleanReport &rep = result.report;
  rep.set_name = t.name;
  rep.input_records = t.records.size();

  const std::vector<StandardizedMolecule> std_mols = standardize_all(t, opts);
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < t.records.size(); ++i) {
    const SolubilityRecord &rec = t.records[i];
    const StandardizedMolecule &sm = std_mols[i];
    const RejectReason reason = sm.report.rejected_reason;
    if (reason != RejectReason::kNone) {
      if (reason == RejectReason::kParseError) ++rep.parse_failures;
      if (reason == RejectReason::kMetal) ++rep.metals_removed;
      if (reason == RejectReason::kSingleHeavyAtom) ++rep.single_atom_removed;
      result.rejections.push_back(Rejection{i + 1, std::string(to_string(reason)), rec.raw_smiles,
                                            format_shortest(rec.value)});
      continue;
    }
    if (!seen.insert(record_key(*sm.key, rec.value)).second) {
      ++rep.duplicates_removed;
      continue;
    }
    SolubilityRecord kept = rec;
    kept.key = *sm.key;
    result.table.records.push_back(std::move(kept));
  }
  rep.output_records = result.table.records.size();
  std::unordered_set<std::string> stereo, plain;
  for (const SolubilityRecord &r : result.table.records) {
    stereo.insert(r.key->stereo_key);
    plain.insert(r.key->plain_key);
  }
  rep.unique_molecules_stereo = stereo.size();
  rep.unique_molecules_plain = plain.size();
  return result;
}

DataTable assign_intra_weights(const DataTable &t) {
  std::unordered_map<std::string, std::size_t> counts;
  for (std::size_t i = 0; i < t.records.size(); ++i) {
    if (!t.records[i].key)
      throw MissingKey("record " + std::to_string(i + 1) + " has no structure key");
    ++counts[t.records[i].key->plain_key];
  }
  DataTable out = t;
  for (SolubilityRecord &r : out.records)
    r.weight = 1.0 / static_cast<double>(counts[r.key->plain_key]);
  return out;
}

std::string format_clean_report(const CleanReport &r) {
  std::ostringstream s;
  s << r.set_name << ": " << r.input_records << " input records -> " << r.output_records
    << " kept\n"
    << "  parse failures:       " << r.parse_failures << '\n'
    << "  metals removed:       " << r.metals_removed << '\n'
    << "  single heavy atom:    " << r.single_atom_removed << '\n'
    << "  duplicates removed:   " << r.duplicates_removed << '\n'
    << "  unique molecules:     " << r.unique_molecules_stereo << " ("
    << r.unique_molecules_plain << " ignoring stereo)\n";
  return s.str();
}

std::string clean_report_csv_header() {
  return "set,input_records,parse_failures,metals_removed,single_atom_removed,"
         "duplicates_removed,output_records,unique_molecules_stereo,unique_molecules_plain\n";
}

std::string clean_report_csv_row(const CleanReport &r) {
  std::ostringstream s;
  s << csv_field(r.set_name) << ',' << r.input_records << ',' << r.parse_failures << ','
    << r.metals_removed << ',' << r.single_atom_removed << ',' << r.duplicates_removed << ','
    << r.output_records << ',' << r.unique_molecules_stereo << ',' << r.unique_molecules_plain
    << '\n';
  return s.str();
}

}  // namespace solcur
