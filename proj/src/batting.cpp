#include "grouplin/batting.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <stdexcept>

#include "grouplin/io.hpp"

namespace grouplin::batting {

TransformedRecord arcsine_transform(long hits, long at_bats) {
  if (at_bats < 1) {
    throw std::invalid_argument("arcsine_transform: at_bats must be >= 1");
  }
  if (hits < 0 || hits > at_bats) {
    throw std::invalid_argument("arcsine_transform: hits outside [0, at_bats]");
  }
  const double x = std::asin(std::sqrt(
      (static_cast<double>(hits) + 0.25) / (static_cast<double>(at_bats) + 0.5)));
  return TransformedRecord{x, 1.0 / (4.0 * static_cast<double>(at_bats))};
}

std::vector<BattingRecord> filter_eligibility(
    const std::vector<BattingRecord>& records, Phase phase) {
  std::vector<BattingRecord> out;
  for (const auto& r : records) {
    if (r.n1 < 11) continue;
    if (phase == Phase::validation && r.n2 < 11) continue;
    out.push_back(r);
  }
  return out;
}

TseResult tse(const std::unordered_map<std::string, double>& estimates,
              const std::vector<BattingRecord>& validation) {
  TseResult out;
  for (const auto& rec : validation) {
    const auto it = estimates.find(rec.id);
    if (it == estimates.end()) {
      throw std::out_of_range("tse: missing estimate for id '" + rec.id + "'");
    }
    const double x2 = arcsine_transform(rec.h2, rec.n2).x;
    const double x1 = arcsine_transform(rec.h1, rec.n1).x;
    const double penalty = 1.0 / (4.0 * static_cast<double>(rec.n2));
    out.tse += (x2 - it->second) * (x2 - it->second) - penalty;
    out.tse_naive += (x2 - x1) * (x2 - x1) - penalty;
  }
  out.ratio = out.tse / out.tse_naive;
  return out;
}

BattingRecord hypergeometric_shuffle(const BattingRecord& record, Rng& rng) {
  BattingRecord out = record;
  const long hits = record.h1 + record.h2;
  out.h1 = rng.hypergeometric(record.n1 + record.n2, hits, record.n1);
  out.h2 = hits - out.h1;
  return out;
}

BattingRecord hypergeometric_shuffle(const BattingRecord& record,
                                     std::uint64_t seed) {
  Rng rng(seed);
  return hypergeometric_shuffle(record, rng);
}

std::string subset_name(Subset subset) {
  switch (subset) {
    case Subset::all: return "all";
    case Subset::pitchers: return "pitchers";
    case Subset::non_pitchers: return "non-pitchers";
  }
  return "all";
}

namespace {

std::vector<BattingRecord> select_subset(const std::vector<BattingRecord>& records,
                                         Subset subset) {
  if (subset == Subset::all) return records;
  std::vector<BattingRecord> out;
  for (const auto& r : records) {
    if ((subset == Subset::pitchers) == r.pitcher) out.push_back(r);
  }
  return out;
}

}  // namespace

double relative_tse(const std::vector<BattingRecord>& records,
                    const MethodSpec& method) {
  const auto estimation = filter_eligibility(records, Phase::estimation);
  if (estimation.empty()) {
    throw std::invalid_argument("relative_tse: no estimation-eligible records");
  }
  Dataset data;
  data.observations.reserve(estimation.size());
  for (const auto& r : estimation) {
    const auto t = arcsine_transform(r.h1, r.n1);
    data.observations.push_back(Observation{t.x, t.v});
  }
  const EstimateResult est = apply_method(data, method);
  std::unordered_map<std::string, double> by_id;
  by_id.reserve(estimation.size());
  for (std::size_t i = 0; i < estimation.size(); ++i) {
    by_id[estimation[i].id] = est.estimates[i];
  }
  return tse(by_id, filter_eligibility(records, Phase::validation)).ratio;
}

TableReport run_table(const std::vector<BattingRecord>& records,
                      std::span<const MethodSpec> methods,
                      std::span<const Subset> subsets,
                      std::size_t shuffle_rounds, std::uint64_t seed) {
  if (records.empty()) {
    throw std::invalid_argument("run_table: no records");
  }
  TableReport report;
  report.subsets.assign(subsets.begin(), subsets.end());
  report.shuffle_rounds = shuffle_rounds;
  report.rows.resize(methods.size());
  for (std::size_t m = 0; m < methods.size(); ++m) {
    report.rows[m].method = methods[m].label();
    report.rows[m].cells.resize(subsets.size());
  }

  for (std::size_t s = 0; s < subsets.size(); ++s) {
    const auto subset_records = select_subset(records, subsets[s]);
    for (std::size_t m = 0; m < methods.size(); ++m) {
      report.rows[m].cells[s].original = relative_tse(subset_records, methods[m]);
    }
  }

  if (shuffle_rounds == 0) return report;

  std::vector<std::vector<std::vector<double>>> ratios(
      methods.size(),
      std::vector<std::vector<double>>(subsets.size(),
                                       std::vector<double>(shuffle_rounds)));
  for (std::size_t r = 0; r < shuffle_rounds; ++r) {
    Rng rng(derive_seed(seed, r));
    std::vector<BattingRecord> shuffled;
    shuffled.reserve(records.size());
    for (const auto& rec : records) {
      shuffled.push_back(hypergeometric_shuffle(rec, rng));
    }
    for (std::size_t s = 0; s < subsets.size(); ++s) {
      const auto subset_records = select_subset(shuffled, subsets[s]);
      for (std::size_t m = 0; m < methods.size(); ++m) {
        ratios[m][s][r] = relative_tse(subset_records, methods[m]);
      }
    }
  }
  for (std::size_t m = 0; m < methods.size(); ++m) {
    for (std::size_t s = 0; s < subsets.size(); ++s) {
      double mean = 0.0;
      for (double x : ratios[m][s]) mean += x;
      mean /= static_cast<double>(shuffle_rounds);
      double var = 0.0;
      for (double x : ratios[m][s]) var += (x - mean) * (x - mean);
      double se = 0.0;
      if (shuffle_rounds > 1) {
        var /= static_cast<double>(shuffle_rounds - 1);
        se = std::sqrt(var / static_cast<double>(shuffle_rounds));
      }
      report.rows[m].cells[s].shuffled_mean = mean;
      report.rows[m].cells[s].shuffled_se = se;
    }
  }
  return report;
}

std::vector<BattingRecord> read_batting_csv(std::istream& in,
                                            const std::string& source) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) {
    throw data_error(source + ": empty input");
  }
  ++lineno;
  {
    const auto header = split_csv_line(line);
    const std::vector<std::string> expected{"id", "h1", "n1",
                                            "h2", "n2", "pitcher"};
    if (std::vector<std::string>(header.begin(), header.end()) != expected) {
      throw data_error(source + ":1: expected header 'id,h1,n1,h2,n2,pitcher'");
    }
  }
  auto parse_count = [](const std::string& field, const std::string& where,
                        const char* name) {
    char* end = nullptr;
    const long value = std::strtol(field.c_str(), &end, 10);
    if (field.empty() || end != field.c_str() + field.size() || value < 0) {
      throw data_error(where + ": " + name + " must be a nonnegative integer, got '" +
                       field + "'");
    }
    return value;
  };
  std::vector<BattingRecord> records;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    const auto fields = split_csv_line(line);
    const std::string where = source + ":" + std::to_string(lineno);
    if (fields.size() != 6) {
      throw data_error(where + ": expected 6 comma-separated values, got " +
                       std::to_string(fields.size()));
    }
    BattingRecord rec;
    rec.id = fields[0];
    if (rec.id.empty()) {
      throw data_error(where + ": empty id");
    }
    rec.h1 = parse_count(fields[1], where, "h1");
    rec.n1 = parse_count(fields[2], where, "n1");
    rec.h2 = parse_count(fields[3], where, "h2");
    rec.n2 = parse_count(fields[4], where, "n2");
    if (fields[5] == "0") {
      rec.pitcher = false;
    } else if (fields[5] == "1") {
      rec.pitcher = true;
    } else {
      throw data_error(where + ": pitcher must be 0 or 1, got '" + fields[5] + "'");
    }
    if (rec.h1 > rec.n1 || rec.h2 > rec.n2) {
      throw data_error(where + ": hits exceed at-bats");
    }
    records.push_back(std::move(rec));
  }
  if (records.empty()) {
    throw data_error(source + ": no data rows");
  }
  return records;
}

}  // namespace grouplin::batting
