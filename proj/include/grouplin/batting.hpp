#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "grouplin/estimators.hpp"
#include "grouplin/rng.hpp"

namespace grouplin::batting {

// Raw count record: hits and at-bats per half-season plus a pitcher flag.
struct BattingRecord {
  std::string id;
  long h1 = 0;
  long n1 = 0;
  long h2 = 0;
  long n2 = 0;
  bool pitcher = false;
};

// Arcsine-transformed rate and its stabilized variance 1/(4n).
struct TransformedRecord {
  double x = 0.0;
  double v = 0.0;
};

// x = arcsin(sqrt((h + 1/4)/(n + 1/2))), v = 1/(4n). Throws for n < 1 or
// h outside [0, n].
TransformedRecord arcsine_transform(long hits, long at_bats);

enum class Phase { estimation, validation };

// Estimation keeps n1 >= 11; validation keeps n1 >= 11 and n2 >= 11.
std::vector<BattingRecord> filter_eligibility(
    const std::vector<BattingRecord>& records, Phase phase);

struct TseResult {
  double tse = 0.0;        // sum_i [(x2_i - est_i)^2 - 1/(4 n2_i)]
  double tse_naive = 0.0;  // same with est_i = x1_i
  double ratio = 0.0;      // tse / tse_naive
};

// Total squared error of the supplied estimates over the validation records.
// Throws std::out_of_range when an eligible id has no estimate.
TseResult tse(const std::unordered_map<std::string, double>& estimates,
              const std::vector<BattingRecord>& validation);

// Redistributes a season's hits between the two halves: h1' is drawn from
// HG(n1 + n2, h1 + h2, n1) and h2' = (h1 + h2) - h1'. Totals and at-bats are
// conserved for every seed.
BattingRecord hypergeometric_shuffle(const BattingRecord& record, Rng& rng);
BattingRecord hypergeometric_shuffle(const BattingRecord& record,
                                     std::uint64_t seed);

enum class Subset { all, pitchers, non_pitchers };
std::string subset_name(Subset subset);

struct TableCell {
  double original = 0.0;       // relative TSE on the given data
  double shuffled_mean = 0.0;  // mean relative TSE over shuffle rounds
  double shuffled_se = 0.0;
};

struct TableRow {
  std::string method;
  std::vector<TableCell> cells;  // one per subset, in the order requested
};

struct TableReport {
  std::vector<Subset> subsets;
  std::vector<TableRow> rows;      // one per method, in the order requested
  std::size_t shuffle_rounds = 0;
};

// Relative-TSE matrix per (method, subset): estimate on first-half records
// with n1 >= 11, validate against second-half records with both halves
// >= 11, and average the same ratio over `shuffle_rounds` hypergeometric
// permutations of the data (round r uses derive_seed(seed, r)).
TableReport run_table(const std::vector<BattingRecord>& records,
                      std::span<const MethodSpec> methods,
                      std::span<const Subset> subsets,
                      std::size_t shuffle_rounds, std::uint64_t seed);

// Relative TSE of one method on one record set (no shuffling).
double relative_tse(const std::vector<BattingRecord>& records,
                    const MethodSpec& method);

// Reads CSV with header id,h1,n1,h2,n2,pitcher. Errors carry 1-based line
// numbers. `source` names the stream in error messages.
std::vector<BattingRecord> read_batting_csv(std::istream& in,
                                            const std::string& source);

}  // namespace grouplin::batting
