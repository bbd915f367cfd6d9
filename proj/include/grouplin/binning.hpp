#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "grouplin/types.hpp"

namespace grouplin {

// Half-open interval [lo, hi) over variance space; the last interval of a
// partition is closed above. lo == hi is permitted for the degenerate
// single-point bin that arises when all variances coincide.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Ordered disjoint intervals over variance space plus the index sets of the
// dataset the partition was built from.
struct BinPartition {
  std::vector<Interval> intervals;
  std::vector<std::vector<std::size_t>> members;

  std::size_t block_count() const { return intervals.size(); }
};

// Throws std::invalid_argument when intervals are unordered or overlap.
void validate(const BinPartition& partition);

// Block index containing v, respecting the half-open convention (a shared
// boundary belongs to the upper bin, the global maximum to the last bin).
std::optional<std::size_t> assign(double v, const BinPartition& partition);

// floor(n^(1/3)) and floor(n^(2/3)) without floating-point edge cases.
std::size_t floor_cbrt(std::size_t n);
std::size_t floor_pow_two_thirds(std::size_t n);

// floor(n^(1/3)) equal-length bins over [min log v, max log v]; a single bin
// when all variances coincide.
BinPartition bins_equal_log(const Dataset& data);

// Contiguous bins of width (10 v_max^2 / (n L))^(1/3) anchored at min v;
// a single bin when the width reaches the full range.
BinPartition bins_equal_width(const Dataset& data, double lipschitz);

// SURE-optimal partition into contiguous bins of the v-sorted order, each
// holding at most floor(n^(2/3)) observations, found by dynamic programming.
// Cut points are realized as midpoints between adjacent distinct variances;
// tied variances are never separated.
BinPartition bins_dynamic(const Dataset& data);

// Membership for an interval list supplied by the caller (validated).
BinPartition partition_from_intervals(std::vector<Interval> intervals,
                                      const Dataset& data);

// Total unbiased risk estimate of the group-linear rule under `partition`:
// sum of block_sure over blocks plus v_i for uncovered observations.
double partition_sure(const Dataset& data, const BinPartition& partition);

}  // namespace grouplin
