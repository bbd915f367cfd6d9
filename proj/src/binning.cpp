#include "grouplin/binning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "grouplin/estimators.hpp"

namespace grouplin {

void validate(const BinPartition& partition) {
  const auto& ivs = partition.intervals;
  for (std::size_t k = 0; k < ivs.size(); ++k) {
    if (!std::isfinite(ivs[k].lo) || !std::isfinite(ivs[k].hi) ||
        ivs[k].lo > ivs[k].hi) {
      throw std::invalid_argument("BinPartition: interval " +
                                  std::to_string(k) + " is malformed");
    }
    if (k > 0 && ivs[k].lo < ivs[k - 1].hi) {
      throw std::invalid_argument("BinPartition: intervals " +
                                  std::to_string(k - 1) + " and " +
                                  std::to_string(k) +
                                  " overlap or are unordered");
    }
  }
  if (!partition.members.empty() &&
      partition.members.size() != ivs.size()) {
    throw std::invalid_argument(
        "BinPartition: membership does not match interval count");
  }
}

std::optional<std::size_t> assign(double v, const BinPartition& partition) {
  const auto& ivs = partition.intervals;
  if (ivs.empty()) return std::nullopt;
  // Last interval whose lower bound does not exceed v; boundaries shared by
  // two bins therefore resolve to the upper bin.
  auto it = std::upper_bound(
      ivs.begin(), ivs.end(), v,
      [](double value, const Interval& iv) { return value < iv.lo; });
  if (it == ivs.begin()) return std::nullopt;
  const std::size_t k = static_cast<std::size_t>(it - ivs.begin()) - 1;
  if (v < ivs[k].hi) return k;
  if (k + 1 == ivs.size() && v <= ivs[k].hi) return k;  // last bin is closed
  return std::nullopt;
}

std::size_t floor_cbrt(std::size_t n) {
  if (n == 0) return 0;
  auto cube = [](std::size_t k) { return k * k * k; };
  std::size_t k = static_cast<std::size_t>(
      std::cbrt(static_cast<double>(n)) + 0.5);
  if (k == 0) k = 1;
  while (k > 1 && cube(k) > n) --k;
  while (cube(k + 1) <= n) ++k;
  return k;
}

std::size_t floor_pow_two_thirds(std::size_t n) { return floor_cbrt(n * n); }

namespace {

void fill_members(BinPartition& partition, const Dataset& data) {
  partition.members.assign(partition.intervals.size(), {});
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (auto k = assign(data.v(i), partition)) {
      partition.members[*k].push_back(i);
    }
  }
}

std::pair<double, double> variance_range(const Dataset& data) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& o : data.observations) {
    lo = std::min(lo, o.v);
    hi = std::max(hi, o.v);
  }
  return {lo, hi};
}

}  // namespace

BinPartition bins_equal_log(const Dataset& data) {
  validate(data);
  const auto [v_min, v_max] = variance_range(data);
  const std::size_t m = std::max<std::size_t>(1, floor_cbrt(data.size()));

  BinPartition partition;
  if (v_min == v_max || m == 1) {
    partition.intervals.push_back({v_min, v_max});
  } else {
    const double l_min = std::log(v_min);
    const double l_max = std::log(v_max);
    std::vector<double> bounds{v_min};
    for (std::size_t k = 1; k < m; ++k) {
      const double b = std::exp(
          l_min + (l_max - l_min) * static_cast<double>(k) /
                      static_cast<double>(m));
      if (b > bounds.back() && b < v_max) bounds.push_back(b);
    }
    bounds.push_back(v_max);
    for (std::size_t k = 0; k + 1 < bounds.size(); ++k) {
      partition.intervals.push_back({bounds[k], bounds[k + 1]});
    }
  }
  fill_members(partition, data);
  return partition;
}

BinPartition bins_equal_width(const Dataset& data, double lipschitz) {
  validate(data);
  if (!(lipschitz > 0.0) || !std::isfinite(lipschitz)) {
    throw std::invalid_argument("bins_equal_width: lipschitz must be > 0");
  }
  const auto [v_min, v_max] = variance_range(data);
  const double width = std::cbrt(10.0 * v_max * v_max /
                                 (static_cast<double>(data.size()) * lipschitz));
  const double range = v_max - v_min;

  BinPartition partition;
  if (range <= 0.0 || width >= range) {
    partition.intervals.push_back({v_min, v_max});
  } else {
    std::vector<double> bounds{v_min};
    for (std::size_t k = 1;; ++k) {
      const double b = v_min + width * static_cast<double>(k);
      if (b >= v_max) break;
      bounds.push_back(b);
    }
    bounds.push_back(v_max);
    for (std::size_t k = 0; k + 1 < bounds.size(); ++k) {
      partition.intervals.push_back({bounds[k], bounds[k + 1]});
    }
  }
  fill_members(partition, data);
  return partition;
}

BinPartition bins_dynamic(const Dataset& data) {
  validate(data);
  const std::size_t n = data.size();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (data.v(a) != data.v(b)) return data.v(a) < data.v(b);
    return a < b;
  });
  std::vector<double> xs(n), vs(n);
  for (std::size_t j = 0; j < n; ++j) {
    xs[j] = data.x(order[j]);
    vs[j] = data.v(order[j]);
  }

  // Atoms of tied variance; cuts may only fall between atoms.
  std::vector<std::size_t> atom_off{0};
  for (std::size_t j = 1; j < n; ++j) {
    if (vs[j] != vs[j - 1]) atom_off.push_back(j);
  }
  atom_off.push_back(n);
  const std::size_t n_atoms = atom_off.size() - 1;

  const std::size_t cap = std::max<std::size_t>(1, floor_pow_two_thirds(n));

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> best(n_atoms + 1, inf);
  std::vector<std::size_t> cut(n_atoms + 1, 0);
  best[0] = 0.0;
  for (std::size_t g = 1; g <= n_atoms; ++g) {
    for (std::size_t h = g; h-- > 0;) {
      const std::size_t count = atom_off[g] - atom_off[h];
      // A tie group above the cap is still atomic: it forms its own block.
      if (count > cap && h + 1 != g) break;
      const double cost = block_sure(
          std::span<const double>(xs).subspan(atom_off[h], count),
          std::span<const double>(vs).subspan(atom_off[h], count));
      const double cand = best[h] + cost;
      if (cand < best[g]) {
        best[g] = cand;
        cut[g] = h;
      }
    }
  }

  std::vector<std::size_t> cuts;  // atom indices where blocks start
  for (std::size_t g = n_atoms; g > 0; g = cut[g]) {
    cuts.push_back(cut[g]);
  }
  std::reverse(cuts.begin(), cuts.end());

  BinPartition partition;
  partition.members.reserve(cuts.size());
  for (std::size_t b = 0; b < cuts.size(); ++b) {
    const std::size_t first = atom_off[cuts[b]];
    const std::size_t last =
        (b + 1 < cuts.size() ? atom_off[cuts[b + 1]] : n) - 1;
    Interval iv;
    iv.lo = (first == 0) ? vs.front() : 0.5 * (vs[first - 1] + vs[first]);
    iv.hi = (last == n - 1) ? vs.back() : 0.5 * (vs[last] + vs[last + 1]);
    partition.intervals.push_back(iv);
    std::vector<std::size_t> members(order.begin() + first,
                                     order.begin() + last + 1);
    std::sort(members.begin(), members.end());
    partition.members.push_back(std::move(members));
  }
  return partition;
}

BinPartition partition_from_intervals(std::vector<Interval> intervals,
                                      const Dataset& data) {
  BinPartition partition;
  partition.intervals = std::move(intervals);
  validate(partition);
  fill_members(partition, data);
  return partition;
}

double partition_sure(const Dataset& data, const BinPartition& partition) {
  validate(data);
  validate(partition);
  std::vector<std::vector<std::size_t>> buckets(partition.block_count());
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (auto k = assign(data.v(i), partition)) {
      buckets[*k].push_back(i);
    } else {
      total += data.v(i);  // uncovered observations keep the naive risk
    }
  }
  for (auto& idx : buckets) {
    if (idx.empty()) continue;
    // Match the v-sorted evaluation order used when partitions are built, so
    // totals compare bit for bit.
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      if (data.v(a) != data.v(b)) return data.v(a) < data.v(b);
      return a < b;
    });
    std::vector<double> xs(idx.size()), vs(idx.size());
    for (std::size_t j = 0; j < idx.size(); ++j) {
      xs[j] = data.x(idx[j]);
      vs[j] = data.v(idx[j]);
    }
    total += block_sure(std::span<const double>(xs),
                        std::span<const double>(vs));
  }
  return total;
}

}  // namespace grouplin
