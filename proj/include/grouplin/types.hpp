#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace grouplin {

// One observed value together with its known sampling variance.
struct Observation {
  double x = 0.0;
  double v = 1.0;
};

// Ordered collection of observations; the unit every estimator operates on.
struct Dataset {
  std::vector<Observation> observations;

  Dataset() = default;
  explicit Dataset(std::vector<Observation> obs) : observations(std::move(obs)) {}
  Dataset(const std::vector<double>& x, const std::vector<double>& v);

  std::size_t size() const { return observations.size(); }
  bool empty() const { return observations.empty(); }
  double x(std::size_t i) const { return observations[i].x; }
  double v(std::size_t i) const { return observations[i].v; }

  std::vector<double> xs() const;
  std::vector<double> vs() const;
};

// Throws std::invalid_argument if any observation has v <= 0 or a non-finite
// field, or if the dataset is empty.
void validate(const Dataset& data);

// Summary of one shrinkage block.
struct BlockStats {
  std::size_t block = 0;  // position of the block in the partition
  std::size_t n_k = 0;
  double v_bar = 0.0;
  double x_bar = 0.0;
  double s_sq = 0.0;  // sample variance of x, divisor (n_k v 2) - 1
  double v_max = 0.0;
  double c = 0.0;
  double b_hat = 0.0;  // realized shrinkage factor, in [0, 1]
};

struct EstimateResult {
  std::vector<double> estimates;
  // One entry per nonempty block; empty for rules that do not group.
  std::vector<BlockStats> blocks;
  // Per-observation block index, -1 when outside every interval or for
  // rules that do not group.
  std::vector<long> block_of;
  // Per-observation realized shrinkage factor toward the rule's center.
  std::vector<double> shrinkage;
  std::string method;
  std::string warning;  // nonempty when a precondition fallback fired
};

// Location/spread pair of the normal-normal hierarchical model.
struct NormalNormalParams {
  double mu = 0.0;
  double gamma = 0.0;
};

}  // namespace grouplin
