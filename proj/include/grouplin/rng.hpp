#pragma once

#include <cstdint>
#include <random>

namespace grouplin {

// Mixes a base seed with a stream number so that independent replicate
// streams can be derived up front; results then do not depend on the order
// in which replicates are actually run.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

// Deterministic random source. The samplers are written out here instead of
// using std::*_distribution so that a given seed produces the same stream on
// every standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1).
  double uniform01();
  double uniform(double lo, double hi);
  double normal(double mean = 0.0, double sd = 1.0);
  // Chi-squared with an even number of degrees of freedom.
  double chi_squared_even(int dof);
  // Number of marked items in a size-`draws` sample without replacement
  // from `total` items of which `marked` are marked. Inverse-CDF walk with
  // log-factorial evaluation of each term.
  long hypergeometric(long total, long marked, long draws);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// ln k!
double log_factorial(long k);

}  // namespace grouplin
