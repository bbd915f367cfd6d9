#include "grouplin/rng.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace grouplin {

namespace {

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return mix64(mix64(base) ^ mix64(stream * 0x9e3779b97f4a7c15ULL + 1));
}

double Rng::uniform01() {
  // 53-bit mantissa of a 64-bit draw.
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform01();
}

double Rng::normal(double mean, double sd) {
  if (has_spare_) {
    has_spare_ = false;
    return mean + sd * spare_;
  }
  // Box-Muller; u strictly positive so the log is finite.
  double u = 0.0;
  do {
    u = uniform01();
  } while (u <= 0.0);
  const double r = std::sqrt(-2.0 * std::log(u));
  const double t = 2.0 * M_PI * uniform01();
  spare_ = r * std::sin(t);
  has_spare_ = true;
  return mean + sd * r * std::cos(t);
}

double Rng::chi_squared_even(int dof) {
  if (dof < 2 || dof % 2 != 0) {
    throw std::invalid_argument("chi_squared_even: dof must be even and >= 2");
  }
  // Sum of dof/2 exponentials, folded into one log.
  double prod = 1.0;
  for (int i = 0; i < dof / 2; ++i) {
    double u = 0.0;
    do {
      u = uniform01();
    } while (u <= 0.0);
    prod *= u;
  }
  return -2.0 * std::log(prod);
}

double log_factorial(long k) {
  if (k < 0) {
    throw std::invalid_argument("log_factorial: negative argument");
  }
  static const std::vector<double> table = [] {
    std::vector<double> t(1024);
    t[0] = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i) {
      t[i] = t[i - 1] + std::log(static_cast<double>(i));
    }
    return t;
  }();
  if (static_cast<std::size_t>(k) < table.size()) {
    return table[static_cast<std::size_t>(k)];
  }
  return std::lgamma(static_cast<double>(k) + 1.0);
}

long Rng::hypergeometric(long total, long marked, long draws) {
  if (total < 0 || marked < 0 || draws < 0 || marked > total || draws > total) {
    throw std::invalid_argument("hypergeometric: invalid parameters");
  }
  const long k_min = std::max(0L, draws - (total - marked));
  const long k_max = std::min(draws, marked);
  if (k_min == k_max) return k_min;

  const double u = uniform01();
  const double log_denom = log_factorial(total) - log_factorial(draws) -
                           log_factorial(total - draws);
  double cdf = 0.0;
  for (long k = k_min; k <= k_max; ++k) {
    const double log_pmf =
        log_factorial(marked) - log_factorial(k) - log_factorial(marked - k) +
        log_factorial(total - marked) - log_factorial(draws - k) -
        log_factorial(total - marked - draws + k) - log_denom;
    cdf += std::exp(log_pmf);
    if (u < cdf) return k;
  }
  // Rounding can leave the accumulated mass a hair under 1.
  return k_max;
}

}  // namespace grouplin
