#pragma once

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "grouplin/binning.hpp"
#include "grouplin/types.hpp"

namespace grouplin {

// Safe shrinkage constant {1 - 2(v_max/v_bar)/(n-1)}_+ for a block of size n.
// Requires n >= 2 (a single observation admits no shrinkage constant) and
// v_max >= v_bar > 0.
double c_star(std::size_t n, double v_max, double v_bar);

// Spherically symmetric shrinker toward the block mean:
//   x_i - min(1, c v_bar / s^2) (x_i - x_bar),
// identity for a single observation, full pooling (b = 1) when s^2 = 0.
// Any finite c >= 0 is accepted; the factor is capped at 1 regardless.
EstimateResult spherical_shrink(const Dataset& block, double c);

// Group-linear rule: partition by variance, then shrink each block with
// c_k = c_star. Observations outside every interval, in singleton blocks, or
// in blocks with c_k = 0 are returned exactly unchanged.
EstimateResult group_linear(const Dataset& data, const BinPartition& partition);

// Extended positive-part James-Stein rule shrinking toward the
// precision-weighted mean. For n < 4 the naive estimates are returned and
// the warning field is set.
EstimateResult james_stein_plus(const Dataset& data);

// Normal-normal Bayes rule with (mu, gamma) chosen by minimizing SURE;
// gamma searched on a log grid with golden-section refinement and a
// stationarity polish, mu profiled out in closed form.
std::pair<EstimateResult, NormalNormalParams> sure_parametric(
    const Dataset& data);

// Shrinkage toward the grand mean with per-observation factors b_i in [0, 1]
// constrained to be nondecreasing in v_i, chosen by minimizing SURE; solved
// exactly by pool-adjacent-violators on the v-sorted order.
EstimateResult sure_grand_mean(const Dataset& data);

EstimateResult naive(const Dataset& data);
EstimateResult grand_mean(const Dataset& data);

// Unbiased estimate of the (unnormalized) risk of the spherical shrinker
// with c = c_star applied to `block`; v_1 for a single observation.
double block_sure(const Dataset& block);
double block_sure(std::span<const double> xs, std::span<const double> vs);

// Weighted least-squares fit under a nondecreasing constraint
// (pool-adjacent-violators). Zero-weight entries are free: they inherit the
// fitted value of the nearest positive-weight entry to their left (to their
// right for a leading run; 1.0 when every weight is zero).
std::vector<double> pava_nondecreasing(std::span<const double> targets,
                                       std::span<const double> weights);

// SURE objective minimized by sure_grand_mean, evaluated at a shrinkage
// vector b (indexed like the data):
//   sum_i [ b_i^2 (x_i - x_bar)^2 - 2 b_i v_i (1 - 1/n) ].
double sure_grand_mean_objective(const Dataset& data,
                                 std::span<const double> b);

// ---------------------------------------------------------------------------
// Method selection shared by the simulation harness, the batting pipeline and
// the command line.

enum class BinningKind { equal_log, equal_width, dynamic_sure };

struct MethodSpec {
  enum class Kind {
    naive,
    grand_mean,
    james_stein,
    sure_parametric,
    sure_grand_mean,
    group_linear,
  };

  Kind kind = Kind::naive;
  BinningKind binning = BinningKind::equal_log;  // group_linear only
  double lipschitz = 1.0;                        // equal_width only

  std::string label() const;
};

// Tokens: naive, grand-mean, js, sure-m, sure-sg, gl, gl-log, gl-dynamic,
// gl-width:<L>. A bare "gl" picks up the supplied defaults.
MethodSpec parse_method(std::string_view token,
                        BinningKind default_binning = BinningKind::equal_log,
                        double default_lipschitz = 1.0);

EstimateResult apply_method(const Dataset& data, const MethodSpec& spec);

}  // namespace grouplin
