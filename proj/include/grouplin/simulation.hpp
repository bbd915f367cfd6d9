#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "grouplin/estimators.hpp"
#include "grouplin/rng.hpp"
#include "grouplin/types.hpp"

namespace grouplin::sim {

enum class ScenarioLabel { a, b, c, d, e, f };

// Throws std::invalid_argument for anything but a single letter a-f.
ScenarioLabel parse_scenario(std::string_view token);
std::string scenario_name(ScenarioLabel label);

// A dataset together with the latent truth it was generated from.
struct LatentDataset {
  Dataset data;
  std::vector<double> theta;
};

// Generative law for i.i.d. triples (Y, xi, A): a variance distribution, the
// conditional law of xi given A, and Y with conditional mean xi and variance
// A (normal except in scenario f, which draws Y uniformly).
struct Scenario {
  ScenarioLabel label;

  LatentDataset sample(std::size_t n, std::uint64_t seed) const;
  // One (xi, A) pair; used by the oracle computations, which integrate the
  // Y-noise out analytically.
  std::pair<double, double> draw_xi_a(Rng& rng) const;

  // Closed-form facts used by oracles and sanity checks.
  double mean_variance() const;          // E[A]
  double oracle_a(double v) const;       // a*(v) = E[Y | A = v]
  double oracle_b(double v) const;       // b*(v) = v / Var(Y | A = v)
  double linear_oracle_risk() const;     // r(a*, b*) = E[A (1 - b*(A))]
  // (mu*, gamma*) when they have a closed form, i.e. when xi and A are
  // independent (then mu* = E[xi], gamma* = Var(xi)).
  std::optional<NormalNormalParams> closed_form_xkb() const;
};

Scenario scenario(ScenarioLabel label);

// n^-1 || estimates - truth ||^2
double loss(std::span<const double> estimates, std::span<const double> truth);

struct RiskReport {
  std::string method;
  std::size_t n = 0;
  std::size_t replications = 0;
  double risk = 0.0;
  double mcse = 0.0;  // sample std of the per-replicate losses / sqrt(N)
};

// Monte Carlo risk of each method over `replications` independent datasets of
// size n. Replicate r uses derive_seed(seed, r); all methods see the same
// data, so paired comparisons share the replicate noise.
std::vector<RiskReport> estimate_risk(const Scenario& scenario,
                                      std::span<const MethodSpec> methods,
                                      std::size_t n, std::size_t replications,
                                      std::uint64_t seed);

RiskReport estimate_risk(const Scenario& scenario, const MethodSpec& method,
                         std::size_t n, std::size_t replications,
                         std::uint64_t seed);

// Minimum Bayes risk E[A(1 - b*(A))] over separable rules linear in y given
// A. Closed form for the built-in scenarios; mc_size is used only when a
// scenario lacks one.
double oracle_linear(const Scenario& scenario, std::size_t mc_size,
                     std::uint64_t seed = 0);

// Minimum of E[(Y - A/(A+gamma) (Y - mu) - xi)^2] over (mu, gamma) by
// sample-average approximation over (xi, A) draws, with the Y-noise
// integrated out exactly and mu profiled per gamma. Returns the minimum and
// the minimizer.
std::pair<double, NormalNormalParams> oracle_xkb(const Scenario& scenario,
                                                 std::size_t mc_size,
                                                 std::uint64_t seed);

// Risk table over a grid of n values, ordered by method (as supplied) and
// then by n ascending.
std::vector<RiskReport> risk_curve(const Scenario& scenario,
                                   std::span<const MethodSpec> methods,
                                   std::span<const std::size_t> n_grid,
                                   std::size_t replications,
                                   std::uint64_t seed);

}  // namespace grouplin::sim
