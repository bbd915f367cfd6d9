#include "grouplin/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace grouplin {

namespace {

double mean_of(std::span<const double> values) {
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

double median_of(std::vector<double> values) {
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  return values[mid];
}

EstimateResult identity_result(const Dataset& data, std::string method) {
  EstimateResult r;
  r.estimates = data.xs();
  r.shrinkage.assign(data.size(), 0.0);
  r.method = std::move(method);
  return r;
}

}  // namespace

double c_star(std::size_t n, double v_max, double v_bar) {
  if (n < 2) {
    throw std::invalid_argument(
        "c_star: degenerate block (n < 2); singleton blocks take the "
        "identity rule");
  }
  if (!(v_bar > 0.0) || v_max < v_bar) {
    throw std::invalid_argument("c_star: requires v_max >= v_bar > 0");
  }
  const double c =
      1.0 - 2.0 * (v_max / v_bar) / (static_cast<double>(n) - 1.0);
  return c > 0.0 ? c : 0.0;
}

EstimateResult spherical_shrink(const Dataset& block, double c) {
  validate(block);
  if (!(c >= 0.0) || !std::isfinite(c)) {
    throw std::invalid_argument("spherical_shrink: c must be finite and >= 0");
  }
  const std::size_t n = block.size();
  EstimateResult r = identity_result(block, "spherical");
  r.block_of.assign(n, 0);

  BlockStats st;
  st.n_k = n;
  st.c = c;
  if (n == 1) {
    st.x_bar = block.x(0);
    st.v_bar = st.v_max = block.v(0);
    r.blocks.push_back(st);
    return r;
  }

  double x_bar = 0.0, v_bar = 0.0, v_max = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    x_bar += block.x(i);
    v_bar += block.v(i);
    v_max = std::max(v_max, block.v(i));
  }
  x_bar /= static_cast<double>(n);
  v_bar = std::min(v_bar / static_cast<double>(n), v_max);
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = block.x(i) - x_bar;
    sse += d * d;
  }
  const double s_sq = sse / (static_cast<double>(n) - 1.0);
  const double b_hat = s_sq > 0.0 ? std::min(1.0, c * v_bar / s_sq) : 1.0;

  for (std::size_t i = 0; i < n; ++i) {
    r.estimates[i] = block.x(i) - b_hat * (block.x(i) - x_bar);
    r.shrinkage[i] = b_hat;
  }
  st.x_bar = x_bar;
  st.v_bar = v_bar;
  st.v_max = v_max;
  st.s_sq = s_sq;
  st.b_hat = b_hat;
  r.blocks.push_back(st);
  return r;
}

EstimateResult group_linear(const Dataset& data, const BinPartition& partition) {
  validate(data);
  validate(partition);
  const std::size_t n = data.size();

  EstimateResult r = identity_result(data, "gl");
  r.block_of.assign(n, -1);

  std::vector<std::vector<std::size_t>> buckets(partition.block_count());
  for (std::size_t i = 0; i < n; ++i) {
    if (auto k = assign(data.v(i), partition)) {
      buckets[*k].push_back(i);
      r.block_of[i] = static_cast<long>(*k);
    }
  }

  for (std::size_t k = 0; k < buckets.size(); ++k) {
    const auto& idx = buckets[k];
    if (idx.empty()) continue;
    BlockStats st;
    st.block = k;
    st.n_k = idx.size();
    if (idx.size() == 1) {
      st.x_bar = data.x(idx[0]);
      st.v_bar = st.v_max = data.v(idx[0]);
      r.blocks.push_back(st);
      continue;
    }
    double x_bar = 0.0, v_bar = 0.0, v_max = 0.0;
    for (std::size_t i : idx) {
      x_bar += data.x(i);
      v_bar += data.v(i);
      v_max = std::max(v_max, data.v(i));
    }
    const double nk = static_cast<double>(idx.size());
    x_bar /= nk;
    // The mean of the variances cannot exceed their maximum; summation
    // rounding can put it an ulp above when the block is constant.
    v_bar = std::min(v_bar / nk, v_max);
    double sse = 0.0;
    for (std::size_t i : idx) {
      const double d = data.x(i) - x_bar;
      sse += d * d;
    }
    const double s_sq = sse / (nk - 1.0);
    const double c = c_star(idx.size(), v_max, v_bar);
    // c = 0 means the block is returned untouched, bit for bit.
    double b_hat = 0.0;
    if (c > 0.0) {
      b_hat = s_sq > 0.0 ? std::min(1.0, c * v_bar / s_sq) : 1.0;
      for (std::size_t i : idx) {
        r.estimates[i] = data.x(i) - b_hat * (data.x(i) - x_bar);
        r.shrinkage[i] = b_hat;
      }
    }
    st.x_bar = x_bar;
    st.v_bar = v_bar;
    st.v_max = v_max;
    st.s_sq = s_sq;
    st.c = c;
    st.b_hat = b_hat;
    r.blocks.push_back(st);
  }
  return r;
}

EstimateResult james_stein_plus(const Dataset& data) {
  validate(data);
  const std::size_t n = data.size();
  if (n < 4) {
    EstimateResult r = identity_result(data, "js");
    r.warning = "james_stein_plus: n < 4, returning naive estimates";
    return r;
  }
  double sw = 0.0, swx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = 1.0 / data.v(i);
    sw += w;
    swx += w * data.x(i);
  }
  const double mu = swx / sw;
  double ssr = 0.0;  // sum of squared residuals over their variances
  for (std::size_t i = 0; i < n; ++i) {
    const double d = data.x(i) - mu;
    ssr += d * d / data.v(i);
  }
  double keep = 0.0;
  if (ssr > 0.0) {
    keep = std::max(0.0, 1.0 - (static_cast<double>(n) - 3.0) / ssr);
  }
  EstimateResult r = identity_result(data, "js");
  for (std::size_t i = 0; i < n; ++i) {
    r.estimates[i] = mu + keep * (data.x(i) - mu);
    r.shrinkage[i] = 1.0 - keep;
  }
  return r;
}

EstimateResult naive(const Dataset& data) {
  validate(data);
  return identity_result(data, "naive");
}

EstimateResult grand_mean(const Dataset& data) {
  validate(data);
  EstimateResult r = identity_result(data, "grand-mean");
  const auto xs = data.xs();
  const double x_bar = mean_of(xs);
  std::fill(r.estimates.begin(), r.estimates.end(), x_bar);
  std::fill(r.shrinkage.begin(), r.shrinkage.end(), 1.0);
  return r;
}

double block_sure(std::span<const double> xs, std::span<const double> vs) {
  const std::size_t n = xs.size();
  if (n == 0 || n != vs.size()) {
    throw std::invalid_argument("block_sure: empty block or length mismatch");
  }
  if (n == 1) return vs[0];

  const double x_bar = mean_of(xs);
  double sum_v = 0.0, v_max = 0.0, sse = 0.0, vsse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sum_v += vs[i];
    v_max = std::max(v_max, vs[i]);
    const double d = xs[i] - x_bar;
    sse += d * d;
    vsse += vs[i] * d * d;
  }
  const double nn = static_cast<double>(n);
  const double v_bar = std::min(sum_v / nn, v_max);  // guard summation rounding
  const double s_sq = sse / (nn - 1.0);
  const double c = c_star(n, v_max, v_bar);
  const double b_hat = s_sq > 0.0 ? std::min(1.0, c * v_bar / s_sq) : 1.0;

  double sure = sum_v + b_hat * b_hat * sse - 2.0 * (1.0 - 1.0 / nn) * b_hat * sum_v;
  if (b_hat < 1.0 && s_sq > 0.0) {
    sure += 4.0 / (nn - 1.0) * b_hat * vsse / s_sq;
  }
  return sure;
}

double block_sure(const Dataset& block) {
  validate(block);
  const auto xs = block.xs();
  const auto vs = block.vs();
  return block_sure(std::span<const double>(xs), std::span<const double>(vs));
}

std::vector<double> pava_nondecreasing(std::span<const double> targets,
                                       std::span<const double> weights) {
  const std::size_t n = targets.size();
  if (n != weights.size()) {
    throw std::invalid_argument("pava_nondecreasing: length mismatch");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(weights[i] >= 0.0) || !std::isfinite(weights[i])) {
      throw std::invalid_argument("pava_nondecreasing: weights must be >= 0");
    }
  }

  // Pool over the positive-weight entries only.
  struct Block {
    double sw;
    double swt;
    std::size_t count;  // number of positive-weight entries pooled
  };
  std::vector<Block> stack;
  std::vector<std::size_t> positive;
  for (std::size_t i = 0; i < n; ++i) {
    if (weights[i] <= 0.0) continue;
    positive.push_back(i);
    stack.push_back({weights[i], weights[i] * targets[i], 1});
    while (stack.size() >= 2) {
      const Block& top = stack[stack.size() - 1];
      const Block& below = stack[stack.size() - 2];
      if (top.swt * below.sw >= below.swt * top.sw) break;  // top >= below
      Block merged{below.sw + top.sw, below.swt + top.swt,
                   below.count + top.count};
      stack.pop_back();
      stack.back() = merged;
    }
  }

  std::vector<double> fitted(n, 1.0);  // all-zero-weight fallback
  if (!positive.empty()) {
    // Expand block values back onto the positive entries.
    std::vector<double> value_at_positive(positive.size());
    std::size_t pos = 0;
    for (const Block& b : stack) {
      const double value = b.swt / b.sw;
      for (std::size_t j = 0; j < b.count; ++j) {
        value_at_positive[pos++] = value;
      }
    }
    // Zero-weight entries inherit their left positive neighbor (right
    // neighbor for a leading run).
    std::size_t next_positive = 0;
    double current = value_at_positive.front();
    for (std::size_t i = 0; i < n; ++i) {
      if (next_positive < positive.size() && positive[next_positive] == i) {
        current = value_at_positive[next_positive];
        ++next_positive;
      }
      fitted[i] = current;
    }
  }
  return fitted;
}

EstimateResult sure_grand_mean(const Dataset& data) {
  validate(data);
  const std::size_t n = data.size();
  if (n < 2) {
    throw std::invalid_argument("sure_grand_mean: needs n >= 2");
  }
  const auto xs = data.xs();
  const auto vs = data.vs();
  const double x_bar = mean_of(xs);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return vs[a] < vs[b];
  });

  // Tied variances share one shrinkage value: pool ties into atoms first.
  std::vector<std::size_t> atom_of(n);
  std::vector<double> atom_w, atom_t;
  std::size_t pos = 0;
  while (pos < n) {
    std::size_t end = pos + 1;
    while (end < n && vs[order[end]] == vs[order[pos]]) ++end;
    double w = 0.0, num = 0.0;
    for (std::size_t j = pos; j < end; ++j) {
      const std::size_t i = order[j];
      const double d = xs[i] - x_bar;
      w += d * d;
      num += vs[i] * (1.0 - 1.0 / static_cast<double>(n));
      atom_of[i] = atom_w.size();
    }
    atom_w.push_back(w);
    atom_t.push_back(w > 0.0 ? num / w : 0.0);
    pos = end;
  }

  std::vector<double> fitted = pava_nondecreasing(atom_t, atom_w);
  for (double& b : fitted) b = std::clamp(b, 0.0, 1.0);

  EstimateResult r = identity_result(data, "sure-sg");
  for (std::size_t i = 0; i < n; ++i) {
    const double b = fitted[atom_of[i]];
    r.estimates[i] = xs[i] - b * (xs[i] - x_bar);
    r.shrinkage[i] = b;
  }
  return r;
}

double sure_grand_mean_objective(const Dataset& data,
                                 std::span<const double> b) {
  validate(data);
  const std::size_t n = data.size();
  if (b.size() != n) {
    throw std::invalid_argument("sure_grand_mean_objective: length mismatch");
  }
  const auto xs = data.xs();
  const double x_bar = mean_of(xs);
  double obj = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = xs[i] - x_bar;
    obj += b[i] * b[i] * d * d -
           2.0 * b[i] * data.v(i) * (1.0 - 1.0 / static_cast<double>(n));
  }
  return obj;
}

// ---------------------------------------------------------------------------
// Parametric SURE.

namespace {

// SURE/n for the normal-normal Bayes rule, in units where the working
// variance scale is 1; mu is profiled out (weighted mean with weights
// (v/(v+gamma))^2).
struct SureParametricObjective {
  std::span<const double> xs;
  std::span<const double> vs;

  double profile_mu(double gamma) const {
    double sw = 0.0, swx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double b = vs[i] / (vs[i] + gamma);
      const double w = b * b;
      sw += w;
      swx += w * xs[i];
    }
    return swx / sw;
  }

  double operator()(double gamma) const {
    double sw = 0.0, swx = 0.0, swx2 = 0.0, rest = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double b = vs[i] / (vs[i] + gamma);
      const double w = b * b;
      sw += w;
      swx += w * xs[i];
      swx2 += w * xs[i] * xs[i];
      rest += vs[i] - 2.0 * vs[i] * b;
    }
    return (swx2 - swx * swx / sw + rest) / static_cast<double>(xs.size());
  }

  // d(SURE)/d(gamma) at the profiled mu; only the sign matters.
  double slope(double gamma) const {
    const double mu = profile_mu(gamma);
    double s = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double d = vs[i] + gamma;
      const double b = vs[i] / d;
      const double r = xs[i] - mu;
      s += b * b * (1.0 - r * r / d);
    }
    return s;
  }
};

constexpr double kGammaGridLo = 1e-6;
constexpr double kGammaGridHi = 1e6;
constexpr int kGammaGridPoints = 2000;

// Golden-section minimization over [lo, hi] on the log scale.
template <typename F>
double golden_min_log(const F& f, double lo, double hi) {
  const double invphi = 0.6180339887498949;
  double a = std::log(lo), b = std::log(hi);
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(std::exp(c));
  double fd = f(std::exp(d));
  for (int iter = 0; iter < 200 && (b - a) > 1e-13; ++iter) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(std::exp(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(std::exp(d));
    }
  }
  return std::exp(0.5 * (a + b));
}

// Pins the minimizer to the stationary point of the objective, which is
// reproducible to machine precision where the argmin of a noisy comparison
// search is not. Falls back to `g0` when no sign change brackets it.
double polish_stationary(const SureParametricObjective& f, double g0,
                         double lo, double hi) {
  double h = 1e-9;
  double a = std::max(lo, g0 / (1.0 + h));
  double b = std::min(hi, g0 * (1.0 + h));
  double fa = f.slope(a);
  double fb = f.slope(b);
  for (int iter = 0; iter < 80 && !(fa <= 0.0 && fb >= 0.0); ++iter) {
    if (a <= lo && b >= hi) break;
    h *= 4.0;
    a = std::max(lo, g0 / (1.0 + h));
    b = std::min(hi, g0 * (1.0 + h));
    fa = f.slope(a);
    fb = f.slope(b);
  }
  if (!(fa <= 0.0 && fb >= 0.0)) return g0;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = std::exp(0.5 * (std::log(a) + std::log(b)));
    if (mid <= a || mid >= b) break;
    const double fm = f.slope(mid);
    if (fm <= 0.0) {
      a = mid;
    } else {
      b = mid;
    }
  }
  return std::exp(0.5 * (std::log(a) + std::log(b)));
}

}  // namespace

std::pair<EstimateResult, NormalNormalParams> sure_parametric(
    const Dataset& data) {
  validate(data);
  const std::size_t n = data.size();
  if (n < 2) {
    throw std::invalid_argument("sure_parametric: needs n >= 2");
  }

  // Work in units of the median variance so the gamma grid is fixed and the
  // whole search is scale equivariant.
  const double unit = median_of(data.vs());
  const double root = std::sqrt(unit);
  std::vector<double> xs(n), vs(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = data.x(i) / root;
    vs[i] = data.v(i) / unit;
  }
  const SureParametricObjective f{xs, vs};

  int best = 0;
  double best_val = std::numeric_limits<double>::infinity();
  const double step = std::log(kGammaGridHi / kGammaGridLo) /
                      static_cast<double>(kGammaGridPoints - 1);
  for (int k = 0; k < kGammaGridPoints; ++k) {
    const double g = kGammaGridLo * std::exp(step * k);
    const double val = f(g);
    if (val < best_val) {
      best_val = val;
      best = k;
    }
  }
  const double lo = kGammaGridLo * std::exp(step * std::max(0, best - 1));
  const double hi =
      kGammaGridLo * std::exp(step * std::min(kGammaGridPoints - 1, best + 1));
  double gamma_n = golden_min_log(f, lo, hi);
  gamma_n = polish_stationary(f, gamma_n, kGammaGridLo, kGammaGridHi);

  const double gamma = gamma_n * unit;
  const double mu = f.profile_mu(gamma_n) * root;

  EstimateResult r = identity_result(data, "sure-m");
  for (std::size_t i = 0; i < n; ++i) {
    const double b = data.v(i) / (data.v(i) + gamma);
    r.estimates[i] = data.x(i) - b * (data.x(i) - mu);
    r.shrinkage[i] = b;
  }
  return {std::move(r), NormalNormalParams{mu, gamma}};
}

// ---------------------------------------------------------------------------
// Method selection.

std::string MethodSpec::label() const {
  switch (kind) {
    case Kind::naive:
      return "naive";
    case Kind::grand_mean:
      return "grand-mean";
    case Kind::james_stein:
      return "js";
    case Kind::sure_parametric:
      return "sure-m";
    case Kind::sure_grand_mean:
      return "sure-sg";
    case Kind::group_linear:
      break;
  }
  switch (binning) {
    case BinningKind::equal_log:
      return "gl";
    case BinningKind::dynamic_sure:
      return "gl-dynamic";
    case BinningKind::equal_width: {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "gl-width:%g", lipschitz);
      return buf;
    }
  }
  return "gl";
}

MethodSpec parse_method(std::string_view token, BinningKind default_binning,
                        double default_lipschitz) {
  MethodSpec spec;
  spec.binning = default_binning;
  spec.lipschitz = default_lipschitz;
  if (token == "naive") {
    spec.kind = MethodSpec::Kind::naive;
  } else if (token == "grand-mean") {
    spec.kind = MethodSpec::Kind::grand_mean;
  } else if (token == "js") {
    spec.kind = MethodSpec::Kind::james_stein;
  } else if (token == "sure-m") {
    spec.kind = MethodSpec::Kind::sure_parametric;
  } else if (token == "sure-sg") {
    spec.kind = MethodSpec::Kind::sure_grand_mean;
  } else if (token == "gl") {
    spec.kind = MethodSpec::Kind::group_linear;
  } else if (token == "gl-log") {
    spec.kind = MethodSpec::Kind::group_linear;
    spec.binning = BinningKind::equal_log;
  } else if (token == "gl-dynamic") {
    spec.kind = MethodSpec::Kind::group_linear;
    spec.binning = BinningKind::dynamic_sure;
  } else if (token.rfind("gl-width:", 0) == 0) {
    spec.kind = MethodSpec::Kind::group_linear;
    spec.binning = BinningKind::equal_width;
    const std::string arg(token.substr(9));
    char* end = nullptr;
    const double value = std::strtod(arg.c_str(), &end);
    if (end == arg.c_str() || *end != '\0' || !(value > 0.0)) {
      throw std::invalid_argument("parse_method: bad Lipschitz constant in '" +
                                  std::string(token) + "'");
    }
    spec.lipschitz = value;
  } else {
    throw std::invalid_argument("parse_method: unknown method '" +
                                std::string(token) + "'");
  }
  return spec;
}

EstimateResult apply_method(const Dataset& data, const MethodSpec& spec) {
  EstimateResult r;
  switch (spec.kind) {
    case MethodSpec::Kind::naive:
      r = naive(data);
      break;
    case MethodSpec::Kind::grand_mean:
      r = grand_mean(data);
      break;
    case MethodSpec::Kind::james_stein:
      r = james_stein_plus(data);
      break;
    case MethodSpec::Kind::sure_parametric:
      r = sure_parametric(data).first;
      break;
    case MethodSpec::Kind::sure_grand_mean:
      r = sure_grand_mean(data);
      break;
    case MethodSpec::Kind::group_linear: {
      BinPartition partition;
      switch (spec.binning) {
        case BinningKind::equal_log:
          partition = bins_equal_log(data);
          break;
        case BinningKind::equal_width:
          partition = bins_equal_width(data, spec.lipschitz);
          break;
        case BinningKind::dynamic_sure:
          partition = bins_dynamic(data);
          break;
      }
      r = group_linear(data, partition);
      break;
    }
  }
  r.method = spec.label();
  return r;
}

}  // namespace grouplin
