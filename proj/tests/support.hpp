#pragma once

// Random instance generators shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <vector>

#include "holistic/core.hpp"
#include "holistic/rng.hpp"

namespace holistic::testing {

inline std::vector<double> random_weights(Rng& rng, std::size_t k, bool allow_zero = false) {
  std::vector<double> w(k);
  double total = 0.0;
  for (double& x : w) {
    x = -std::log(1.0 - rng.uniform());  // exponential draws give a flat Dirichlet
    if (allow_zero && rng.bernoulli(0.15)) x = 0.0;
    total += x;
  }
  if (total == 0.0) {
    w[0] = 1.0;
    total = 1.0;
  }
  for (double& x : w) x /= total;
  // Renormalize once more so the sum is within rounding of one.
  double again = 0.0;
  for (double x : w) again += x;
  for (double& x : w) x /= again;
  return w;
}

struct ProfileOptions {
  std::size_t max_k = 20;
  bool uniform_weights = false;
  bool allow_zero_weights = false;
  bool allow_ties = true;
  double loss_scale = 10.0;
};

/// Random profile with base <= inflated <= worst_case. Occasionally puts an
/// atom exactly at the worst case or repeats loss values.
inline LossProfile random_profile(Rng& rng, const ProfileOptions& opt = {}) {
  const std::size_t k = 1 + rng.index(opt.max_k);
  std::vector<double> inflated(k), base(k);
  for (std::size_t i = 0; i < k; ++i) {
    inflated[i] = opt.loss_scale * rng.uniform();
    if (opt.allow_ties && i > 0 && rng.bernoulli(0.1)) inflated[i] = inflated[rng.index(i)];
    base[i] = inflated[i] - rng.uniform() * 0.5;
  }
  double worst = *std::max_element(inflated.begin(), inflated.end());
  if (!rng.bernoulli(0.15)) worst += opt.loss_scale * 0.5 * rng.uniform();
  std::vector<double> weights = opt.uniform_weights
                                    ? std::vector<double>(k, 1.0 / static_cast<double>(k))
                                    : random_weights(rng, k, opt.allow_zero_weights);
  return {inflated, base, weights, worst};
}

/// |a - b| within tol relative to the larger magnitude, with an absolute
/// floor of 1e-9.
inline bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= std::max(tol * std::max(std::abs(a), std::abs(b)), 1e-9);
}

inline double rel_gap(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace holistic::testing
