#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace holistic {

inline constexpr double kDefaultArgTolerance = 1e-10;

struct UnivariateResult {
  double argmin = 0.0;
  double value = 0.0;
  int iterations = 0;
};

/// Golden-section search for a convex (unimodal) f on [lo, hi]. The returned
/// point is the best evaluated one, endpoints included, so its value never
/// exceeds min(f(lo), f(hi)). f may return +inf to mark infeasible points.
UnivariateResult minimize_univariate(const std::function<double(double)>& f, double lo,
                                     double hi, double tol = kDefaultArgTolerance);

/// Bracket for coordinate i of minimize_lowdim given the values already fixed
/// for coordinates 0..i-1. An empty bracket (lo > hi) makes that branch
/// infeasible.
using CoordinateBounds = std::function<std::pair<double, double>(std::span<const double>)>;

struct LowDimResult {
  std::vector<double> argmin;
  double value = 0.0;
  long evaluations = 0;
};

/// Minimize a jointly convex f over a domain of 1 to 3 coordinates given as
/// nested brackets. Coordinate 0 is outermost; the partial minimum over the
/// inner coordinates is again convex, so each level is a golden section.
LowDimResult minimize_lowdim(const std::function<double(std::span<const double>)>& f,
                             const std::vector<CoordinateBounds>& bounds,
                             double tol = kDefaultArgTolerance);

/// Constant bracket helper.
CoordinateBounds fixed_bounds(double lo, double hi);

/// Objective for subgradient descent: returns g(x) and writes one subgradient.
using SubgradientObjective =
    std::function<double(std::span<const double> x, std::vector<double>& subgradient)>;

struct SubgradientConfig {
  int max_iters = 2000;
  /// Constant a of the step a/sqrt(t) along the normalized subgradient.
  /// Non-positive selects the scale of the initial objective value.
  double step_scale = 0.0;
  /// Fraction of trailing iterates averaged for the returned candidate.
  double averaging_fraction = 0.5;
  /// Optional in-place projection onto the feasible set.
  std::function<void(std::vector<double>&)> projection;
};

struct SubgradientResult {
  std::vector<double> x;
  double value = 0.0;
  /// Running minimum of the objective, one entry per evaluated iterate.
  std::vector<double> trajectory;
  int iterations = 0;
  /// False when the objective still dropped by more than 1e-3 (relative)
  /// over the last quarter of the budget.
  bool converged = true;
};

/// Normalized projected subgradient method. Returns whichever of the
/// trailing average and the best iterate has the smaller objective.
/// Throws std::runtime_error on a non-finite objective or subgradient.
SubgradientResult subgradient_descent(const SubgradientObjective& g, std::vector<double> x0,
                                      const SubgradientConfig& config = {});

}  // namespace holistic
