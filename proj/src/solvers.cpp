#include "holistic/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "holistic/core.hpp"

namespace holistic {

namespace {

constexpr double kInvPhi = 0.6180339887498949;  // (sqrt(5) - 1) / 2
constexpr int kMaxGoldenIterations = 400;

}  // namespace

UnivariateResult minimize_univariate(const std::function<double(double)>& f, double lo,
                                     double hi, double tol) {
  if (!(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw InvalidArgument("invalid bracket for univariate minimization");
  }
  if (!(tol > 0.0)) throw InvalidArgument("tolerance must be positive");

  UnivariateResult best{lo, f(lo), 0};
  auto consider = [&best](double x, double v) {
    if (v < best.value) {
      best.argmin = x;
      best.value = v;
    }
  };
  consider(hi, f(hi));
  if (lo == hi) return best;

  double a = lo;
  double b = hi;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  int it = 0;
  while (it < kMaxGoldenIterations) {
    const double width = b - a;
    const double floor = 8.0 * std::numeric_limits<double>::epsilon() *
                         std::max(std::abs(a), std::abs(b));
    if (width <= std::max(tol, floor)) break;
    ++it;
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = f(x2);
    }
  }
  consider(x1, f1);
  consider(x2, f2);
  best.iterations = it;
  return best;
}

CoordinateBounds fixed_bounds(double lo, double hi) {
  return [lo, hi](std::span<const double>) { return std::make_pair(lo, hi); };
}

namespace {

struct NestedSearch {
  const std::function<double(std::span<const double>)>& f;
  const std::vector<CoordinateBounds>& bounds;
  double tol;
  std::vector<double> x;
  long evaluations = 0;

  // Partial minimum over coordinates level..d-1 with 0..level-1 fixed in x.
  // Writes the inner argmin into `inner` (coordinates level..d-1).
  double solve(std::size_t level, std::vector<double>& inner) {
    const auto prefix = std::span<const double>(x.data(), level);
    const auto [lo, hi] = bounds[level](prefix);
    if (!(lo <= hi)) return std::numeric_limits<double>::infinity();
    const std::size_t d = bounds.size();
    if (level + 1 == d) {
      auto leaf = [&](double v) {
        x[level] = v;
        ++evaluations;
        return f(std::span<const double>(x.data(), d));
      };
      const auto res = minimize_univariate(leaf, lo, hi, tol);
      inner.assign(1, res.argmin);
      return res.value;
    }
    std::vector<double> best_inner;
    double best_value = std::numeric_limits<double>::infinity();
    double best_coord = lo;
    auto partial = [&](double v) {
      x[level] = v;
      std::vector<double> sub;
      const double value = solve(level + 1, sub);
      if (value < best_value || best_inner.empty()) {
        best_value = value;
        best_coord = v;
        best_inner = std::move(sub);
      }
      return value;
    };
    minimize_univariate(partial, lo, hi, tol);
    inner.clear();
    inner.push_back(best_coord);
    inner.insert(inner.end(), best_inner.begin(), best_inner.end());
    return best_value;
  }
};

}  // namespace

LowDimResult minimize_lowdim(const std::function<double(std::span<const double>)>& f,
                             const std::vector<CoordinateBounds>& bounds, double tol) {
  if (bounds.empty() || bounds.size() > 3) {
    throw InvalidArgument("minimize_lowdim supports 1 to 3 coordinates");
  }
  NestedSearch search{f, bounds, tol, std::vector<double>(bounds.size(), 0.0)};
  LowDimResult result;
  result.value = search.solve(0, result.argmin);
  if (!std::isfinite(result.value) || result.argmin.size() != bounds.size()) {
    throw InvalidArgument("minimize_lowdim: empty or infeasible domain");
  }
  result.evaluations = search.evaluations;
  return result;
}

SubgradientResult subgradient_descent(const SubgradientObjective& g, std::vector<double> x0,
                                      const SubgradientConfig& config) {
  if (config.max_iters < 1) throw InvalidArgument("max_iters must be >= 1");
  if (!(config.averaging_fraction > 0.0 && config.averaging_fraction <= 1.0)) {
    throw InvalidArgument("averaging_fraction must lie in (0, 1]");
  }
  const std::size_t n = x0.size();
  std::vector<double> grad(n, 0.0);
  auto evaluate = [&](const std::vector<double>& x) {
    std::fill(grad.begin(), grad.end(), 0.0);
    const double value = g(x, grad);
    if (!std::isfinite(value)) {
      throw std::runtime_error("subgradient descent: non-finite objective");
    }
    for (double gi : grad) {
      if (!std::isfinite(gi)) {
        throw std::runtime_error("subgradient descent: non-finite subgradient");
      }
    }
    return value;
  };

  if (config.projection) config.projection(x0);
  std::vector<double> x = x0;
  double value = evaluate(x);
  const double a = config.step_scale > 0.0 ? config.step_scale : std::max(std::abs(value), 1e-3);

  SubgradientResult result;
  result.x = x;
  result.value = value;
  result.trajectory.push_back(value);

  const int average_from =
      config.max_iters - static_cast<int>(std::ceil(config.averaging_fraction * config.max_iters));
  std::vector<double> average(n, 0.0);
  int averaged = 0;

  for (int t = 1; t <= config.max_iters; ++t) {
    double norm = 0.0;
    for (double gi : grad) norm += gi * gi;
    norm = std::sqrt(norm);
    if (norm == 0.0) break;  // stationary: x is optimal
    const double step = a / std::sqrt(static_cast<double>(t)) / norm;
    for (std::size_t i = 0; i < n; ++i) x[i] -= step * grad[i];
    if (config.projection) config.projection(x);
    if (t > average_from) {
      ++averaged;
      for (std::size_t i = 0; i < n; ++i) average[i] += (x[i] - average[i]) / averaged;
    }
    value = evaluate(x);
    result.iterations = t;
    if (value < result.value) {
      result.value = value;
      result.x = x;
    }
    result.trajectory.push_back(result.value);
  }

  if (averaged > 0) {
    std::vector<double> scratch(n, 0.0);
    std::swap(scratch, grad);
    const double avg_value = evaluate(average);
    if (avg_value < result.value) {
      result.value = avg_value;
      result.x = average;
    }
  }

  const std::size_t len = result.trajectory.size();
  if (len >= 2 && result.iterations == config.max_iters) {
    // Short budgets are judged over the whole trajectory.
    const double start = result.trajectory[len >= 8 ? len - 1 - (len - 1) / 4 : 0];
    const double end = result.trajectory.back();
    const double scale = std::max(std::abs(start), 1e-3 * std::abs(result.trajectory.front()));
    result.converged = (start - end) <= 1e-3 * std::max(scale, 1e-12);
  }
  return result;
}

}  // namespace holistic
