#include "holistic/decision.hpp"

#include <algorithm>
#include <cmath>

namespace holistic {

namespace {

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

FitResult run(const SubgradientObjective& objective, std::vector<double> x0,
              const SubgradientConfig& config) {
  FitResult result;
  result.initial_decision = x0;
  auto sg = subgradient_descent(objective, std::move(x0), config);
  result.decision = std::move(sg.x);
  result.trajectory = std::move(sg.trajectory);
  result.iterations = sg.iterations;
  result.converged = sg.converged;
  std::vector<double> scratch(result.decision.size());
  result.value = objective(result.decision, scratch);
  return result;
}

// Objective (1/T) sum loss_t + epsilon * ||x[0..d)||_2 for a per-sample loss
// with its subgradient.
template <typename Loss>
SubgradientObjective penalized_mean(const LabeledData& data, double epsilon, Loss loss) {
  return [&data, epsilon, loss](std::span<const double> x, std::vector<double>& grad) {
    std::fill(grad.begin(), grad.end(), 0.0);
    const double inv_t = 1.0 / static_cast<double>(data.size());
    double total = 0.0;
    for (std::size_t t = 0; t < data.size(); ++t) {
      total += inv_t * loss(x, data.covariates[t], data.responses[t], grad, inv_t);
    }
    const auto theta = x.first(data.dim());
    const double n = norm2(theta);
    total += epsilon * n;
    if (n > 0.0) {
      for (std::size_t i = 0; i < data.dim(); ++i) grad[i] += epsilon * theta[i] / n;
    }
    return total;
  };
}

}  // namespace

WorstCaseSolution evaluate_predictor(const LossOracle& oracle, std::span<const double> x,
                                     const Samples& samples, const RobustnessParams& params,
                                     PredictorKind kind, double svp_penalty) {
  return predictor_family(build_profile(oracle, x, samples), params, kind, svp_penalty);
}

std::vector<double> danskin_subgradient(const LossOracle& oracle, std::span<const double> x,
                                        const Samples& samples, const LossProfile& profile,
                                        const WorstCaseSolution& solution) {
  const std::size_t d = oracle.decision_dim();
  const std::size_t k_count = profile.size();
  std::vector<double> grad(d, 0.0);
  std::vector<double> g(d);
  for (std::size_t k = 0; k < k_count; ++k) {
    const double w = solution.p_prime[k];
    if (w == 0.0) continue;
    const auto& sample = samples[profile.atoms()[k]];
    if (solution.column == LossColumn::kBase) {
      oracle.subgrad(x, sample, g);
    } else {
      oracle.subgrad_inflated(x, sample, g);
    }
    for (std::size_t i = 0; i < d; ++i) grad[i] += w * g[i];
  }
  const double w_inf = solution.p_prime[k_count];
  if (w_inf != 0.0) {
    oracle.subgrad_worst(x, g);
    for (std::size_t i = 0; i < d; ++i) grad[i] += w_inf * g[i];
  }
  return grad;
}

FitResult fit(const LossOracle& oracle, const Samples& samples, const RobustnessParams& params,
              PredictorKind kind, const SubgradientConfig& config, double svp_penalty) {
  params.validate();
  auto objective = [&](std::span<const double> x, std::vector<double>& grad) {
    const LossProfile profile = build_profile(oracle, x, samples);
    const WorstCaseSolution sol = predictor_family(profile, params, kind, svp_penalty);
    grad = danskin_subgradient(oracle, x, samples, profile, sol);
    return sol.value;
  };
  FitResult result = run(objective, oracle.initial_decision(samples), config);
  result.worst_case = evaluate_predictor(oracle, result.decision, samples, params, kind,
                                         svp_penalty);
  result.value = result.worst_case->value;
  return result;
}

FitResult erm_fit(const LossOracle& oracle, const Samples& samples,
                  const SubgradientConfig& config) {
  if (samples.empty()) throw InvalidArgument("cannot fit on zero samples");
  const std::size_t d = oracle.decision_dim();
  auto objective = [&](std::span<const double> x, std::vector<double>& grad) {
    std::fill(grad.begin(), grad.end(), 0.0);
    std::vector<double> g(d);
    const double inv_t = 1.0 / static_cast<double>(samples.size());
    double total = 0.0;
    for (const auto& s : samples) {
      total += inv_t * oracle.evaluate(x, s);
      oracle.subgrad(x, s, g);
      for (std::size_t i = 0; i < d; ++i) grad[i] += inv_t * g[i];
    }
    return total;
  };
  return run(objective, oracle.initial_decision(samples), config);
}

FitResult ridge_fit(const LabeledData& data, double epsilon, const SubgradientConfig& config) {
  data.validate();
  if (data.size() == 0) throw InvalidArgument("cannot fit on zero samples");
  if (!(epsilon >= 0.0)) throw InvalidArgument("epsilon must be >= 0");
  const std::size_t d = data.dim();
  auto loss = [d](std::span<const double> x, const std::vector<double>& cov, double y,
                  std::vector<double>& grad, double weight) {
    double fitted = 0.0;
    for (std::size_t i = 0; i < d; ++i) fitted += x[i] * cov[i];
    const double res = fitted - y;
    const double sg = res > 0.0 ? 1.0 : (res < 0.0 ? -1.0 : 0.0);
    for (std::size_t i = 0; i < d; ++i) grad[i] += weight * sg * cov[i];
    return std::abs(res);
  };
  return run(penalized_mean(data, epsilon, loss), std::vector<double>(d, 0.0), config);
}

FitResult softmargin_fit(const LabeledData& data, double epsilon,
                         const SubgradientConfig& config) {
  data.validate_labels();
  if (data.size() == 0) throw InvalidArgument("cannot fit on zero samples");
  if (!(epsilon >= 0.0)) throw InvalidArgument("epsilon must be >= 0");
  const std::size_t d = data.dim();
  auto loss = [d](std::span<const double> x, const std::vector<double>& cov, double y,
                  std::vector<double>& grad, double weight) {
    double score = -x[d];
    for (std::size_t i = 0; i < d; ++i) score += x[i] * cov[i];
    const double h = 1.0 - y * score;
    if (h <= 0.0) return 0.0;
    for (std::size_t i = 0; i < d; ++i) grad[i] -= weight * y * cov[i];
    grad[d] += weight * y;
    return h;
  };
  return run(penalized_mean(data, epsilon, loss), std::vector<double>(d + 1, 0.0), config);
}

std::function<void(std::vector<double>&)> box_projection(double lo, double hi) {
  if (!(lo <= hi)) throw InvalidArgument("box projection needs lo <= hi");
  return [lo, hi](std::vector<double>& x) {
    for (double& v : x) v = std::clamp(v, lo, hi);
  };
}

nlohmann::json to_json(const FitResult& result) {
  nlohmann::json j{{"decision", result.decision},
                   {"initial_decision", result.initial_decision},
                   {"value", result.value},
                   {"trajectory", result.trajectory},
                   {"iterations", result.iterations},
                   {"converged", result.converged}};
  if (result.worst_case) j["worst_case"] = to_json(*result.worst_case);
  return j;
}

}  // namespace holistic
