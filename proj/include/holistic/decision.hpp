#pragma once

#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "holistic/losses.hpp"
#include "holistic/predictors.hpp"
#include "holistic/solvers.hpp"

namespace holistic {

struct FitResult {
  std::vector<double> decision;
  std::vector<double> initial_decision;
  /// Running minimum of the objective per iteration (entry 0 = initial point).
  std::vector<double> trajectory;
  /// Objective recomputed at `decision`.
  double value = 0.0;
  std::optional<WorstCaseSolution> worst_case;
  int iterations = 0;
  bool converged = true;
};

/// Predictor value at decision x on the samples.
WorstCaseSolution evaluate_predictor(const LossOracle& oracle, std::span<const double> x,
                                     const Samples& samples, const RobustnessParams& params,
                                     PredictorKind kind, double svp_penalty = 0.0);

/// Danskin subgradient of the predictor at x: the loss subgradients averaged
/// under the worst-case weights of `solution` (which must come from
/// build_profile(oracle, x, samples)).
std::vector<double> danskin_subgradient(const LossOracle& oracle, std::span<const double> x,
                                        const Samples& samples, const LossProfile& profile,
                                        const WorstCaseSolution& solution);

/// Minimize the predictor over the decision by subgradient descent, with
/// worst-case weights recomputed at every iterate. Starts from
/// oracle.initial_decision(samples).
FitResult fit(const LossOracle& oracle, const Samples& samples, const RobustnessParams& params,
              PredictorKind kind, const SubgradientConfig& config = {}, double svp_penalty = 0.0);

/// Plain empirical risk (mean base loss) minimization.
FitResult erm_fit(const LossOracle& oracle, const Samples& samples,
                  const SubgradientConfig& config = {});

/// Mean absolute residual plus epsilon * ||theta||_2.
FitResult ridge_fit(const LabeledData& data, double epsilon, const SubgradientConfig& config = {});

/// Mean hinge loss plus epsilon * ||theta||_2 over x = (theta, b).
FitResult softmargin_fit(const LabeledData& data, double epsilon,
                         const SubgradientConfig& config = {});

/// Projection clamping every coordinate into [lo, hi].
std::function<void(std::vector<double>&)> box_projection(double lo, double hi);

nlohmann::json to_json(const FitResult& result);

}  // namespace holistic
