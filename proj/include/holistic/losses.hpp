#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "holistic/core.hpp"

namespace holistic {

/// One scenario as a flat vector: covariates followed by the response or
/// label for the supervised losses, a single demand value for newsvendor.
using Sample = std::vector<double>;
using Samples = std::vector<Sample>;

/**
 * Loss evaluator for one problem family. x is the decision vector; the
 * oracle also fixes the noise radius and the event set bounding the worst
 * case. Subgradient methods write decision_dim() entries into `out`.
 */
class LossOracle {
 public:
  virtual ~LossOracle() = default;

  virtual std::size_t decision_dim() const = 0;
  virtual double evaluate(std::span<const double> x, std::span<const double> sample) const = 0;
  virtual double evaluate_inflated(std::span<const double> x,
                                   std::span<const double> sample) const = 0;
  /// Largest loss over the event set.
  virtual double worst_case(std::span<const double> x) const = 0;
  virtual void subgrad(std::span<const double> x, std::span<const double> sample,
                       std::span<double> out) const = 0;
  virtual void subgrad_inflated(std::span<const double> x, std::span<const double> sample,
                                std::span<double> out) const = 0;
  virtual void subgrad_worst(std::span<const double> x, std::span<double> out) const = 0;
  /// Starting decision used by the fitting routines.
  virtual std::vector<double> initial_decision(const Samples& samples) const;
};

/// Covariates with a real response (regression) or a +-1 label (classification).
struct LabeledData {
  std::vector<std::vector<double>> covariates;
  std::vector<double> responses;

  std::size_t size() const { return responses.size(); }
  std::size_t dim() const { return covariates.empty() ? 0 : covariates.front().size(); }
  /// Rows of covariates followed by the response.
  Samples samples() const;
  static LabeledData from_samples(const Samples& samples);
  /// Throws InvalidArgument on ragged covariates or a length mismatch.
  void validate() const;
  /// validate() plus labels restricted to {-1, +1}.
  void validate_labels() const;
};

/// L1 regression, x = theta: loss |theta.X - Y|, inflated by eps*||theta||_2,
/// event set = data with covariates inflated by a ball of radius eps_prime.
std::unique_ptr<LossOracle> l1_regression_oracle(const LabeledData& data, double epsilon,
                                                 double epsilon_prime);

/// Hinge classification, x = (theta, b): loss max(1 - Y(theta.X - b), 0).
std::unique_ptr<LossOracle> hinge_oracle(const LabeledData& data, double epsilon,
                                         double epsilon_prime);

/// Newsvendor, x = inventory: loss b(d - x)^+ + h(x - d)^+ with demand noise
/// in [-eps, eps] and event set [demand_lo - eps_prime, demand_hi + eps_prime].
std::unique_ptr<LossOracle> newsvendor_oracle(double b_cost, double h_cost, double demand_lo,
                                              double demand_hi, double epsilon,
                                              double epsilon_prime);

/// Loss profile of decision x on the samples. Identical samples are merged
/// (first occurrence order); atom ids are the index of that first occurrence.
LossProfile build_profile(const LossOracle& oracle, std::span<const double> x,
                          const Samples& samples);

/// Numeric CSV with a header row; every field must be a finite number.
Samples read_samples_csv(std::istream& in);

}  // namespace holistic
