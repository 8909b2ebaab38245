#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace holistic {

/// Tolerance on the total mass of a weight vector.
inline constexpr double kWeightSumTolerance = 1e-12;

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Validate a weight vector and renormalize it when its sum is within
/// kWeightSumTolerance of one. Throws InvalidArgument otherwise.
std::vector<double> normalized_weights(std::span<const double> weights);

/**
 * Finitely supported probability measure.
 *
 * Atoms are opaque identifiers (scenario ids or positions into a sample
 * list). Zero-weight atoms are kept in storage; they never take part in
 * support, quantile or worst-case logic.
 */
class DiscreteDistribution {
 public:
  DiscreteDistribution(std::vector<std::size_t> atoms, std::vector<double> weights);

  /// Uniform empirical distribution over atoms 0..n-1.
  static DiscreteDistribution uniform(std::size_t n);

  std::size_t size() const { return atoms_.size(); }
  const std::vector<std::size_t>& atoms() const { return atoms_; }
  const std::vector<double>& weights() const { return weights_; }

 private:
  std::vector<std::size_t> atoms_;
  std::vector<double> weights_;
};

/**
 * The reduced problem data consumed by every predictor at a fixed decision:
 * the inflated loss c_k and base loss of every support atom, the empirical
 * weights, and the worst-case loss over the event set.
 *
 * Invariant: base_losses[k] <= inflated_losses[k] <= worst_case.
 */
class LossProfile {
 public:
  LossProfile(std::vector<double> inflated_losses, std::vector<double> base_losses,
              std::vector<double> weights, double worst_case,
              std::vector<std::size_t> atoms = {});

  /// Profile whose base and inflated losses coincide (noise-free).
  static LossProfile from_losses(std::vector<double> losses, std::vector<double> weights,
                                 double worst_case);

  std::size_t size() const { return inflated_.size(); }
  const std::vector<double>& inflated_losses() const { return inflated_; }
  const std::vector<double>& base_losses() const { return base_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<std::size_t>& atoms() const { return atoms_; }
  double worst_case() const { return worst_case_; }

  DiscreteDistribution distribution() const { return {atoms_, weights_}; }

  /// Indices of positive-weight atoms, stably sorted by increasing inflated loss.
  std::vector<std::size_t> sorted_support() const;

  /// Smallest inflated loss over positive-weight atoms.
  double min_inflated() const;

 private:
  std::vector<double> inflated_;
  std::vector<double> base_;
  std::vector<double> weights_;
  std::vector<std::size_t> atoms_;
  double worst_case_;
};

/// Misspecification/noise/statistical robustness parameters.
struct RobustnessParams {
  double epsilon = 0.0;        // noise radius
  double epsilon_prime = 0.0;  // event-set inflation radius, >= epsilon
  double alpha = 0.0;          // misspecification level in [0, 1]
  double r = 0.0;              // KL radius

  /// Throws InvalidArgument when the parameters are inconsistent.
  void validate() const;
};

enum class LossColumn { kBase, kInflated };

/// inf{tau : sum_{c_k <= tau} p_k >= alpha} over inflated losses; alpha = 0
/// returns the minimum loss.
double quantile(const LossProfile& profile, double alpha);

/// (1 - alpha) * CVaR^alpha of the inflated loss via the sorted-sum form.
double scaled_cvar(const LossProfile& profile, double alpha);

/// Same quantity via min_beta beta(1 - alpha) + E[(c - beta)^+], evaluated
/// exactly over the breakpoints of the piecewise-linear objective.
double scaled_cvar_minimization(const LossProfile& profile, double alpha);

double mean(const LossProfile& profile, LossColumn column = LossColumn::kInflated);
double variance(const LossProfile& profile, LossColumn column = LossColumn::kInflated);

// Serialization. CSV columns: atom_id,weight,base_loss,inflated_loss.
void write_csv(std::ostream& out, const LossProfile& profile);
/// worst_case defaults to the largest inflated loss when not given.
LossProfile read_profile_csv(std::istream& in, const double* worst_case = nullptr);
void write_csv(std::ostream& out, const DiscreteDistribution& dist);
DiscreteDistribution read_distribution_csv(std::istream& in);

nlohmann::json to_json(const LossProfile& profile);
nlohmann::json to_json(const DiscreteDistribution& dist);
LossProfile profile_from_json(const nlohmann::json& j);
DiscreteDistribution distribution_from_json(const nlohmann::json& j);

/// Shortest round-trip-exact decimal rendering (17 significant digits).
std::string format_double(double value);

}  // namespace holistic
