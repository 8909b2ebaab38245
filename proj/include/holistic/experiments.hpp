#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <json.hpp>

#include "holistic/losses.hpp"
#include "holistic/predictors.hpp"
#include "holistic/rng.hpp"

namespace holistic {

/// Class -1 rectangle: center (0.3, 0.7), side lengths 0.52 (x1) and 0.46 (x2).
inline constexpr std::array<double, 2> kRectangleCenter = {0.3, 0.7};
inline constexpr std::array<double, 2> kRectangleSides = {0.52, 0.46};

/// n_per_class uniform points of class -1 on the rectangle followed by
/// n_per_class points of class +1 drawn independently on its mirror image
/// across the line x2 = x1.
LabeledData gen_two_rectangles(std::size_t n_per_class, std::uint64_t seed);

/// Replaces every point by an independent normal draw whose per-coordinate
/// mean and variance match the uniform rectangle of its class (variance
/// side^2 / 12). Labels and ordering are kept.
LabeledData gaussianize(const LabeledData& data, std::uint64_t seed);

/// Moves the ceil(fraction * n_{-1}) class -1 points closest to the line
/// x2 = x1 onto `center`. Ties are broken by position in the data.
LabeledData misspecify_closest(const LabeledData& data, double fraction,
                               std::array<double, 2> center = kRectangleCenter);

enum class CorruptionMode { kRandom, kDeterministic };

struct CorruptionSpec {
  CorruptionMode mode = CorruptionMode::kRandom;
  double epsilon_true = 0.0;
  double alpha_true = 0.0;
  /// Point substituted for misspecified samples (same layout as a sample).
  Sample replacement;
  /// Number of leading coordinates receiving noise; 0 means all but the
  /// last (covariates of a labeled sample), or the only one for scalars.
  std::size_t noise_dims = 0;
  std::uint64_t seed = 0;
};

/// Random mode: each sample is replaced with probability alpha_true and
/// otherwise perturbed by noise uniform in the epsilon_true ball.
/// Deterministic mode: every sample is perturbed, then the floor(alpha_true T)
/// samples with the smallest inflated loss at `reference` are replaced
/// (oracle and reference required).
Samples corrupt(const Samples& samples, const CorruptionSpec& spec,
                const LossOracle* oracle = nullptr, std::span<const double> reference = {});

/// Finite ground-truth distribution.
struct GroundTruth {
  Samples atoms;
  std::vector<double> probabilities;

  Sample draw(Rng& rng) const;
  double expected_loss(const LossOracle& oracle, std::span<const double> x) const;
};

struct TrialRecord {
  std::size_t trial = 0;
  double value = 0.0;
  double truth = 0.0;
  bool disappointed = false;
};

struct TrialReport {
  std::vector<TrialRecord> trials;
  double rate = 0.0;
  double bound = 0.0;

  /// Statistical acceptance slack: bound + 3 sqrt(bound / trials) + 0.05.
  double allowed_rate() const;
};

struct DisappointmentSetup {
  const LossOracle* oracle = nullptr;
  std::vector<double> decision;
  GroundTruth truth;
  std::size_t sample_size = 0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  /// Optional corruption of every drawn sample set (alpha_true = epsilon_true = 0 disables).
  CorruptionSpec corruption;
  double svp_penalty = 0.0;
  /// 0 selects the hardware concurrency.
  unsigned threads = 0;
};

/// Monte-Carlo disappointment estimate: a trial is disappointed when the
/// true expected loss exceeds the predictor value on the drawn samples.
/// Trial t uses seed derive_seed(seed, t), so results do not depend on the
/// number of threads.
TrialReport disappointment_rate(const DisappointmentSetup& setup, PredictorKind kind,
                                const RobustnessParams& params);

void write_csv(std::ostream& out, const TrialReport& report);
nlohmann::json summary_json(const TrialReport& report);

}  // namespace holistic
