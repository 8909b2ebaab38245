#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "holistic/core.hpp"

namespace holistic {

/// Dual variables of a KL-type representation and the dual objective there.
struct DualCertificate {
  double lambda = 0.0;
  double beta = 0.0;
  double eta = 0.0;
  double dual_value = 0.0;
};

/**
 * Value of a predictor together with a distribution attaining it.
 *
 * p_prime has K+1 entries: the profile atoms followed by the worst-case
 * point. q_weights is the intermediate distribution (K+1 entries) for the
 * composed predictors and s the mass moved off each atom (K entries).
 *
 * For svp the weights are the signed sensitivities of the penalized value
 * with respect to the base losses (column == kBase); they do not form a
 * distribution.
 */
struct WorstCaseSolution {
  double value = 0.0;
  std::vector<double> p_prime;
  std::optional<std::vector<double>> q_weights;
  std::optional<std::vector<double>> s;
  std::optional<DualCertificate> certificate;
  LossColumn column = LossColumn::kInflated;
};

/// Tolerance controls for the dual routes (relative to the loss scale).
inline constexpr double kDualArgTolerance = 1e-9;

double saa(const LossProfile& profile, bool use_inflated = true);

/// Mean plus penalty times standard deviation of the base losses.
double svp(const LossProfile& profile, double penalty);

/// Keeps the top (1 - alpha) inflated-loss mass and moves alpha to the worst case.
WorstCaseSolution lp_dro(const LossProfile& profile, double alpha);

/// Worst-case expectation over a KL ball of radius r around the empirical
/// weights, the worst-case point included as a candidate atom.
WorstCaseSolution kl_dro(const LossProfile& profile, double r);

/// KL ball composed after the misspecification ball: KL-DRO evaluated on the
/// LP-DRO worst-case distribution.
WorstCaseSolution hd(const LossProfile& profile, double alpha, double r);

/// Three-variable dual of hd, minimized directly. Requires r > 0.
DualCertificate hd_dual(const LossProfile& profile, double alpha, double r,
                        double tol = kDualArgTolerance);

struct UnivariateDualResult {
  double value = 0.0;
  double eta = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
};

/// Single-variable dual of hd over an explicit bracket for its minimizer.
/// Requires r > 0.
UnivariateDualResult hd_univariate(const LossProfile& profile, double alpha, double r);

/// Misspecification ball composed after the KL ball, computed by an outer
/// minimization over the CVaR threshold with KL-DRO on the truncated losses.
WorstCaseSolution hr(const LossProfile& profile, double alpha, double r);

/// Three-variable dual of hr, minimized directly. Requires r > 0.
DualCertificate hr_dual(const LossProfile& profile, double alpha, double r,
                        double tol = kDualArgTolerance);

enum class PredictorKind { kSaa, kSvp, kKl, kLp, kHr, kHd, kWinf, kTv };

PredictorKind parse_predictor_kind(const std::string& name);
std::string to_string(PredictorKind kind);

/// Dispatch on kind using params.alpha and params.r. tv treats params.alpha
/// as the total-variation radius and rejects profiles with inflated losses;
/// winf is lp_dro at alpha = 0.
WorstCaseSolution predictor_family(const LossProfile& profile, const RobustnessParams& params,
                                   PredictorKind kind, double svp_penalty = 0.0);

nlohmann::json to_json(const WorstCaseSolution& solution);
nlohmann::json to_json(const DualCertificate& certificate);

}  // namespace holistic
