#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "holistic/core.hpp"

namespace holistic {

/// within[i][j] is true when moving atom i of the first distribution onto
/// atom j of the second stays inside the noise set (zero transport cost).
using NoiseIndicator = std::vector<std::vector<bool>>;

struct Coupling {
  std::vector<std::vector<double>> gamma;
};

struct RhoResult {
  double value = 0.0;
  Coupling coupling;
};

/// Optimal-transport pseudo-metric with cost 1(not within): the least mass
/// that must travel outside the noise set. Solved as a maximum flow over the
/// free cells (augmenting shortest paths), the rest routed at unit cost.
RhoResult rho(const DiscreteDistribution& mu, const DiscreteDistribution& nu,
              const NoiseIndicator& within);

/// Indicator that is true exactly when atom identifiers coincide.
NoiseIndicator equality_indicator(const DiscreteDistribution& mu, const DiscreteDistribution& nu);

/// Diagonal K x (K+1) geometry for lp_dro_bruteforce: atom k may only move
/// for free to its own inflated-loss point; the last column is the worst case.
NoiseIndicator identity_geometry(std::size_t k);

enum class ConstraintSense { kLessEqual, kEqual, kGreaterEqual };

struct LinearProgram {
  std::vector<double> objective;               // maximize objective . x, x >= 0
  std::vector<std::vector<double>> rows;       // constraint coefficients
  std::vector<ConstraintSense> senses;
  std::vector<double> rhs;
};

struct LpSolution {
  bool feasible = false;
  bool bounded = true;
  double value = 0.0;
  std::vector<double> x;
};

/// Dense two-phase simplex with Bland's rule. Intended for oracle-sized
/// problems (a few hundred entries), not for production use.
LpSolution solve_lp(const LinearProgram& lp);

/// Worst-case expectation over distributions supported on the profile's
/// inflated-loss points plus the worst-case point, reachable from the
/// empirical distribution by a coupling whose off-geometry mass is at most
/// alpha. `within` is K x (K+1); the last column is the worst-case point.
double lp_dro_bruteforce(const LossProfile& profile, const NoiseIndicator& within, double alpha);

/// Largest average obtainable by replacing alpha*T of the inflated losses
/// with the worst case, by exhaustive search over index sets.
double replacement_enumeration(std::span<const double> inflated_losses, double worst_case,
                              double alpha, std::size_t max_samples = 10);

}  // namespace holistic
