#include "holistic/predictors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>

#include "holistic/solvers.hpp"

namespace holistic {

namespace {

void require_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in [0, 1]");
}

void require_r(double r, bool strictly_positive) {
  if (!std::isfinite(r) || r < 0.0 || (strictly_positive && r == 0.0)) {
    throw InvalidArgument(strictly_positive ? "dual representation requires r > 0"
                                            : "r must be >= 0");
  }
}

double weighted_sum(std::span<const double> p, std::span<const double> c) {
  double s = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] > 0.0) s += p[k] * c[k];
  }
  return s;
}

double min_positive(std::span<const double> p, std::span<const double> c) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] > 0.0) m = std::min(m, c[k]);
  }
  return m;
}

// x log(x / d) with the conventions 0 log 0 = 0 and x log(x / 0) = +inf.
double xlogx_over(double x, double d) {
  if (x == 0.0) return 0.0;
  if (d <= 0.0) return std::numeric_limits<double>::infinity();
  return x * std::log(x / d);
}

struct KlSolution {
  double value = 0.0;
  std::vector<double> weights;  // per atom
  double slot = 0.0;            // mass on the worst-case point
  double lambda = 0.0;
  double eta = 0.0;
  double dual_value = 0.0;
};

// Univariate KL dual at eta = worst + u, in the cancellation-free form
// mean - a * expm1(-r + sum p log((eta - c) / a)) with a = eta - mean.
double kl_dual_objective(std::span<const double> gaps, std::span<const double> p, double mean_gap,
                         double mean, double r, double u) {
  const double a = mean_gap + u;
  const double log_a = std::log(a);
  double s = -r;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] > 0.0) s += p[k] * (std::log(gaps[k] + u) - log_a);
  }
  return mean - a * std::expm1(s);
}

// Worst-case weights over atoms with losses c plus a slot at loss `worst`
// within KL radius r. The optimal shift u = eta - worst solves the
// stationarity condition phi(u) = 1 with phi decreasing; weights are
// lambda p_k / (eta - c_k), lambda = e^{-r} exp(sum p log(eta - c)), which
// puts the KL divergence at exactly r.
KlSolution kl_solve(std::span<const double> c, std::span<const double> p, double worst, double r) {
  const std::size_t k_count = c.size();
  KlSolution sol;
  const double mean = weighted_sum(p, c);
  sol.weights.assign(p.begin(), p.end());
  sol.eta = worst;
  if (r == 0.0) {
    sol.value = mean;
    sol.dual_value = mean;
    return sol;
  }

  std::vector<double> gaps(k_count, 0.0);
  bool has_zero_gap = false;
  bool all_zero_gap = true;
  for (std::size_t k = 0; k < k_count; ++k) {
    gaps[k] = std::max(worst - c[k], 0.0);
    if (p[k] > 0.0) {
      if (gaps[k] == 0.0) {
        has_zero_gap = true;
      } else {
        all_zero_gap = false;
      }
    }
  }
  if (all_zero_gap) {
    // Every atom already sits at the worst case, so any feasible weights are
    // optimal. Pick the limit of the nondegenerate solution as the gaps
    // shrink uniformly: e^{-r} p on the atoms, the rest on the worst case.
    const double keep = std::exp(-r);
    for (double& w : sol.weights) w *= keep;
    sol.slot = -std::expm1(-r);
    sol.lambda = 0.0;
    sol.value = worst;
    sol.dual_value = worst;
    return sol;
  }
  const double mean_gap = weighted_sum(p, gaps);

  auto log_sum_log = [&](double u) {
    double s = 0.0;
    for (std::size_t k = 0; k < k_count; ++k) {
      if (p[k] > 0.0) s += p[k] * std::log(gaps[k] + u);
    }
    return s;
  };
  auto log_phi = [&](double u) {
    double inv = 0.0;
    for (std::size_t k = 0; k < k_count; ++k) {
      if (p[k] > 0.0) inv += p[k] / (gaps[k] + u);
    }
    return -r + log_sum_log(u) + std::log(inv);
  };

  double u = 0.0;
  if (has_zero_gap || log_phi(0.0) > 0.0) {
    // Upper end from eta <= (worst - e^{-r} mean) / (1 - e^{-r}).
    double hi = mean_gap / std::expm1(r);
    while (log_phi(hi) > 0.0) hi *= 2.0;
    double lo = hi;
    // Geometric search for a point with phi > 1 (exists: phi(0+) > 1).
    for (int i = 0; i < 200 && log_phi(lo) <= 0.0; ++i) lo *= 1e-4;
    if (log_phi(lo) <= 0.0) {
      u = lo;
    } else {
      for (int i = 0; i < 400; ++i) {
        const double mid = hi > 2.0 * lo ? std::sqrt(lo) * std::sqrt(hi) : 0.5 * (lo + hi);
        if (!(mid > lo && mid < hi)) break;
        if (log_phi(mid) > 0.0) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      u = hi;
    }
  }

  sol.lambda = std::exp(-r + log_sum_log(u));
  sol.eta = worst + u;
  double total = 0.0;
  for (std::size_t k = 0; k < k_count; ++k) {
    sol.weights[k] = p[k] > 0.0 ? sol.lambda * p[k] / (gaps[k] + u) : 0.0;
    total += sol.weights[k];
  }
  if (total > 1.0) {
    for (double& w : sol.weights) w /= total;
    total = 1.0;
  }
  sol.slot = 1.0 - total;
  double shortfall = 0.0;
  for (std::size_t k = 0; k < k_count; ++k) shortfall += sol.weights[k] * gaps[k];
  sol.value = worst - shortfall;
  sol.dual_value = kl_dual_objective(gaps, p, mean_gap, mean, r, u);
  return sol;
}

// Removes `alpha` mass from the lowest-loss atoms of q (stable in the loss
// order) and returns the removed amounts. The mass is capped at sum(q).
std::vector<double> lowest_mass(std::span<const double> c, std::span<const double> q,
                                double alpha) {
  std::vector<std::size_t> order;
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (q[k] > 0.0) order.push_back(k);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return c[a] < c[b]; });
  std::vector<double> removed(c.size(), 0.0);
  double remaining = alpha;
  for (std::size_t k : order) {
    if (remaining <= 0.0) break;
    const double take = q[k] <= remaining ? q[k] : remaining;
    removed[k] = take;
    remaining -= take;
    if (remaining <= 1e-15) remaining = 0.0;
  }
  return removed;
}

}  // namespace

double saa(const LossProfile& profile, bool use_inflated) {
  return mean(profile, use_inflated ? LossColumn::kInflated : LossColumn::kBase);
}

double svp(const LossProfile& profile, double penalty) {
  if (!(penalty >= 0.0)) throw InvalidArgument("variance penalty must be >= 0");
  return mean(profile, LossColumn::kBase) +
         penalty * std::sqrt(variance(profile, LossColumn::kBase));
}

WorstCaseSolution lp_dro(const LossProfile& profile, double alpha) {
  require_alpha(alpha);
  const auto& c = profile.inflated_losses();
  const auto& p = profile.weights();
  const std::size_t k_count = profile.size();
  WorstCaseSolution sol;
  sol.p_prime.assign(k_count + 1, 0.0);
  if (alpha == 0.0) {
    std::copy(p.begin(), p.end(), sol.p_prime.begin());
    sol.value = mean(profile);
    sol.s = std::vector<double>(k_count, 0.0);
    return sol;
  }
  const auto removed = lowest_mass(c, p, alpha);
  for (std::size_t k = 0; k < k_count; ++k) sol.p_prime[k] = p[k] - removed[k];
  sol.p_prime[k_count] = alpha;
  sol.value = weighted_sum(std::span(sol.p_prime).first(k_count), c) + alpha * profile.worst_case();
  sol.s = removed;
  return sol;
}

WorstCaseSolution kl_dro(const LossProfile& profile, double r) {
  require_r(r, false);
  const KlSolution kl =
      kl_solve(profile.inflated_losses(), profile.weights(), profile.worst_case(), r);
  WorstCaseSolution sol;
  sol.value = kl.value;
  sol.p_prime = kl.weights;
  sol.p_prime.push_back(kl.slot);
  sol.certificate = DualCertificate{kl.lambda, 0.0, kl.eta, kl.dual_value};
  return sol;
}

namespace {

// Loss profile of the LP-DRO worst case: the K atoms with their retained
// weights followed by the worst-case point carrying alpha.
struct ShiftedProfile {
  std::vector<double> losses;
  std::vector<double> weights;
};

ShiftedProfile lp_worst_case_profile(const LossProfile& profile, const WorstCaseSolution& lp) {
  ShiftedProfile out;
  out.losses = profile.inflated_losses();
  out.losses.push_back(profile.worst_case());
  out.weights = lp.p_prime;
  return out;
}

}  // namespace

WorstCaseSolution hd(const LossProfile& profile, double alpha, double r) {
  require_alpha(alpha);
  require_r(r, false);
  const std::size_t k_count = profile.size();
  const WorstCaseSolution lp = lp_dro(profile, alpha);
  WorstCaseSolution sol;
  sol.q_weights = lp.p_prime;
  std::vector<double> s(k_count);
  for (std::size_t k = 0; k < k_count; ++k) s[k] = profile.weights()[k] - lp.p_prime[k];
  sol.s = std::move(s);
  if (r == 0.0) {
    sol.value = lp.value;
    sol.p_prime = lp.p_prime;
    return sol;
  }
  const ShiftedProfile wc = lp_worst_case_profile(profile, lp);
  const KlSolution kl = kl_solve(wc.losses, wc.weights, profile.worst_case(), r);
  sol.p_prime.assign(kl.weights.begin(), kl.weights.begin() + static_cast<std::ptrdiff_t>(k_count));
  sol.p_prime.push_back(kl.weights[k_count] + kl.slot);
  sol.value = kl.value;
  sol.certificate = DualCertificate{kl.lambda, 0.0, kl.eta, kl.dual_value};
  return sol;
}

UnivariateDualResult hd_univariate(const LossProfile& profile, double alpha, double r) {
  require_alpha(alpha);
  require_r(r, true);
  const WorstCaseSolution lp = lp_dro(profile, alpha);
  const ShiftedProfile wc = lp_worst_case_profile(profile, lp);
  const double worst = profile.worst_case();
  const double mean_wc = weighted_sum(wc.weights, wc.losses);
  UnivariateDualResult res;
  res.bracket_lo = worst;
  const double mean_gap = std::max(worst - mean_wc, 0.0);
  if (mean_gap == 0.0) {
    res.value = worst;
    res.eta = worst;
    res.bracket_hi = worst;
    return res;
  }
  // (worst - e^{-r} mean) / (1 - e^{-r}) - worst, written without cancellation.
  const double width = mean_gap / std::expm1(r);
  res.bracket_hi = worst + width;
  std::vector<double> gaps(wc.losses.size());
  for (std::size_t k = 0; k < gaps.size(); ++k) gaps[k] = std::max(worst - wc.losses[k], 0.0);
  auto objective = [&](double u) {
    return kl_dual_objective(gaps, wc.weights, mean_gap, mean_wc, r, u);
  };
  const auto best = minimize_univariate(objective, 0.0, width, 1e-12 * (1.0 + width));
  res.value = best.value;
  res.eta = worst + best.argmin;
  return res;
}

DualCertificate hd_dual(const LossProfile& profile, double alpha, double r, double tol) {
  require_alpha(alpha);
  require_r(r, true);
  const auto& c = profile.inflated_losses();
  const auto& p = profile.weights();
  const double worst = profile.worst_case();
  const double c_min = min_positive(p, c);
  const double e_r = std::exp(-r);
  // Minimizer bound eta <= (worst - e^{-r} min c) / (1 - e^{-r}).
  const double eta_hi = worst + (worst - c_min) / std::expm1(r);
  const double scale = 1.0 + std::abs(worst) + (eta_hi - worst);

  auto objective = [&](std::span<const double> v) {
    const double eta = v[0];
    const double lambda = v[1];
    const double beta = v[2];
    const double tail = xlogx_over(lambda, eta - worst) - beta;
    double total = lambda * (r - 1.0) + beta * alpha + eta;
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (p[k] > 0.0) total += p[k] * std::max(xlogx_over(lambda, eta - c[k]), tail);
    }
    return total;
  };
  const std::vector<CoordinateBounds> bounds = {
      fixed_bounds(worst, eta_hi),
      [&](std::span<const double> v) { return std::make_pair(0.0, e_r * (v[0] - c_min)); },
      [&](std::span<const double> v) {
        const double eta = v[0];
        const double lambda = v[1];
        if (lambda == 0.0) return std::make_pair(0.0, 0.0);
        if (eta <= worst) return std::make_pair(1.0, 0.0);  // infeasible
        // Past this threshold every max picks its first branch.
        return std::make_pair(0.0, std::max(0.0, lambda * std::log((eta - c_min) / (eta - worst))));
      },
  };
  const auto res = minimize_lowdim(objective, bounds, tol * scale);
  return {res.argmin[1], res.argmin[2], res.argmin[0], res.value};
}

WorstCaseSolution hr(const LossProfile& profile, double alpha, double r) {
  require_alpha(alpha);
  require_r(r, false);
  const std::size_t k_count = profile.size();
  if (r == 0.0) {
    WorstCaseSolution sol = lp_dro(profile, alpha);
    std::vector<double> q(profile.weights());
    q.push_back(0.0);
    sol.q_weights = std::move(q);
    return sol;
  }
  const auto& c = profile.inflated_losses();
  const auto& p = profile.weights();
  const double worst = profile.worst_case();
  const double c_min = min_positive(p, c);

  std::vector<double> truncated(k_count);
  auto inner = [&](double beta) {
    for (std::size_t k = 0; k < k_count; ++k) truncated[k] = std::max(c[k] - beta, 0.0);
    return kl_solve(truncated, p, worst - beta, r);
  };
  auto outer = [&](double beta) {
    return beta * (1.0 - alpha) + alpha * worst + inner(beta).value;
  };
  // Below min c the objective is nonincreasing (translation equivariance of
  // the KL term) and past the worst case it is nondecreasing.
  const auto best = minimize_univariate(outer, c_min, worst,
                                        1e-12 * (1.0 + std::abs(worst) + (worst - c_min)));
  KlSolution kl = inner(best.argmin);
  if (best.argmin >= worst) {
    // Fully truncated profile: take the left limit, whose KL solution only
    // distinguishes atoms sitting at the worst case.
    std::vector<double> at_worst(k_count);
    for (std::size_t k = 0; k < k_count; ++k) at_worst[k] = c[k] >= worst ? 1.0 : 0.0;
    const KlSolution limit = kl_solve(at_worst, p, 1.0, r);
    kl.weights = limit.weights;
    kl.slot = limit.slot;
  }

  WorstCaseSolution sol;
  std::vector<double> q(kl.weights);
  q.push_back(kl.slot);
  std::vector<double> q_atoms(kl.weights);
  const auto removed = lowest_mass(c, q_atoms, alpha);
  double moved = 0.0;
  sol.p_prime.assign(k_count + 1, 0.0);
  for (std::size_t k = 0; k < k_count; ++k) {
    sol.p_prime[k] = q_atoms[k] - removed[k];
    moved += removed[k];
  }
  sol.p_prime[k_count] = kl.slot + moved;
  sol.value = weighted_sum(std::span(sol.p_prime).first(k_count), c) +
              sol.p_prime[k_count] * worst;

  // Feasibility of the recovered solution: KL(p_hat || q') <= r and sum s <= alpha.
  double divergence = 0.0;
  for (std::size_t k = 0; k < k_count; ++k) {
    if (p[k] > 0.0) divergence += p[k] * std::log(p[k] / q[k]);
  }
  if (divergence > r + 1e-7 || moved > alpha + 1e-9) {
    throw std::logic_error("recovered worst-case distribution is infeasible");
  }
  sol.q_weights = std::move(q);
  sol.s = removed;
  sol.certificate = DualCertificate{kl.lambda, best.argmin, kl.eta + best.argmin, best.value};
  return sol;
}

DualCertificate hr_dual(const LossProfile& profile, double alpha, double r, double tol) {
  require_alpha(alpha);
  require_r(r, true);
  const auto& c = profile.inflated_losses();
  const auto& p = profile.weights();
  const double worst = profile.worst_case();
  const double c_min = min_positive(p, c);
  const double e_r = std::exp(-r);
  double eta_hi = worst + (worst - c_min) / std::expm1(r);

  auto objective = [&](std::span<const double> v) {
    const double eta = v[0];
    const double lambda = v[1];
    const double beta = v[2];
    const double tail = xlogx_over(lambda, eta - worst + beta);
    double total = lambda * (r - 1.0) + beta * alpha + eta;
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (p[k] > 0.0) total += p[k] * std::max(xlogx_over(lambda, eta - c[k]), tail);
    }
    return total;
  };
  const auto beta_bounds = fixed_bounds(0.0, std::max(worst - c_min, 0.0));
  auto lambda_bounds = [&](std::span<const double> v) {
    return std::make_pair(0.0, e_r * (v[0] - c_min));
  };
  // The eta bound is not tight for this dual; widen until the minimizer is interior.
  for (int attempt = 0;; ++attempt) {
    const double scale = 1.0 + std::abs(worst) + (eta_hi - worst);
    const auto res = minimize_lowdim(
        objective, {fixed_bounds(worst, eta_hi), lambda_bounds, beta_bounds}, tol * scale);
    if (res.argmin[0] < eta_hi - 1e-3 * (eta_hi - worst) || attempt == 8) {
      return {res.argmin[1], res.argmin[2], res.argmin[0], res.value};
    }
    eta_hi = worst + 4.0 * (eta_hi - worst);
  }
}

PredictorKind parse_predictor_kind(const std::string& name) {
  if (name == "saa") return PredictorKind::kSaa;
  if (name == "svp") return PredictorKind::kSvp;
  if (name == "kl") return PredictorKind::kKl;
  if (name == "lp") return PredictorKind::kLp;
  if (name == "hr") return PredictorKind::kHr;
  if (name == "hd") return PredictorKind::kHd;
  if (name == "winf") return PredictorKind::kWinf;
  if (name == "tv") return PredictorKind::kTv;
  throw InvalidArgument("unknown predictor kind '" + name + "'");
}

std::string to_string(PredictorKind kind) {
  switch (kind) {
    case PredictorKind::kSaa: return "saa";
    case PredictorKind::kSvp: return "svp";
    case PredictorKind::kKl: return "kl";
    case PredictorKind::kLp: return "lp";
    case PredictorKind::kHr: return "hr";
    case PredictorKind::kHd: return "hd";
    case PredictorKind::kWinf: return "winf";
    case PredictorKind::kTv: return "tv";
  }
  return "unknown";
}

WorstCaseSolution predictor_family(const LossProfile& profile, const RobustnessParams& params,
                                   PredictorKind kind, double svp_penalty) {
  params.validate();
  switch (kind) {
    case PredictorKind::kSaa: {
      WorstCaseSolution sol;
      sol.value = saa(profile, true);
      sol.p_prime = profile.weights();
      sol.p_prime.push_back(0.0);
      return sol;
    }
    case PredictorKind::kSvp: {
      WorstCaseSolution sol;
      sol.value = svp(profile, svp_penalty);
      sol.column = LossColumn::kBase;
      const double mu = mean(profile, LossColumn::kBase);
      const double sd = std::sqrt(variance(profile, LossColumn::kBase));
      sol.p_prime.assign(profile.size() + 1, 0.0);
      for (std::size_t k = 0; k < profile.size(); ++k) {
        const double p = profile.weights()[k];
        const double z = sd > 0.0 ? (profile.base_losses()[k] - mu) / sd : 0.0;
        sol.p_prime[k] = p * (1.0 + svp_penalty * z);
      }
      return sol;
    }
    case PredictorKind::kKl:
      return kl_dro(profile, params.r);
    case PredictorKind::kLp:
      return lp_dro(profile, params.alpha);
    case PredictorKind::kHr:
      return hr(profile, params.alpha, params.r);
    case PredictorKind::kHd:
      return hd(profile, params.alpha, params.r);
    case PredictorKind::kWinf:
      return lp_dro(profile, 0.0);
    case PredictorKind::kTv: {
      if (params.epsilon != 0.0 || profile.base_losses() != profile.inflated_losses()) {
        throw InvalidArgument("tv predictor requires a noise-free profile (epsilon = 0)");
      }
      return lp_dro(profile, params.alpha);
    }
  }
  throw InvalidArgument("unknown predictor kind");
}

nlohmann::json to_json(const DualCertificate& certificate) {
  return {{"lambda", certificate.lambda},
          {"beta", certificate.beta},
          {"eta", certificate.eta},
          {"dual_value", certificate.dual_value}};
}

nlohmann::json to_json(const WorstCaseSolution& solution) {
  nlohmann::json j{{"value", solution.value}, {"p_prime", solution.p_prime}};
  if (solution.q_weights) j["q_weights"] = *solution.q_weights;
  if (solution.s) j["s"] = *solution.s;
  if (solution.certificate) j["certificate"] = to_json(*solution.certificate);
  j["loss_column"] = solution.column == LossColumn::kBase ? "base" : "inflated";
  return j;
}

}  // namespace holistic
