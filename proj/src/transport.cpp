#include "holistic/transport.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cmath>
#include <limits>
#include <queue>

namespace holistic {

namespace {

constexpr double kFlowEps = 1e-15;
constexpr double kPivotEps = 1e-12;

void check_indicator(const NoiseIndicator& within, std::size_t rows, std::size_t cols) {
  if (within.size() != rows) throw InvalidArgument("noise indicator has wrong number of rows");
  for (const auto& row : within) {
    if (row.size() != cols) throw InvalidArgument("noise indicator has wrong number of columns");
  }
}

}  // namespace

RhoResult rho(const DiscreteDistribution& mu, const DiscreteDistribution& nu,
              const NoiseIndicator& within) {
  const std::size_t m = mu.size();
  const std::size_t n = nu.size();
  check_indicator(within, m, n);

  // Node layout: 0 = source, 1..m = mu atoms, m+1..m+n = nu atoms, m+n+1 = sink.
  const std::size_t nodes = m + n + 2;
  const std::size_t source = 0;
  const std::size_t sink = nodes - 1;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> capacity(nodes, std::vector<double>(nodes, 0.0));
  for (std::size_t i = 0; i < m; ++i) capacity[source][1 + i] = mu.weights()[i];
  for (std::size_t j = 0; j < n; ++j) capacity[1 + m + j][sink] = nu.weights()[j];
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (within[i][j]) capacity[1 + i][1 + m + j] = inf;
    }
  }

  std::vector<std::vector<double>> flow(nodes, std::vector<double>(nodes, 0.0));
  auto residual = [&](std::size_t u, std::size_t v) { return capacity[u][v] - flow[u][v]; };
  std::vector<std::size_t> parent(nodes);
  while (true) {
    std::fill(parent.begin(), parent.end(), nodes);
    parent[source] = source;
    std::queue<std::size_t> frontier;
    frontier.push(source);
    while (!frontier.empty() && parent[sink] == nodes) {
      const std::size_t u = frontier.front();
      frontier.pop();
      for (std::size_t v = 0; v < nodes; ++v) {
        if (parent[v] == nodes && residual(u, v) > kFlowEps) {
          parent[v] = u;
          frontier.push(v);
        }
      }
    }
    if (parent[sink] == nodes) break;
    double push = inf;
    for (std::size_t v = sink; v != source; v = parent[v]) {
      push = std::min(push, residual(parent[v], v));
    }
    for (std::size_t v = sink; v != source; v = parent[v]) {
      flow[parent[v]][v] += push;
      flow[v][parent[v]] -= push;
    }
  }

  RhoResult result;
  auto& gamma = result.coupling.gamma;
  gamma.assign(m, std::vector<double>(n, 0.0));
  std::vector<double> supply(mu.weights());
  std::vector<double> demand(nu.weights());
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double f = std::max(flow[1 + i][1 + m + j], 0.0);
      gamma[i][j] = f;
      supply[i] -= f;
      demand[j] -= f;
    }
  }
  // Remaining mass travels at unit cost; any pairing is optimal.
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < m && j < n) {
    if (supply[i] <= kFlowEps) {
      ++i;
      continue;
    }
    if (demand[j] <= kFlowEps) {
      ++j;
      continue;
    }
    const double moved = std::min(supply[i], demand[j]);
    gamma[i][j] += moved;
    supply[i] -= moved;
    demand[j] -= moved;
  }
  double cost = 0.0;
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (!within[a][b]) cost += gamma[a][b];
    }
  }
  result.value = std::clamp(cost, 0.0, 1.0);
  return result;
}

NoiseIndicator equality_indicator(const DiscreteDistribution& mu,
                                  const DiscreteDistribution& nu) {
  NoiseIndicator within(mu.size(), std::vector<bool>(nu.size(), false));
  for (std::size_t i = 0; i < mu.size(); ++i) {
    for (std::size_t j = 0; j < nu.size(); ++j) within[i][j] = mu.atoms()[i] == nu.atoms()[j];
  }
  return within;
}

NoiseIndicator identity_geometry(std::size_t k) {
  NoiseIndicator within(k, std::vector<bool>(k + 1, false));
  for (std::size_t i = 0; i < k; ++i) within[i][i] = true;
  return within;
}

LpSolution solve_lp(const LinearProgram& lp) {
  const std::size_t m = lp.rows.size();
  const std::size_t n = lp.objective.size();
  if (lp.senses.size() != m || lp.rhs.size() != m) {
    throw InvalidArgument("linear program has inconsistent constraint data");
  }
  for (const auto& row : lp.rows) {
    if (row.size() != n) throw InvalidArgument("constraint row has wrong length");
  }

  // Column layout: structural | slack/surplus (one per inequality) | artificial.
  std::vector<std::vector<double>> a = lp.rows;
  std::vector<double> b = lp.rhs;
  std::vector<ConstraintSense> sense = lp.senses;
  for (std::size_t i = 0; i < m; ++i) {
    if (b[i] < 0.0) {
      for (double& v : a[i]) v = -v;
      b[i] = -b[i];
      if (sense[i] == ConstraintSense::kLessEqual) {
        sense[i] = ConstraintSense::kGreaterEqual;
      } else if (sense[i] == ConstraintSense::kGreaterEqual) {
        sense[i] = ConstraintSense::kLessEqual;
      }
    }
  }
  std::size_t n_slack = 0;
  std::size_t n_art = 0;
  for (auto s : sense) {
    if (s != ConstraintSense::kEqual) ++n_slack;
    if (s != ConstraintSense::kLessEqual) ++n_art;
  }
  const std::size_t cols = n + n_slack + n_art;
  std::vector<std::vector<double>> t(m, std::vector<double>(cols + 1, 0.0));
  std::vector<std::size_t> basis(m);
  std::size_t slack_col = n;
  std::size_t art_col = n + n_slack;
  for (std::size_t i = 0; i < m; ++i) {
    std::copy(a[i].begin(), a[i].end(), t[i].begin());
    t[i][cols] = b[i];
    if (sense[i] == ConstraintSense::kLessEqual) {
      t[i][slack_col] = 1.0;
      basis[i] = slack_col++;
    } else {
      if (sense[i] == ConstraintSense::kGreaterEqual) t[i][slack_col++] = -1.0;
      t[i][art_col] = 1.0;
      basis[i] = art_col++;
    }
  }
  const std::size_t first_art = n + n_slack;

  auto pivot = [&](std::size_t r, std::size_t c) {
    const double p = t[r][c];
    for (double& v : t[r]) v /= p;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == r || t[i][c] == 0.0) continue;
      const double factor = t[i][c];
      for (std::size_t j = 0; j <= cols; ++j) t[i][j] -= factor * t[r][j];
    }
    basis[r] = c;
  };

  // Maximizes cost . x over columns < allowed; returns false when unbounded.
  auto run = [&](const std::vector<double>& cost, std::size_t allowed) {
    while (true) {
      std::size_t enter = cols;
      for (std::size_t j = 0; j < allowed; ++j) {
        double reduced = cost[j];
        for (std::size_t i = 0; i < m; ++i) reduced -= cost[basis[i]] * t[i][j];
        if (reduced > kPivotEps) {
          enter = j;
          break;
        }
      }
      if (enter == cols) return true;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m; ++i) {
        if (t[i][enter] > kPivotEps) best_ratio = std::min(best_ratio, t[i][cols] / t[i][enter]);
      }
      std::size_t leave = m;
      for (std::size_t i = 0; i < m; ++i) {
        if (t[i][enter] <= kPivotEps) continue;
        if (t[i][cols] / t[i][enter] > best_ratio + kPivotEps) continue;
        if (leave == m || basis[i] < basis[leave]) leave = i;
      }
      if (leave == m) return false;
      pivot(leave, enter);
    }
  };

  LpSolution solution;
  if (n_art > 0) {
    std::vector<double> phase1(cols, 0.0);
    for (std::size_t j = first_art; j < cols; ++j) phase1[j] = -1.0;
    run(phase1, cols);
    double infeasibility = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (basis[i] >= first_art) infeasibility += t[i][cols];
    }
    if (infeasibility > 1e-9) return solution;
    for (std::size_t i = 0; i < m; ++i) {
      if (basis[i] < first_art) continue;
      for (std::size_t j = 0; j < first_art; ++j) {
        if (std::abs(t[i][j]) > kPivotEps) {
          pivot(i, j);
          break;
        }
      }
    }
  }
  solution.feasible = true;
  std::vector<double> phase2(cols, 0.0);
  std::copy(lp.objective.begin(), lp.objective.end(), phase2.begin());
  if (!run(phase2, first_art)) {
    solution.bounded = false;
    return solution;
  }
  solution.x.assign(n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    if (basis[i] < n) solution.x[basis[i]] = t[i][cols];
  }
  for (std::size_t j = 0; j < n; ++j) solution.value += lp.objective[j] * solution.x[j];
  return solution;
}

double lp_dro_bruteforce(const LossProfile& profile, const NoiseIndicator& within, double alpha) {
  if (alpha < 0.0) throw InvalidArgument("coupling budget must be nonnegative");
  const std::size_t k = profile.size();
  check_indicator(within, k, k + 1);
  const std::size_t j_count = k + 1;
  auto candidate_loss = [&](std::size_t j) {
    return j < k ? profile.inflated_losses()[j] : profile.worst_case();
  };

  // Variable gamma[i][j] at column i * (K+1) + j.
  LinearProgram lp;
  lp.objective.assign(k * j_count, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < j_count; ++j) lp.objective[i * j_count + j] = candidate_loss(j);
  }
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<double> row(k * j_count, 0.0);
    for (std::size_t j = 0; j < j_count; ++j) row[i * j_count + j] = 1.0;
    lp.rows.push_back(std::move(row));
    lp.senses.push_back(ConstraintSense::kEqual);
    lp.rhs.push_back(profile.weights()[i]);
  }
  std::vector<double> budget(k * j_count, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < j_count; ++j) budget[i * j_count + j] = within[i][j] ? 0.0 : 1.0;
  }
  lp.rows.push_back(std::move(budget));
  lp.senses.push_back(ConstraintSense::kLessEqual);
  lp.rhs.push_back(alpha);

  const LpSolution sol = solve_lp(lp);
  if (!sol.feasible || !sol.bounded) throw InvalidArgument("coupling LP has no optimum");
  return sol.value;
}

double replacement_enumeration(std::span<const double> inflated_losses, double worst_case,
                               double alpha, std::size_t max_samples) {
  const std::size_t t = inflated_losses.size();
  if (t == 0) throw InvalidArgument("enumeration needs at least one sample");
  if (t > max_samples) throw InvalidArgument("too many samples for exhaustive enumeration");
  if (alpha < 0.0 || alpha > 1.0) throw InvalidArgument("alpha must lie in [0, 1]");
  const double count_real = alpha * static_cast<double>(t);
  const double count_rounded = std::round(count_real);
  if (std::abs(count_real - count_rounded) > 1e-9) {
    throw InvalidArgument("alpha * T must be an integer");
  }
  const auto count = static_cast<int>(count_rounded);

  double best = -std::numeric_limits<double>::infinity();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << t); ++mask) {
    if (std::popcount(mask) != count) continue;
    double total = 0.0;
    for (std::size_t i = 0; i < t; ++i) {
      total += ((mask >> i) & 1U) ? worst_case : inflated_losses[i];
    }
    best = std::max(best, total / static_cast<double>(t));
  }
  return best;
}

}  // namespace holistic
