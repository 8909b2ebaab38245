// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "holistic/decision.hpp"
#include "holistic/experiments.hpp"
#include "holistic/predictors.hpp"
#include "holistic/transport.hpp"
#include "support.hpp"

using namespace holistic;
using testing::random_profile;
using testing::rel_gap;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool within_rel(double a, double b, double tol) {
  return rel_gap(a, b) <= tol || std::abs(a - b) <= 1e-12;
}

std::string fmt(const char* format, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

double kl_divergence(const std::vector<double>& p, std::span<const double> q) {
  double d = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] > 0.0) d += p[k] * std::log(p[k] / q[k]);
  }
  return d;
}

Outcome lp_vs_bruteforce() {
  const auto start = Clock::now();
  Rng rng(101);
  double worst_gap = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = random_profile(rng, {.max_k = 6, .allow_zero_weights = true});
    const std::size_t k = p.size();
    NoiseIndicator within = identity_geometry(k);
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        // Extra free moves only toward points no worse than the inflated loss.
        if (p.inflated_losses()[j] <= p.inflated_losses()[i] && rng.bernoulli(0.3)) {
          within[i][j] = true;
        }
      }
    }
    const double alpha = trial % 10 == 0 ? 0.0 : rng.uniform();
    worst_gap = std::max(worst_gap,
                         std::abs(lp_dro(p, alpha).value - lp_dro_bruteforce(p, within, alpha)));
  }
  const double elapsed = seconds_since(start);
  return {worst_gap <= 1e-7 && elapsed < 10.0,
          fmt("max |diff| %.3g, %.2f s", worst_gap, elapsed)};
}

Outcome lp_vs_enumeration() {
  Rng rng(102);
  double worst_gap = 0.0;
  int instances = 0;
  for (std::size_t t = 1; t <= 8; ++t) {
    for (std::size_t replaced = 0; replaced <= std::min<std::size_t>(2, t); ++replaced) {
      for (int rep = 0; rep < 25; ++rep) {
        std::vector<double> losses(t);
        for (double& c : losses) c = rng.bernoulli(0.2) ? 5.0 : 10.0 * rng.uniform();
        const double worst = *std::max_element(losses.begin(), losses.end()) + rng.uniform(0, 3);
        const double alpha = static_cast<double>(replaced) / static_cast<double>(t);
        const auto p = LossProfile::from_losses(
            losses, std::vector<double>(t, 1.0 / static_cast<double>(t)), worst);
        worst_gap = std::max(worst_gap, std::abs(lp_dro(p, alpha).value -
                                                 replacement_enumeration(losses, worst, alpha)));
        ++instances;
      }
    }
  }
  return {worst_gap <= 1e-9, fmt("%d instances, max |diff| %.3g", instances, worst_gap)};
}

Outcome hd_triangle() {
  Rng rng(103);
  const double radii[] = {0.01, 0.1, 1.0};
  double worst = 0.0;
  int outside = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = random_profile(rng, {.max_k = 20, .allow_zero_weights = true});
    const double alpha = rng.uniform(0, 0.6);
    const double r = radii[trial % 3];
    const double primary = hd(p, alpha, r).value;
    const auto uni = hd_univariate(p, alpha, r);
    const double dual = hd_dual(p, alpha, r).dual_value;
    worst = std::max({worst, rel_gap(primary, uni.value), rel_gap(primary, dual),
                      rel_gap(uni.value, dual)});
    if (uni.eta < uni.bracket_lo || uni.eta > uni.bracket_hi) ++outside;
  }
  return {worst <= 1e-5 && outside == 0,
          fmt("max rel gap %.3g, minimizer outside bracket %d times", worst, outside)};
}

Outcome hr_pair() {
  Rng rng(104);
  const double radii[] = {0.01, 0.1, 1.0};
  double route_gap = 0.0, duality_gap = 0.0, violation = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = random_profile(rng, {.max_k = 20, .allow_zero_weights = true});
    const double alpha = rng.uniform(0, 0.6);
    const double r = radii[trial % 3];
    const auto sol = hr(p, alpha, r);
    const auto dual = hr_dual(p, alpha, r);
    route_gap = std::max(route_gap, rel_gap(sol.value, dual.dual_value));
    duality_gap = std::max(duality_gap, rel_gap(sol.value, sol.certificate->dual_value));

    const std::size_t k = p.size();
    const auto& q = *sol.q_weights;
    const auto& s = *sol.s;
    double q_sum = 0.0, p_sum = 0.0, moved = 0.0;
    for (std::size_t i = 0; i <= k; ++i) {
      q_sum += q[i];
      p_sum += sol.p_prime[i];
      violation = std::max({violation, -q[i], -sol.p_prime[i]});
    }
    for (std::size_t i = 0; i < k; ++i) {
      moved += s[i];
      violation = std::max({violation, -s[i], std::abs(q[i] - sol.p_prime[i] - s[i])});
    }
    violation = std::max({violation, std::abs(q_sum - 1.0), std::abs(p_sum - 1.0),
                          moved - alpha, kl_divergence(p.weights(), q) - r});
    double objective = sol.p_prime[k] * p.worst_case();
    for (std::size_t i = 0; i < k; ++i) objective += sol.p_prime[i] * p.inflated_losses()[i];
    violation = std::max(violation, std::abs(objective - sol.value));
  }
  return {route_gap <= 1e-5 && duality_gap <= 1e-5 && violation <= 1e-7,
          fmt("route gap %.3g, duality gap %.3g, constraint violation %.3g", route_gap,
              duality_gap, violation)};
}

Outcome collapses() {
  Rng rng(105);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = random_profile(rng, {.max_k = 20, .allow_zero_weights = true});
    const double alpha = rng.uniform();
    const double r = std::exp(rng.uniform(-5, 1));
    const double lp = lp_dro(p, alpha).value;
    const double kl = kl_dro(p, r).value;
    worst = std::max({worst, std::abs(hr(p, alpha, 0).value - lp),
                      std::abs(hd(p, alpha, 0).value - lp), std::abs(hr(p, 0, r).value - kl),
                      std::abs(hd(p, 0, r).value - kl), std::abs(hr(p, 0, 0).value - saa(p))});
  }
  return {worst <= 1e-8, fmt("max |diff| %.3g", worst)};
}

Outcome monotonicity() {
  Rng rng(106);
  const std::vector<double> alphas{0.0, 0.05, 0.1, 0.2, 0.4};
  const std::vector<double> radii{0.0, 0.005, 0.05, 0.2, 1.0};
  const std::vector<double> epsilons{0.0, 0.1, 0.25, 0.5};
  int violations = 0;
  using Predictor = std::function<double(const LossProfile&, double, double)>;
  const std::vector<Predictor> predictors{
      [](const LossProfile& p, double a, double r) { return hr(p, a, r).value; },
      [](const LossProfile& p, double a, double r) { return hd(p, a, r).value; },
      [](const LossProfile& p, double a, double) { return lp_dro(p, a).value; },
      [](const LossProfile& p, double, double r) { return kl_dro(p, r).value; }};
  for (int trial = 0; trial < 100; ++trial) {
    // Newsvendor profiles so that epsilon enters through the loss oracle.
    Samples demand;
    const std::size_t t_count = 2 + rng.index(12);
    for (std::size_t i = 0; i < t_count; ++i) {
      demand.push_back({std::round(rng.uniform(0, 60)) / 10});
    }
    const std::vector<double> x{rng.uniform(0, 6)};
    const double b = rng.uniform(0.5, 3), h = rng.uniform(0.5, 3);
    std::vector<LossProfile> by_eps;
    for (double eps : epsilons) {
      by_eps.push_back(build_profile(*newsvendor_oracle(b, h, 0, 6, eps, 0.5), x, demand));
    }
    for (const auto& f : predictors) {
      for (std::size_t e = 0; e < epsilons.size(); ++e) {
        const auto& p = by_eps[e];
        const double slack = 1e-9 * (1 + p.worst_case());
        for (std::size_t i = 0; i < alphas.size(); ++i) {
          for (std::size_t j = 0; j < radii.size(); ++j) {
            const double v = f(p, alphas[i], radii[j]);
            if (i > 0 && f(p, alphas[i - 1], radii[j]) > v + slack) ++violations;
            if (j > 0 && f(p, alphas[i], radii[j - 1]) > v + slack) ++violations;
            if (e > 0 && f(by_eps[e - 1], alphas[i], radii[j]) > v + slack) ++violations;
          }
        }
      }
    }
  }
  return {violations == 0, fmt("%d violations", violations)};
}

Outcome cvar_routes() {
  Rng rng(107);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto p = random_profile(rng, {.max_k = 50, .allow_zero_weights = true});
    const double alpha = trial % 20 == 0 ? 0.0 : (trial % 20 == 1 ? 1.0 : rng.uniform());
    worst = std::max(worst, std::abs(scaled_cvar(p, alpha) - scaled_cvar_minimization(p, alpha)));
  }
  return {worst <= 1e-10, fmt("max |diff| %.3g", worst)};
}

Outcome regularization_identities() {
  Rng rng(108);
  double ridge_gap = 0.0, soft_gap = 0.0;
  int soft_checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    LabeledData reg;
    for (int t = 0; t < 15; ++t) {
      reg.covariates.push_back({rng.normal(), rng.normal(), rng.normal()});
      reg.responses.push_back(rng.normal());
    }
    const double eps = rng.uniform(0, 1);
    const std::vector<double> theta{rng.normal(), rng.normal(), rng.normal()};
    double mae = 0.0;
    for (std::size_t t = 0; t < reg.size(); ++t) {
      mae += std::abs(std::inner_product(theta.begin(), theta.end(), reg.covariates[t].begin(),
                                         0.0) - reg.responses[t]);
    }
    const double ridge = mae / static_cast<double>(reg.size()) +
                         eps * std::sqrt(std::inner_product(theta.begin(), theta.end(),
                                                            theta.begin(), 0.0));
    const double predicted = saa(build_profile(*l1_regression_oracle(reg, eps, eps), theta,
                                               reg.samples()));
    ridge_gap = std::max(ridge_gap, std::abs(predicted - ridge) / std::max(1.0, ridge));
  }
  for (int trial = 0; trial < 100; ++trial) {
    // Separable by a random line through the origin with a random margin.
    const double angle = rng.uniform(0, 2 * M_PI);
    const double nx = std::cos(angle), ny = std::sin(angle);
    LabeledData cls;
    for (int t = 0; t < 20; ++t) {
      const double label = t % 2 == 0 ? 1.0 : -1.0;
      const double along = rng.uniform(-1, 1);
      const double across = label * rng.uniform(0.05, 1);
      cls.covariates.push_back({across * nx - along * ny, across * ny + along * nx});
      cls.responses.push_back(label);
    }
    const double eps = rng.uniform(0, 0.5);
    const std::vector<double> x{0.3 * rng.normal(), 0.3 * rng.normal(), 0.1 * rng.normal()};
    const double norm = std::hypot(x[0], x[1]);
    double hinge_mean = 0.0;
    bool inactive = true;
    for (std::size_t t = 0; t < cls.size(); ++t) {
      const double arg = 1 - cls.responses[t] * (x[0] * cls.covariates[t][0] +
                                                 x[1] * cls.covariates[t][1] - x[2]);
      inactive = inactive && arg + eps * norm >= 0.0;
      hinge_mean += std::max(arg, 0.0) / static_cast<double>(cls.size());
    }
    if (!inactive) continue;
    ++soft_checked;
    const double soft = hinge_mean + eps * norm;
    const double predicted = saa(build_profile(*hinge_oracle(cls, eps, eps), x, cls.samples()));
    soft_gap = std::max(soft_gap, std::abs(predicted - soft) / std::max(1.0, soft));
  }
  return {ridge_gap <= 1e-12 && soft_gap <= 1e-12 && soft_checked >= 50,
          fmt("ridge gap %.3g, soft-margin gap %.3g over %d inactive configurations", ridge_gap,
              soft_gap, soft_checked)};
}

Outcome danskin() {
  Rng rng(109);
  LabeledData reg;
  for (int t = 0; t < 12; ++t) {
    reg.covariates.push_back({rng.normal(), rng.normal()});
    reg.responses.push_back(reg.covariates.back()[0] - reg.covariates.back()[1] + rng.normal());
  }
  LabeledData cls;
  for (int t = 0; t < 12; ++t) {
    const double label = t % 2 == 0 ? 1.0 : -1.0;
    cls.covariates.push_back({label * rng.uniform(0.05, 1), rng.uniform(-1, 1)});
    cls.responses.push_back(label);
  }
  Samples demand;
  for (int t = 0; t < 12; ++t) demand.push_back({rng.uniform(0, 6)});
  const auto l1 = l1_regression_oracle(reg, 0.1, 0.2);
  const auto hinge = hinge_oracle(cls, 0.1, 0.2);
  const auto nv = newsvendor_oracle(2, 1, 0, 6, 0.1, 0.2);
  const RobustnessParams params{0.1, 0.2, 0.15, 0.1};
  struct Case {
    const char* name;
    const LossOracle* oracle;
    const Samples samples;
    bool positive;
  };
  const std::vector<Case> cases{{"l1reg", l1.get(), reg.samples(), false},
                                {"hinge", hinge.get(), cls.samples(), false},
                                {"newsvendor", nv.get(), demand, true}};
  const double h = 1e-5;
  double worst = 0.0;
  std::string counts;
  bool enough = true;
  for (const auto& c : cases) {
    auto value = [&](std::span<const double> x) {
      return evaluate_predictor(*c.oracle, x, c.samples, params, PredictorKind::kHr).value;
    };
    int smooth = 0, attempts = 0;
    while (smooth < 50 && attempts < 1000) {
      ++attempts;
      std::vector<double> x(c.oracle->decision_dim());
      for (double& v : x) v = c.positive ? rng.uniform(0.5, 5.5) : rng.normal();
      const LossProfile profile = build_profile(*c.oracle, x, c.samples);
      const auto sol = predictor_family(profile, params, PredictorKind::kHr);
      const auto g = danskin_subgradient(*c.oracle, x, c.samples, profile, sol);
      std::vector<double> fd(x.size());
      bool kink = false;
      for (std::size_t i = 0; i < x.size() && !kink; ++i) {
        auto xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        const double up = value(xp), down = value(xm);
        const double forward = (up - sol.value) / h, backward = (sol.value - down) / h;
        // Disagreeing one-sided slopes put a kink inside the probe.
        if (std::abs(forward - backward) > 1e-4 * std::max(1.0, std::abs(forward))) kink = true;
        fd[i] = (up - down) / (2 * h);
      }
      if (kink) continue;
      ++smooth;
      for (std::size_t i = 0; i < x.size(); ++i) {
        worst = std::max(worst, std::abs(fd[i] - g[i]) / std::max(1.0, std::abs(g[i])));
      }
    }
    enough = enough && smooth == 50;
    counts += fmt(" %s %d/%d", c.name, smooth, attempts);
  }
  return {worst <= 1e-4 && enough, fmt("max rel error %.3g; smooth points:", worst) + counts};
}

Outcome disappointment() {
  const auto start = Clock::now();
  const auto oracle = newsvendor_oracle(2, 1, 0, 6, 0, 0);
  DisappointmentSetup setup;
  setup.oracle = oracle.get();
  setup.decision = {2};
  setup.truth = {{{1}, {2}, {5}}, {0.5, 0.3, 0.2}};
  setup.sample_size = 100;
  setup.trials = 2000;
  setup.seed = 2024;
  bool pass = true;
  double previous = 1.0;
  std::string detail;
  for (double r : {0.005, 0.01, 0.02}) {
    const auto report = disappointment_rate(setup, PredictorKind::kKl, {0, 0, 0, r});
    pass = pass && report.rate <= report.allowed_rate() && report.rate <= previous;
    previous = report.rate;
    detail += fmt("r=%g rate %.4f allowed %.4f; ", r, report.rate, report.allowed_rate());
  }
  const double elapsed = seconds_since(start);
  return {pass && elapsed < 60.0, detail + fmt("%.2f s", elapsed)};
}

double angular_distance(const std::vector<double>& a, const std::vector<double>& b) {
  const double dot = std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
  const double na = std::sqrt(std::inner_product(a.begin(), a.end(), a.begin(), 0.0));
  const double nb = std::sqrt(std::inner_product(b.begin(), b.end(), b.begin(), 0.0));
  return std::acos(std::clamp(dot / (na * nb), -1.0, 1.0));
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Outcome misspecified_classification() {
  const double eps = 0.08;
  std::vector<double> hr_angles, erm_angles;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto clean = gaussianize(gen_two_rectangles(30, 1000 + seed), 2000 + seed);
    const auto dirty = misspecify_closest(clean, 0.15);
    const auto reference = softmargin_fit(clean, eps).decision;
    const auto robust_oracle = hinge_oracle(dirty, eps, eps);
    const auto robust =
        fit(*robust_oracle, dirty.samples(), {eps, eps, 0.08, 0.0}, PredictorKind::kHr);
    const auto plain_oracle = hinge_oracle(dirty, 0, 0);
    const auto erm = erm_fit(*plain_oracle, dirty.samples());
    hr_angles.push_back(angular_distance(robust.decision, reference));
    erm_angles.push_back(angular_distance(erm.decision, reference));
  }
  const double hr_median = median(hr_angles), erm_median = median(erm_angles);
  return {hr_median < erm_median,
          fmt("median angular distance hr %.4f rad, erm %.4f rad", hr_median, erm_median)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"lp_dro closed form vs coupling brute force", lp_vs_bruteforce},
      {"lp_dro vs replacement enumeration", lp_vs_enumeration},
      {"hd route triangle", hd_triangle},
      {"hr route pair and primal recovery", hr_pair},
      {"special-case collapses", collapses},
      {"monotonicity in alpha, r and epsilon", monotonicity},
      {"cvar sorted sum vs minimization", cvar_routes},
      {"ridge and soft-margin identities", regularization_identities},
      {"danskin subgradients vs finite differences", danskin},
      {"disappointment bound", disappointment},
      {"misspecified classification direction", misspecified_classification},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    failures += !out.pass;
    std::printf("criterion %zu (%s): %s  [%s]\n", i + 1, criteria[i].first,
                out.pass ? "PASS" : "FAIL", out.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
