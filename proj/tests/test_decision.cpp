#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "holistic/decision.hpp"
#include "holistic/rng.hpp"

using namespace holistic;

namespace {

LabeledData linear_data(Rng& rng, std::size_t n, const std::vector<double>& theta) {
  LabeledData data;
  for (std::size_t t = 0; t < n; ++t) {
    std::vector<double> x(theta.size());
    double y = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      x[j] = rng.uniform(-1, 1);
      y += theta[j] * x[j];
    }
    data.covariates.push_back(x);
    data.responses.push_back(y);
  }
  return data;
}

// Separable points packed near the separator {x1 = 0}, so every hinge argument
// stays positive for moderate theta.
LabeledData narrow_separable(Rng& rng, std::size_t n) {
  LabeledData data;
  for (std::size_t t = 0; t < n; ++t) {
    const double label = t % 2 == 0 ? 1.0 : -1.0;
    data.covariates.push_back({label * rng.uniform(0.01, 0.1), rng.uniform(-0.1, 0.1)});
    data.responses.push_back(label);
  }
  return data;
}

double predictor_at(const LossOracle& oracle, std::span<const double> x, const Samples& samples,
                    const RobustnessParams& params, PredictorKind kind) {
  return evaluate_predictor(oracle, x, samples, params, kind).value;
}

}  // namespace

TEST_CASE("saa fit recovers exactly linear data") {
  Rng rng(51);
  const auto data = linear_data(rng, 30, {1.5, -0.5});
  const auto oracle = l1_regression_oracle(data, 0, 0);
  const auto res = fit(*oracle, data.samples(), {}, PredictorKind::kSaa);
  CHECK(res.value <= 1e-3);
  CHECK(res.value <= res.trajectory.front());
  CHECK(res.initial_decision == std::vector<double>{0, 0});
}

TEST_CASE("lp fit with zero budget reproduces the saa trajectory") {
  Rng rng(52);
  const auto data = linear_data(rng, 20, {1, 2, -1});
  LabeledData noisy = data;
  for (auto& y : noisy.responses) y += rng.normal() * 0.1;
  const auto oracle = l1_regression_oracle(noisy, 0, 0);
  const SubgradientConfig cfg{.max_iters = 300};
  const auto a = fit(*oracle, noisy.samples(), {}, PredictorKind::kSaa, cfg);
  const auto b = fit(*oracle, noisy.samples(), {}, PredictorKind::kLp, cfg);
  CHECK(a.trajectory == b.trajectory);
  CHECK(a.decision == b.decision);
}

TEST_CASE("fit reports a value consistent with a fresh evaluation") {
  Rng rng(53);
  const auto data = narrow_separable(rng, 20);
  const auto oracle = hinge_oracle(data, 0.05, 0.1);
  const RobustnessParams params{0.05, 0.1, 0.1, 0.05};
  const auto res = fit(*oracle, data.samples(), params, PredictorKind::kHr);
  const double fresh = predictor_at(*oracle, res.decision, data.samples(), params,
                                    PredictorKind::kHr);
  CHECK(std::abs(fresh - res.value) <= 1e-6);
  CHECK(res.value <= res.trajectory.front() + 1e-12);
  const auto j = to_json(res);
  CHECK(j.contains("trajectory"));
  CHECK(j.contains("worst_case"));
}

TEST_CASE("hr fit without misspecification matches the soft-margin objective") {
  Rng rng(54);
  const auto data = narrow_separable(rng, 30);
  const double eps = 0.08;
  const auto oracle = hinge_oracle(data, eps, eps);
  const RobustnessParams params{eps, eps, 0, 0};
  const auto hr_fit = fit(*oracle, data.samples(), params, PredictorKind::kHr);
  const auto soft = softmargin_fit(data, eps);

  // Soft-margin objective evaluated independently at the hr decision.
  const auto& x = hr_fit.decision;
  double hinge_mean = 0.0;
  bool inactive = true;
  for (std::size_t t = 0; t < data.size(); ++t) {
    const double score = x[0] * data.covariates[t][0] + x[1] * data.covariates[t][1] - x[2];
    const double arg = 1 - data.responses[t] * score;
    inactive = inactive && arg + eps * std::hypot(x[0], x[1]) >= 0.0;
    hinge_mean += std::max(arg, 0.0) / static_cast<double>(data.size());
  }
  REQUIRE(inactive);
  CHECK(hr_fit.value == doctest::Approx(hinge_mean + eps * std::hypot(x[0], x[1])).epsilon(1e-9));
  CHECK(std::abs(hr_fit.value - soft.value) <= 1e-3);
}

TEST_CASE("baseline fits") {
  Rng rng(55);
  LabeledData reg = linear_data(rng, 25, {0.7, -1.2});
  for (auto& y : reg.responses) y += rng.normal() * 0.3;
  const auto l1 = l1_regression_oracle(reg, 0, 0);
  const auto erm = erm_fit(*l1, reg.samples());
  CHECK(std::abs(ridge_fit(reg, 0.0).value - erm.value) <= 1e-6);

  const double eps = 0.2;
  const auto ridge = ridge_fit(reg, eps);
  const auto ridge_objective = [&](const std::vector<double>& th) {
    double s = 0.0;
    for (std::size_t t = 0; t < reg.size(); ++t) {
      s += std::abs(th[0] * reg.covariates[t][0] + th[1] * reg.covariates[t][1] -
                    reg.responses[t]);
    }
    return s / static_cast<double>(reg.size()) + eps * std::hypot(th[0], th[1]);
  };
  CHECK(ridge.value == doctest::Approx(ridge_objective(ridge.decision)).epsilon(1e-12));
  CHECK(ridge.value <= ridge_objective(erm.decision) + 1e-6);

  const auto cls = narrow_separable(rng, 20);
  const auto hinge = hinge_oracle(cls, 0, 0);
  CHECK(std::abs(softmargin_fit(cls, 0.0).value - erm_fit(*hinge, cls.samples()).value) <= 1e-6);
  CHECK_THROWS_AS(ridge_fit(reg, -1.0), InvalidArgument);
}

TEST_CASE("newsvendor fit with projection stays in the box") {
  const auto oracle = newsvendor_oracle(2, 1, 0, 6, 0.1, 0.2);
  const Samples demand{{1}, {2}, {2}, {5}, {3}};
  SubgradientConfig cfg;
  cfg.projection = box_projection(0.0, 6.0);
  const auto res = fit(*oracle, demand, {0.1, 0.2, 0.2, 0.1}, PredictorKind::kHd, cfg);
  CHECK(res.decision[0] >= 0.0);
  CHECK(res.decision[0] <= 6.0);
  CHECK(res.initial_decision[0] == doctest::Approx(2.6));
}

TEST_CASE("property: Danskin subgradient matches finite differences away from kinks") {
  Rng rng(56);
  LabeledData reg = linear_data(rng, 12, {1, -1});
  for (auto& y : reg.responses) y += rng.normal();
  const auto cls = narrow_separable(rng, 12);
  const auto l1 = l1_regression_oracle(reg, 0.1, 0.2);
  const auto hinge = hinge_oracle(cls, 0.1, 0.2);
  const auto nv = newsvendor_oracle(2, 1, 0, 6, 0.1, 0.2);
  Samples demand;
  for (int i = 0; i < 12; ++i) demand.push_back({rng.uniform(0, 6)});
  const RobustnessParams params{0.1, 0.2, 0.15, 0.1};
  struct Case {
    const LossOracle* oracle;
    Samples samples;
  };
  const std::vector<Case> cases{{l1.get(), reg.samples()}, {hinge.get(), cls.samples()},
                                {nv.get(), demand}};
  const double h = 1e-5;
  for (PredictorKind kind : {PredictorKind::kHr, PredictorKind::kHd, PredictorKind::kLp,
                             PredictorKind::kKl}) {
    for (const auto& c : cases) {
      int smooth = 0;
      for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> x(c.oracle->decision_dim());
        for (double& v : x) v = c.oracle == nv.get() ? rng.uniform(0.5, 5.5) : rng.normal();
        const LossProfile profile = build_profile(*c.oracle, x, c.samples);
        const auto sol = predictor_family(profile, params, kind);
        const auto g = danskin_subgradient(*c.oracle, x, c.samples, profile, sol);
        bool kink = false;
        std::vector<double> fd(x.size());
        for (std::size_t i = 0; i < x.size() && !kink; ++i) {
          auto xp = x, xm = x;
          xp[i] += h;
          xm[i] -= h;
          const double up = predictor_at(*c.oracle, xp, c.samples, params, kind);
          const double down = predictor_at(*c.oracle, xm, c.samples, params, kind);
          const double forward = (up - sol.value) / h;
          const double backward = (sol.value - down) / h;
          // One-sided slopes that disagree mark a kink within the probe.
          if (std::abs(forward - backward) > 1e-4 * std::max(1.0, std::abs(forward))) kink = true;
          fd[i] = (up - down) / (2 * h);
        }
        if (kink) continue;
        ++smooth;
        for (std::size_t i = 0; i < x.size(); ++i) {
          CHECK(std::abs(fd[i] - g[i]) <= 1e-4 * std::max(1.0, std::abs(g[i])));
        }
      }
      CHECK(smooth >= 25);
    }
  }
}

TEST_CASE("property: predictors are convex in the decision") {
  Rng rng(57);
  LabeledData reg = linear_data(rng, 10, {1, -1});
  for (auto& y : reg.responses) y += rng.normal();
  const auto l1 = l1_regression_oracle(reg, 0.1, 0.2);
  const RobustnessParams params{0.1, 0.2, 0.2, 0.3};
  for (PredictorKind kind : {PredictorKind::kHr, PredictorKind::kHd, PredictorKind::kLp,
                             PredictorKind::kKl, PredictorKind::kWinf}) {
    for (int trial = 0; trial < 30; ++trial) {
      const std::vector<double> x1{rng.normal(), rng.normal()}, x2{rng.normal(), rng.normal()};
      const double t = rng.uniform();
      const std::vector<double> mid{t * x1[0] + (1 - t) * x2[0], t * x1[1] + (1 - t) * x2[1]};
      const double lhs = predictor_at(*l1, mid, reg.samples(), params, kind);
      const double rhs = t * predictor_at(*l1, x1, reg.samples(), params, kind) +
                         (1 - t) * predictor_at(*l1, x2, reg.samples(), params, kind);
      CHECK(lhs <= rhs + 1e-9);
    }
  }
}
