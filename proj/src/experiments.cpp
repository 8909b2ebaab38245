#include "holistic/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <ostream>
#include <thread>

namespace holistic {

namespace {

// Uniform point in the Euclidean ball of the given radius.
std::vector<double> uniform_ball(Rng& rng, std::size_t dim, double radius) {
  std::vector<double> v(dim);
  if (dim == 1) {
    v[0] = rng.uniform(-radius, radius);
    return v;
  }
  double norm = 0.0;
  while (norm == 0.0) {
    norm = 0.0;
    for (double& x : v) {
      x = rng.normal();
      norm += x * x;
    }
    norm = std::sqrt(norm);
  }
  const double scale = radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(dim)) / norm;
  for (double& x : v) x *= scale;
  return v;
}

}  // namespace

LabeledData gen_two_rectangles(std::size_t n_per_class, std::uint64_t seed) {
  if (n_per_class == 0) throw InvalidArgument("need at least one point per class");
  Rng rng(seed);
  LabeledData data;
  const auto [cx, cy] = kRectangleCenter;
  const auto [sx, sy] = kRectangleSides;
  for (std::size_t i = 0; i < n_per_class; ++i) {
    data.covariates.push_back(
        {rng.uniform(cx - sx / 2, cx + sx / 2), rng.uniform(cy - sy / 2, cy + sy / 2)});
    data.responses.push_back(-1.0);
  }
  for (std::size_t i = 0; i < n_per_class; ++i) {
    // Mirror image of the class -1 rectangle: coordinates swapped.
    const double a = rng.uniform(cx - sx / 2, cx + sx / 2);
    const double b = rng.uniform(cy - sy / 2, cy + sy / 2);
    data.covariates.push_back({b, a});
    data.responses.push_back(1.0);
  }
  return data;
}

LabeledData gaussianize(const LabeledData& data, std::uint64_t seed) {
  data.validate_labels();
  if (data.dim() != 2) throw InvalidArgument("gaussianize expects two covariates");
  Rng rng(seed);
  LabeledData out = data;
  const auto [cx, cy] = kRectangleCenter;
  const auto [sx, sy] = kRectangleSides;
  const double sd_x = sx / std::sqrt(12.0);
  const double sd_y = sy / std::sqrt(12.0);
  for (std::size_t t = 0; t < out.size(); ++t) {
    const double u = cx + sd_x * rng.normal();
    const double v = cy + sd_y * rng.normal();
    if (out.responses[t] < 0.0) {
      out.covariates[t] = {u, v};
    } else {
      out.covariates[t] = {v, u};
    }
  }
  return out;
}

LabeledData misspecify_closest(const LabeledData& data, double fraction,
                               std::array<double, 2> center) {
  data.validate_labels();
  if (data.dim() != 2) throw InvalidArgument("misspecify_closest expects two covariates");
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw InvalidArgument("fraction must lie in [0, 1]");
  std::vector<std::size_t> negatives;
  for (std::size_t t = 0; t < data.size(); ++t) {
    if (data.responses[t] < 0.0) negatives.push_back(t);
  }
  // Guard the ceiling against representation error (0.15 * 20 = 3.0000000000000004).
  const auto count = static_cast<std::size_t>(
      std::ceil(fraction * static_cast<double>(negatives.size()) - 1e-9));
  auto distance = [&](std::size_t t) {
    return std::abs(data.covariates[t][1] - data.covariates[t][0]) / std::sqrt(2.0);
  };
  std::stable_sort(negatives.begin(), negatives.end(),
                   [&](std::size_t a, std::size_t b) { return distance(a) < distance(b); });
  LabeledData out = data;
  for (std::size_t i = 0; i < std::min(count, negatives.size()); ++i) {
    out.covariates[negatives[i]] = {center[0], center[1]};
  }
  return out;
}

Samples corrupt(const Samples& samples, const CorruptionSpec& spec, const LossOracle* oracle,
                std::span<const double> reference) {
  if (!(spec.alpha_true >= 0.0 && spec.alpha_true <= 1.0)) {
    throw InvalidArgument("alpha_true must lie in [0, 1]");
  }
  if (!(spec.epsilon_true >= 0.0)) throw InvalidArgument("epsilon_true must be >= 0");
  if (spec.alpha_true == 0.0 && spec.epsilon_true == 0.0) return samples;
  if (samples.empty()) return samples;
  const std::size_t width = samples.front().size();
  const std::size_t noise_dims =
      spec.noise_dims > 0 ? spec.noise_dims : (width > 1 ? width - 1 : width);
  if (noise_dims > width) throw InvalidArgument("noise_dims exceeds the sample width");
  if (spec.alpha_true > 0.0 && spec.replacement.size() != width) {
    throw InvalidArgument("replacement point has the wrong width");
  }

  Rng rng(spec.seed);
  Samples out = samples;
  auto perturb = [&](Sample& s) {
    if (spec.epsilon_true == 0.0) return;
    const auto n = uniform_ball(rng, noise_dims, spec.epsilon_true);
    for (std::size_t i = 0; i < noise_dims; ++i) s[i] += n[i];
  };

  if (spec.mode == CorruptionMode::kRandom) {
    for (auto& s : out) {
      if (rng.bernoulli(spec.alpha_true)) {
        s = spec.replacement;
      } else {
        perturb(s);
      }
    }
    return out;
  }

  for (auto& s : out) perturb(s);
  const auto count = static_cast<std::size_t>(
      std::floor(spec.alpha_true * static_cast<double>(out.size()) + 1e-9));
  if (count == 0) return out;
  if (oracle == nullptr || reference.empty()) {
    throw InvalidArgument("deterministic corruption needs a loss oracle and reference decision");
  }
  std::vector<double> loss(out.size());
  for (std::size_t t = 0; t < out.size(); ++t) {
    loss[t] = oracle->evaluate_inflated(reference, out[t]);
  }
  std::vector<std::size_t> order(out.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return loss[a] < loss[b]; });
  for (std::size_t i = 0; i < count; ++i) out[order[i]] = spec.replacement;
  return out;
}

Sample GroundTruth::draw(Rng& rng) const {
  const double u = rng.uniform();
  double cumulative = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    cumulative += probabilities[i];
    if (u < cumulative) return atoms[i];
  }
  return atoms.back();
}

double GroundTruth::expected_loss(const LossOracle& oracle, std::span<const double> x) const {
  double total = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    total += probabilities[i] * oracle.evaluate(x, atoms[i]);
  }
  return total;
}

double TrialReport::allowed_rate() const {
  const double n = static_cast<double>(std::max<std::size_t>(trials.size(), 1));
  return bound + 3.0 * std::sqrt(bound / n) + 0.05;
}

TrialReport disappointment_rate(const DisappointmentSetup& setup, PredictorKind kind,
                                const RobustnessParams& params) {
  if (setup.oracle == nullptr) throw InvalidArgument("disappointment_rate needs a loss oracle");
  if (setup.truth.atoms.empty() || setup.truth.atoms.size() != setup.truth.probabilities.size()) {
    throw InvalidArgument("ground truth atoms and probabilities differ in length");
  }
  normalized_weights(setup.truth.probabilities);
  if (setup.sample_size == 0 || setup.trials == 0) {
    throw InvalidArgument("sample size and trial count must be positive");
  }
  params.validate();
  const LossOracle& oracle = *setup.oracle;
  const double truth = setup.truth.expected_loss(oracle, setup.decision);

  TrialReport report;
  report.trials.resize(setup.trials);
  auto run_trial = [&](std::size_t t) {
    Rng rng(derive_seed(setup.seed, t));
    Samples drawn;
    drawn.reserve(setup.sample_size);
    for (std::size_t i = 0; i < setup.sample_size; ++i) drawn.push_back(setup.truth.draw(rng));
    CorruptionSpec spec = setup.corruption;
    spec.seed = rng.bits();
    drawn = corrupt(drawn, spec, &oracle, setup.decision);
    const double value =
        predictor_family(build_profile(oracle, setup.decision, drawn), params, kind,
                         setup.svp_penalty)
            .value;
    report.trials[t] = {t, value, truth, truth > value};
  };

  unsigned threads = setup.threads > 0 ? setup.threads : std::thread::hardware_concurrency();
  threads = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(setup.trials)));
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t t = w; t < setup.trials; t += threads) run_trial(t);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::size_t disappointed = 0;
  for (const auto& rec : report.trials) disappointed += rec.disappointed ? 1 : 0;
  report.rate = static_cast<double>(disappointed) / static_cast<double>(setup.trials);
  report.bound = std::exp(-params.r * static_cast<double>(setup.sample_size));
  return report;
}

void write_csv(std::ostream& out, const TrialReport& report) {
  out << "trial,value,truth,disappointed\n";
  for (const auto& rec : report.trials) {
    out << rec.trial << ',' << format_double(rec.value) << ',' << format_double(rec.truth) << ','
        << (rec.disappointed ? 1 : 0) << '\n';
  }
}

nlohmann::json summary_json(const TrialReport& report) {
  return {{"trials", report.trials.size()},
          {"rate", report.rate},
          {"bound", report.bound},
          {"allowed_rate", report.allowed_rate()}};
}

}  // namespace holistic
