#include "holistic/losses.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>

#include "holistic/csv.hpp"

namespace holistic {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> v) { return std::sqrt(dot(v, v)); }

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

void check_radii(double epsilon, double epsilon_prime) {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw InvalidArgument("epsilon must be >= 0");
  if (!(epsilon_prime >= epsilon) || !std::isfinite(epsilon_prime)) {
    throw InvalidArgument("epsilon_prime must be >= epsilon");
  }
}

// Adds scale * theta / ||theta|| to out[0..d); zero at theta = 0.
void add_norm_subgrad(std::span<const double> theta, double scale, std::span<double> out) {
  const double n = norm2(theta);
  if (n == 0.0 || scale == 0.0) return;
  for (std::size_t i = 0; i < theta.size(); ++i) out[i] += scale * theta[i] / n;
}

class SupervisedOracle : public LossOracle {
 public:
  SupervisedOracle(const LabeledData& data, double epsilon, double epsilon_prime)
      : data_(data), epsilon_(epsilon), epsilon_prime_(epsilon_prime) {
    data_.validate();
    check_radii(epsilon, epsilon_prime);
    if (data_.size() == 0) throw InvalidArgument("dataset is empty");
  }

 protected:
  std::size_t dim() const { return data_.dim(); }

  void check(std::span<const double> x, std::size_t expected) const {
    if (x.size() != expected) throw InvalidArgument("decision has wrong dimension");
  }
  void check_sample(std::span<const double> sample) const {
    if (sample.size() != dim() + 1) throw InvalidArgument("sample has wrong dimension");
  }

  LabeledData data_;
  double epsilon_;
  double epsilon_prime_;
};

class L1RegressionOracle final : public SupervisedOracle {
 public:
  using SupervisedOracle::SupervisedOracle;

  std::size_t decision_dim() const override { return dim(); }

  double evaluate(std::span<const double> x, std::span<const double> s) const override {
    check(x, dim());
    check_sample(s);
    return std::abs(residual(x, s));
  }

  double evaluate_inflated(std::span<const double> x, std::span<const double> s) const override {
    return evaluate(x, s) + epsilon_ * norm2(x);
  }

  double worst_case(std::span<const double> x) const override {
    check(x, dim());
    return std::abs(residual(x, row(worst_index(x)))) + epsilon_prime_ * norm2(x);
  }

  void subgrad(std::span<const double> x, std::span<const double> s,
               std::span<double> out) const override {
    check(x, dim());
    check_sample(s);
    const double sg = sign(residual(x, s));
    for (std::size_t i = 0; i < dim(); ++i) out[i] = sg * s[i];
  }

  void subgrad_inflated(std::span<const double> x, std::span<const double> s,
                        std::span<double> out) const override {
    subgrad(x, s, out);
    add_norm_subgrad(x, epsilon_, out);
  }

  void subgrad_worst(std::span<const double> x, std::span<double> out) const override {
    check(x, dim());
    const Sample s = row(worst_index(x));
    subgrad(x, s, out);
    add_norm_subgrad(x, epsilon_prime_, out);
  }

 private:
  Sample row(std::size_t t) const {
    Sample s = data_.covariates[t];
    s.push_back(data_.responses[t]);
    return s;
  }

  double residual(std::span<const double> x, std::span<const double> s) const {
    return dot(x, s.first(dim())) - s[dim()];
  }

  std::size_t worst_index(std::span<const double> x) const {
    std::size_t best = 0;
    double best_value = -1.0;
    for (std::size_t t = 0; t < data_.size(); ++t) {
      const double v = std::abs(dot(x, data_.covariates[t]) - data_.responses[t]);
      if (v > best_value) {
        best_value = v;
        best = t;
      }
    }
    return best;
  }
};

class HingeOracle final : public SupervisedOracle {
 public:
  HingeOracle(const LabeledData& data, double epsilon, double epsilon_prime)
      : SupervisedOracle(data, epsilon, epsilon_prime) {
    data_.validate_labels();
  }

  std::size_t decision_dim() const override { return dim() + 1; }

  double evaluate(std::span<const double> x, std::span<const double> s) const override {
    check(x, dim() + 1);
    check_sample(s);
    return std::max(1.0 - margin(x, s), 0.0);
  }

  double evaluate_inflated(std::span<const double> x, std::span<const double> s) const override {
    check(x, dim() + 1);
    check_sample(s);
    return std::max(1.0 - margin(x, s) + epsilon_ * norm2(theta(x)), 0.0);
  }

  double worst_case(std::span<const double> x) const override {
    check(x, dim() + 1);
    const std::size_t t = worst_index(x);
    return std::max(1.0 - margin(x, row(t)) + epsilon_prime_ * norm2(theta(x)), 0.0);
  }

  void subgrad(std::span<const double> x, std::span<const double> s,
               std::span<double> out) const override {
    check(x, dim() + 1);
    check_sample(s);
    std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(dim() + 1), 0.0);
    if (1.0 - margin(x, s) > 0.0) margin_subgrad(s, out);
  }

  void subgrad_inflated(std::span<const double> x, std::span<const double> s,
                        std::span<double> out) const override {
    check(x, dim() + 1);
    check_sample(s);
    std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(dim() + 1), 0.0);
    if (1.0 - margin(x, s) + epsilon_ * norm2(theta(x)) > 0.0) {
      margin_subgrad(s, out);
      add_norm_subgrad(theta(x), epsilon_, out);
    }
  }

  void subgrad_worst(std::span<const double> x, std::span<double> out) const override {
    check(x, dim() + 1);
    const Sample s = row(worst_index(x));
    std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(dim() + 1), 0.0);
    if (1.0 - margin(x, s) + epsilon_prime_ * norm2(theta(x)) > 0.0) {
      margin_subgrad(s, out);
      add_norm_subgrad(theta(x), epsilon_prime_, out);
    }
  }

 private:
  std::span<const double> theta(std::span<const double> x) const { return x.first(dim()); }

  Sample row(std::size_t t) const {
    Sample s = data_.covariates[t];
    s.push_back(data_.responses[t]);
    return s;
  }

  // Y * (theta.X - b)
  double margin(std::span<const double> x, std::span<const double> s) const {
    return s[dim()] * (dot(theta(x), s.first(dim())) - x[dim()]);
  }

  // Subgradient of 1 - Y(theta.X - b) with respect to (theta, b).
  void margin_subgrad(std::span<const double> s, std::span<double> out) const {
    const double y = s[dim()];
    for (std::size_t i = 0; i < dim(); ++i) out[i] = -y * s[i];
    out[dim()] = y;
  }

  std::size_t worst_index(std::span<const double> x) const {
    std::size_t best = 0;
    double best_margin = 0.0;
    for (std::size_t t = 0; t < data_.size(); ++t) {
      const double m =
          data_.responses[t] * (dot(theta(x), data_.covariates[t]) - x[dim()]);
      if (t == 0 || m < best_margin) {
        best_margin = m;
        best = t;
      }
    }
    return best;
  }
};

class NewsvendorOracle final : public LossOracle {
 public:
  NewsvendorOracle(double b_cost, double h_cost, double lo, double hi, double epsilon,
                   double epsilon_prime)
      : b_(b_cost), h_(h_cost), lo_(lo - epsilon_prime), hi_(hi + epsilon_prime),
        epsilon_(epsilon) {
    if (!(b_cost > 0.0) || !(h_cost > 0.0)) {
      throw InvalidArgument("newsvendor costs must be positive");
    }
    if (!(lo <= hi)) throw InvalidArgument("demand support must satisfy lo <= hi");
    check_radii(epsilon, epsilon_prime);
  }

  std::size_t decision_dim() const override { return 1; }

  double evaluate(std::span<const double> x, std::span<const double> s) const override {
    check(x, s);
    return cost(x[0], s[0]);
  }

  double evaluate_inflated(std::span<const double> x, std::span<const double> s) const override {
    check(x, s);
    const auto [d1, d2] = noisy_endpoints(s[0]);
    return std::max(cost(x[0], d1), cost(x[0], d2));
  }

  double worst_case(std::span<const double> x) const override {
    if (x.size() != 1) throw InvalidArgument("newsvendor decision is a scalar");
    return std::max(cost(x[0], lo_), cost(x[0], hi_));
  }

  void subgrad(std::span<const double> x, std::span<const double> s,
               std::span<double> out) const override {
    check(x, s);
    out[0] = cost_subgrad(x[0], s[0]);
  }

  void subgrad_inflated(std::span<const double> x, std::span<const double> s,
                        std::span<double> out) const override {
    check(x, s);
    const auto [d1, d2] = noisy_endpoints(s[0]);
    out[0] = cost(x[0], d1) >= cost(x[0], d2) ? cost_subgrad(x[0], d1) : cost_subgrad(x[0], d2);
  }

  void subgrad_worst(std::span<const double> x, std::span<double> out) const override {
    if (x.size() != 1) throw InvalidArgument("newsvendor decision is a scalar");
    out[0] = cost(x[0], lo_) >= cost(x[0], hi_) ? cost_subgrad(x[0], lo_)
                                                  : cost_subgrad(x[0], hi_);
  }

  std::vector<double> initial_decision(const Samples& samples) const override {
    double total = 0.0;
    for (const auto& s : samples) total += s.at(0);
    return {samples.empty() ? 0.0 : total / static_cast<double>(samples.size())};
  }

 private:
  static void check(std::span<const double> x, std::span<const double> s) {
    if (x.size() != 1 || s.size() != 1) throw InvalidArgument("newsvendor expects scalars");
  }

  double cost(double x, double d) const {
    return b_ * std::max(d - x, 0.0) + h_ * std::max(x - d, 0.0);
  }

  double cost_subgrad(double x, double d) const {
    if (d > x) return -b_;
    if (x > d) return h_;
    return 0.0;
  }

  // The cost is piecewise linear in the demand, so its maximum over the
  // noise interval (clipped to the event set) sits at an endpoint.
  std::pair<double, double> noisy_endpoints(double d) const {
    return {std::max(d - epsilon_, lo_), std::min(d + epsilon_, hi_)};
  }

  double b_;
  double h_;
  double lo_;
  double hi_;
  double epsilon_;
};

}  // namespace

std::vector<double> LossOracle::initial_decision(const Samples&) const {
  return std::vector<double>(decision_dim(), 0.0);
}

Samples LabeledData::samples() const {
  Samples out;
  out.reserve(size());
  for (std::size_t t = 0; t < size(); ++t) {
    Sample s = covariates[t];
    s.push_back(responses[t]);
    out.push_back(std::move(s));
  }
  return out;
}

LabeledData LabeledData::from_samples(const Samples& samples) {
  LabeledData data;
  for (const auto& s : samples) {
    if (s.size() < 2) throw InvalidArgument("labeled sample needs covariates and a response");
    data.covariates.emplace_back(s.begin(), s.end() - 1);
    data.responses.push_back(s.back());
  }
  data.validate();
  return data;
}

void LabeledData::validate() const {
  if (covariates.size() != responses.size()) {
    throw InvalidArgument("covariates and responses differ in length");
  }
  for (const auto& x : covariates) {
    if (x.size() != dim()) throw InvalidArgument("covariate rows differ in dimension");
    for (double v : x) {
      if (!std::isfinite(v)) throw InvalidArgument("covariates must be finite");
    }
  }
  for (double y : responses) {
    if (!std::isfinite(y)) throw InvalidArgument("responses must be finite");
  }
}

void LabeledData::validate_labels() const {
  validate();
  for (double y : responses) {
    if (y != 1.0 && y != -1.0) throw InvalidArgument("labels must be -1 or +1");
  }
}

std::unique_ptr<LossOracle> l1_regression_oracle(const LabeledData& data, double epsilon,
                                                 double epsilon_prime) {
  return std::make_unique<L1RegressionOracle>(data, epsilon, epsilon_prime);
}

std::unique_ptr<LossOracle> hinge_oracle(const LabeledData& data, double epsilon,
                                         double epsilon_prime) {
  return std::make_unique<HingeOracle>(data, epsilon, epsilon_prime);
}

std::unique_ptr<LossOracle> newsvendor_oracle(double b_cost, double h_cost, double demand_lo,
                                              double demand_hi, double epsilon,
                                              double epsilon_prime) {
  return std::make_unique<NewsvendorOracle>(b_cost, h_cost, demand_lo, demand_hi, epsilon,
                                            epsilon_prime);
}

LossProfile build_profile(const LossOracle& oracle, std::span<const double> x,
                          const Samples& samples) {
  if (samples.empty()) throw InvalidArgument("cannot build a profile from zero samples");
  std::map<Sample, std::size_t> slot_of;
  std::vector<std::size_t> atoms;
  std::vector<double> counts;
  for (std::size_t t = 0; t < samples.size(); ++t) {
    const auto [it, inserted] = slot_of.emplace(samples[t], atoms.size());
    if (inserted) {
      atoms.push_back(t);
      counts.push_back(0.0);
    }
    counts[it->second] += 1.0;
  }
  const double total = static_cast<double>(samples.size());
  std::vector<double> weights, base, inflated;
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    weights.push_back(counts[k] / total);
    base.push_back(oracle.evaluate(x, samples[atoms[k]]));
    inflated.push_back(oracle.evaluate_inflated(x, samples[atoms[k]]));
  }
  return {std::move(inflated), std::move(base), std::move(weights), oracle.worst_case(x),
          std::move(atoms)};
}

Samples read_samples_csv(std::istream& in) {
  const csv::Table table = csv::read(in);
  Samples samples;
  samples.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    Sample s;
    s.reserve(row.size());
    for (const auto& field : row) s.push_back(csv::parse_number(field));
    samples.push_back(std::move(s));
  }
  if (samples.empty()) throw csv::ParseError("dataset has no rows");
  return samples;
}

}  // namespace holistic
