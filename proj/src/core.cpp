#include "holistic/core.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "holistic/csv.hpp"

namespace holistic {

namespace {

// Mass comparisons in the quantile walk tolerate accumulated rounding.
constexpr double kMassSlack = 1e-12;

void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidArgument(message);
}

}  // namespace

std::vector<double> normalized_weights(std::span<const double> weights) {
  require(!weights.empty(), "distribution needs at least one atom");
  double total = 0.0;
  for (double w : weights) {
    require(std::isfinite(w) && w >= 0.0, "weights must be finite and nonnegative");
    total += w;
  }
  require(std::abs(total - 1.0) <= kWeightSumTolerance,
          "weights must sum to one (got " + format_double(total) + ")");
  std::vector<double> out(weights.begin(), weights.end());
  for (double& w : out) w /= total;
  return out;
}

DiscreteDistribution::DiscreteDistribution(std::vector<std::size_t> atoms,
                                           std::vector<double> weights)
    : atoms_(std::move(atoms)), weights_(normalized_weights(weights)) {
  require(atoms_.size() == weights_.size(), "atoms and weights differ in length");
}

DiscreteDistribution DiscreteDistribution::uniform(std::size_t n) {
  require(n > 0, "distribution needs at least one atom");
  std::vector<std::size_t> atoms(n);
  std::iota(atoms.begin(), atoms.end(), std::size_t{0});
  return {std::move(atoms), std::vector<double>(n, 1.0 / static_cast<double>(n))};
}

LossProfile::LossProfile(std::vector<double> inflated_losses, std::vector<double> base_losses,
                         std::vector<double> weights, double worst_case,
                         std::vector<std::size_t> atoms)
    : inflated_(std::move(inflated_losses)),
      base_(std::move(base_losses)),
      weights_(normalized_weights(weights)),
      atoms_(std::move(atoms)),
      worst_case_(worst_case) {
  const std::size_t k = inflated_.size();
  require(base_.size() == k && weights_.size() == k, "loss profile columns differ in length");
  if (atoms_.empty()) {
    atoms_.resize(k);
    std::iota(atoms_.begin(), atoms_.end(), std::size_t{0});
  }
  require(atoms_.size() == k, "loss profile atom ids differ in length");
  require(std::isfinite(worst_case_), "worst-case loss must be finite");
  // Relative slack absorbs rounding in the loss oracles.
  const double slack = 1e-12 * (1.0 + std::abs(worst_case_));
  for (std::size_t i = 0; i < k; ++i) {
    require(std::isfinite(inflated_[i]) && std::isfinite(base_[i]), "losses must be finite");
    require(base_[i] <= inflated_[i] + slack, "base loss exceeds inflated loss at atom " +
                                                  std::to_string(i));
    require(inflated_[i] <= worst_case_ + slack,
            "inflated loss exceeds worst case at atom " + std::to_string(i));
    inflated_[i] = std::min(inflated_[i], worst_case_);
    base_[i] = std::min(base_[i], inflated_[i]);
  }
}

LossProfile LossProfile::from_losses(std::vector<double> losses, std::vector<double> weights,
                                     double worst_case) {
  std::vector<double> base = losses;
  return {std::move(losses), std::move(base), std::move(weights), worst_case};
}

std::vector<std::size_t> LossProfile::sorted_support() const {
  std::vector<std::size_t> idx;
  idx.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) {
    if (weights_[i] > 0.0) idx.push_back(i);
  }
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return inflated_[a] < inflated_[b]; });
  return idx;
}

double LossProfile::min_inflated() const {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < size(); ++i) {
    if (weights_[i] > 0.0) m = std::min(m, inflated_[i]);
  }
  return m;
}

void RobustnessParams::validate() const {
  require(std::isfinite(epsilon) && epsilon >= 0.0, "epsilon must be >= 0");
  require(std::isfinite(epsilon_prime) && epsilon_prime >= epsilon,
          "epsilon_prime must be >= epsilon");
  require(alpha >= 0.0 && alpha <= 1.0, "alpha must lie in [0, 1]");
  require(std::isfinite(r) && r >= 0.0, "r must be >= 0");
}

double quantile(const LossProfile& profile, double alpha) {
  require(alpha >= 0.0 && alpha <= 1.0, "quantile level must lie in [0, 1]");
  const auto order = profile.sorted_support();
  const auto& c = profile.inflated_losses();
  const auto& p = profile.weights();
  double cumulative = 0.0;
  for (std::size_t i : order) {
    cumulative += p[i];
    if (cumulative >= alpha - kMassSlack) return c[i];
  }
  return c[order.back()];
}

double scaled_cvar(const LossProfile& profile, double alpha) {
  require(alpha >= 0.0 && alpha <= 1.0, "CVaR level must lie in [0, 1]");
  const double tau = quantile(profile, alpha);
  const auto& c = profile.inflated_losses();
  const auto& p = profile.weights();
  double above = 0.0;
  double mass_below = 0.0;
  for (std::size_t i = 0; i < profile.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (c[i] > tau) {
      above += p[i] * c[i];
    } else {
      mass_below += p[i];
    }
  }
  return above + tau * (mass_below - alpha);
}

double scaled_cvar_minimization(const LossProfile& profile, double alpha) {
  require(alpha >= 0.0 && alpha <= 1.0, "CVaR level must lie in [0, 1]");
  const auto& c = profile.inflated_losses();
  const auto& p = profile.weights();
  // Piecewise linear and convex in beta: the minimum sits on a breakpoint.
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < profile.size(); ++j) {
    if (p[j] <= 0.0) continue;
    const double beta = c[j];
    double value = beta * (1.0 - alpha);
    for (std::size_t i = 0; i < profile.size(); ++i) {
      value += p[i] * std::max(c[i] - beta, 0.0);
    }
    best = std::min(best, value);
  }
  return best;
}

double mean(const LossProfile& profile, LossColumn column) {
  const auto& c = column == LossColumn::kBase ? profile.base_losses() : profile.inflated_losses();
  const auto& p = profile.weights();
  double m = 0.0;
  for (std::size_t i = 0; i < profile.size(); ++i) {
    if (p[i] > 0.0) m += p[i] * c[i];
  }
  return m;
}

double variance(const LossProfile& profile, LossColumn column) {
  const auto& c = column == LossColumn::kBase ? profile.base_losses() : profile.inflated_losses();
  const auto& p = profile.weights();
  const double m = mean(profile, column);
  double v = 0.0;
  for (std::size_t i = 0; i < profile.size(); ++i) {
    if (p[i] > 0.0) v += p[i] * (c[i] - m) * (c[i] - m);
  }
  return v;
}

std::string format_double(double value) {
  std::ostringstream os;
  os.precision(17);
  os << value;
  return os.str();
}

void write_csv(std::ostream& out, const LossProfile& profile) {
  out << "atom_id,weight,base_loss,inflated_loss\n";
  for (std::size_t i = 0; i < profile.size(); ++i) {
    out << profile.atoms()[i] << ',' << format_double(profile.weights()[i]) << ','
        << format_double(profile.base_losses()[i]) << ','
        << format_double(profile.inflated_losses()[i]) << '\n';
  }
}

LossProfile read_profile_csv(std::istream& in, const double* worst_case) {
  const csv::Table table = csv::read(in);
  const std::size_t id_col = table.column("atom_id");
  const std::size_t w_col = table.column("weight");
  const std::size_t base_col = table.column("base_loss");
  const std::size_t infl_col = table.column("inflated_loss");
  std::vector<std::size_t> atoms;
  std::vector<double> weights, base, inflated;
  for (const auto& row : table.rows) {
    atoms.push_back(static_cast<std::size_t>(csv::parse_number(row[id_col])));
    weights.push_back(csv::parse_number(row[w_col]));
    base.push_back(csv::parse_number(row[base_col]));
    inflated.push_back(csv::parse_number(row[infl_col]));
  }
  if (inflated.empty()) throw csv::ParseError("loss profile CSV has no rows");
  const double wc =
      worst_case != nullptr ? *worst_case : *std::max_element(inflated.begin(), inflated.end());
  return {std::move(inflated), std::move(base), std::move(weights), wc, std::move(atoms)};
}

void write_csv(std::ostream& out, const DiscreteDistribution& dist) {
  out << "atom_id,weight\n";
  for (std::size_t i = 0; i < dist.size(); ++i) {
    out << dist.atoms()[i] << ',' << format_double(dist.weights()[i]) << '\n';
  }
}

DiscreteDistribution read_distribution_csv(std::istream& in) {
  const csv::Table table = csv::read(in);
  const std::size_t id_col = table.column("atom_id");
  const std::size_t w_col = table.column("weight");
  std::vector<std::size_t> atoms;
  std::vector<double> weights;
  for (const auto& row : table.rows) {
    atoms.push_back(static_cast<std::size_t>(csv::parse_number(row[id_col])));
    weights.push_back(csv::parse_number(row[w_col]));
  }
  return {std::move(atoms), std::move(weights)};
}

nlohmann::json to_json(const LossProfile& profile) {
  return {{"atoms", profile.atoms()},
          {"weights", profile.weights()},
          {"base_losses", profile.base_losses()},
          {"inflated_losses", profile.inflated_losses()},
          {"worst_case", profile.worst_case()}};
}

nlohmann::json to_json(const DiscreteDistribution& dist) {
  return {{"atoms", dist.atoms()}, {"weights", dist.weights()}};
}

LossProfile profile_from_json(const nlohmann::json& j) {
  return {j.at("inflated_losses").get<std::vector<double>>(),
          j.at("base_losses").get<std::vector<double>>(),
          j.at("weights").get<std::vector<double>>(), j.at("worst_case").get<double>(),
          j.value("atoms", std::vector<std::size_t>{})};
}

DiscreteDistribution distribution_from_json(const nlohmann::json& j) {
  return {j.at("atoms").get<std::vector<std::size_t>>(),
          j.at("weights").get<std::vector<double>>()};
}

}  // namespace holistic
