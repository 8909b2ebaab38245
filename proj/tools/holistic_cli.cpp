// Command-line front end: eval, fit and simulate subcommands.

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "holistic/core.hpp"
#include "holistic/csv.hpp"
#include "holistic/decision.hpp"
#include "holistic/experiments.hpp"
#include "holistic/losses.hpp"
#include "holistic/predictors.hpp"

namespace {

using namespace holistic;

constexpr int kExitConfig = 1;
constexpr int kExitData = 2;
constexpr int kExitNonConvergence = 3;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string command;
  std::string loss = "profile";
  std::string predictor = "saa";
  RobustnessParams params;
  std::optional<double> epsilon_prime;
  double svp_penalty = 0.0;
  std::string data;
  std::string out = "-";
  std::string summary = "-";
  std::string trajectory;
  std::uint64_t seed = 0;
  std::size_t trials = 100;
  std::size_t sample_size = 100;
  std::vector<double> decision;
  std::optional<double> worst_case;
  double b_cost = 1.0;
  double h_cost = 1.0;
  std::optional<double> demand_lo;
  std::optional<double> demand_hi;
  int max_iters = 2000;
  double step_scale = 0.0;
  std::string corruption = "random";
  double alpha_true = 0.0;
  double epsilon_true = 0.0;
  std::vector<double> replacement;
  unsigned threads = 0;
};

std::string render(const nlohmann::json& j) { return j.dump(2) + "\n"; }

void write_text(const std::string& path, const std::string& text) {
  if (path == "-" || path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open output file '" + path + "'");
  f << text;
}

std::ifstream open_input(const std::string& path) {
  if (path.empty()) throw ConfigError("--data is required for this command");
  std::ifstream f(path);
  if (!f) throw DataError("cannot open data file '" + path + "'");
  return f;
}

// Loss profile from a CSV with either the full profile columns or a single
// `loss` column (uniform weights, base = inflated).
LossProfile load_profile(const RunConfig& cfg) {
  std::ifstream f = open_input(cfg.data);
  std::stringstream buffer;
  buffer << f.rdbuf();
  try {
    const std::string text = buffer.str();
    std::istringstream probe(text);
    const csv::Table table = csv::read(probe);
    const bool full = std::find(table.header.begin(), table.header.end(), "inflated_loss") !=
                      table.header.end();
    if (full) {
      std::istringstream in(text);
      const double* wc = cfg.worst_case ? &*cfg.worst_case : nullptr;
      return read_profile_csv(in, wc);
    }
    const std::size_t col = table.column("loss");
    std::vector<double> losses;
    for (const auto& row : table.rows) losses.push_back(csv::parse_number(row[col]));
    if (losses.empty()) throw csv::ParseError("loss CSV has no rows");
    const double wc = cfg.worst_case ? *cfg.worst_case
                                     : *std::max_element(losses.begin(), losses.end());
    const std::size_t n = losses.size();
    return LossProfile::from_losses(std::move(losses),
                                    std::vector<double>(n, 1.0 / static_cast<double>(n)), wc);
  } catch (const csv::ParseError& e) {
    throw DataError(e.what());
  } catch (const InvalidArgument& e) {
    throw DataError(e.what());
  }
}

Samples load_samples(const std::string& path) {
  std::ifstream f = open_input(path);
  try {
    return read_samples_csv(f);
  } catch (const csv::ParseError& e) {
    throw DataError(e.what());
  }
}

std::unique_ptr<LossOracle> make_oracle(const RunConfig& cfg, const Samples& samples) {
  const double eps = cfg.params.epsilon;
  const double eps_prime = cfg.params.epsilon_prime;
  try {
    if (cfg.loss == "l1reg") {
      return l1_regression_oracle(LabeledData::from_samples(samples), eps, eps_prime);
    }
    if (cfg.loss == "hinge") {
      return hinge_oracle(LabeledData::from_samples(samples), eps, eps_prime);
    }
  } catch (const InvalidArgument& e) {
    throw DataError(e.what());
  }
  if (cfg.loss == "newsvendor") {
    double lo = samples.front().at(0);
    double hi = lo;
    for (const auto& s : samples) {
      if (s.size() != 1) throw DataError("newsvendor data must have a single demand column");
      lo = std::min(lo, s[0]);
      hi = std::max(hi, s[0]);
    }
    return newsvendor_oracle(cfg.b_cost, cfg.h_cost, cfg.demand_lo.value_or(lo),
                             cfg.demand_hi.value_or(hi), eps, eps_prime);
  }
  throw ConfigError("unknown loss '" + cfg.loss + "'");
}

nlohmann::json params_json(const RunConfig& cfg) {
  return {{"epsilon", cfg.params.epsilon},
          {"epsilon_prime", cfg.params.epsilon_prime},
          {"alpha", cfg.params.alpha},
          {"r", cfg.params.r}};
}

int run_eval(const RunConfig& cfg, PredictorKind kind) {
  nlohmann::json out;
  if (cfg.loss == "profile") {
    const LossProfile profile = load_profile(cfg);
    out = to_json(predictor_family(profile, cfg.params, kind, cfg.svp_penalty));
    out["profile"] = to_json(profile);
  } else {
    const Samples samples = load_samples(cfg.data);
    const auto oracle = make_oracle(cfg, samples);
    std::vector<double> x = cfg.decision.empty() ? oracle->initial_decision(samples) : cfg.decision;
    if (x.size() != oracle->decision_dim()) throw ConfigError("--decision has the wrong dimension");
    const LossProfile profile = build_profile(*oracle, x, samples);
    out = to_json(predictor_family(profile, cfg.params, kind, cfg.svp_penalty));
    out["decision"] = x;
    out["profile"] = to_json(profile);
  }
  out["predictor"] = to_string(kind);
  out["params"] = params_json(cfg);
  write_text(cfg.out, render(out));
  return 0;
}

int run_fit(const RunConfig& cfg, PredictorKind kind) {
  if (cfg.loss == "profile") {
    throw ConfigError("fit needs a dataset loss (l1reg, hinge, newsvendor)");
  }
  const Samples samples = load_samples(cfg.data);
  const auto oracle = make_oracle(cfg, samples);
  SubgradientConfig sg;
  sg.max_iters = cfg.max_iters;
  sg.step_scale = cfg.step_scale;
  const FitResult result = fit(*oracle, samples, cfg.params, kind, sg, cfg.svp_penalty);
  nlohmann::json out = to_json(result);
  out["predictor"] = to_string(kind);
  out["loss"] = cfg.loss;
  out["params"] = params_json(cfg);
  write_text(cfg.out, render(out));
  if (!cfg.trajectory.empty()) {
    std::ostringstream os;
    os << "iter,objective\n";
    for (std::size_t i = 0; i < result.trajectory.size(); ++i) {
      os << i << ',' << format_double(result.trajectory[i]) << '\n';
    }
    write_text(cfg.trajectory, os.str());
  }
  if (!result.converged) {
    std::cerr << "warning: subgradient budget exhausted before convergence\n";
    return kExitNonConvergence;
  }
  return 0;
}

int run_simulate(const RunConfig& cfg, PredictorKind kind) {
  if (cfg.loss == "profile") {
    throw ConfigError("simulate needs a dataset loss (l1reg, hinge, newsvendor)");
  }
  GroundTruth truth;
  if (cfg.data.empty()) {
    if (cfg.loss != "newsvendor") throw ConfigError("--data is required unless --loss newsvendor");
    truth.atoms = {{1.0}, {2.0}, {5.0}};
    truth.probabilities = {0.5, 0.3, 0.2};
  } else {
    const Samples rows = load_samples(cfg.data);
    for (const auto& row : rows) {
      if (row.size() < 2) {
        throw DataError("ground-truth rows need sample columns and a probability");
      }
      truth.atoms.emplace_back(row.begin(), row.end() - 1);
      truth.probabilities.push_back(row.back());
    }
    try {
      truth.probabilities = normalized_weights(truth.probabilities);
    } catch (const InvalidArgument& e) {
      throw DataError(e.what());
    }
  }
  const auto oracle = make_oracle(cfg, truth.atoms);
  DisappointmentSetup setup;
  setup.oracle = oracle.get();
  setup.decision = cfg.decision.empty() ? oracle->initial_decision(truth.atoms) : cfg.decision;
  if (setup.decision.size() != oracle->decision_dim()) {
    throw ConfigError("--decision has the wrong dimension");
  }
  setup.truth = truth;
  setup.sample_size = cfg.sample_size;
  setup.trials = cfg.trials;
  setup.seed = cfg.seed;
  setup.svp_penalty = cfg.svp_penalty;
  setup.threads = cfg.threads;
  setup.corruption.mode =
      cfg.corruption == "deterministic" ? CorruptionMode::kDeterministic : CorruptionMode::kRandom;
  setup.corruption.alpha_true = cfg.alpha_true;
  setup.corruption.epsilon_true = cfg.epsilon_true;
  setup.corruption.replacement = cfg.replacement;
  const TrialReport report = disappointment_rate(setup, kind, cfg.params);
  std::ostringstream csv_out;
  write_csv(csv_out, report);
  nlohmann::json summary = summary_json(report);
  summary["predictor"] = to_string(kind);
  summary["params"] = params_json(cfg);
  summary["sample_size"] = cfg.sample_size;
  summary["seed"] = cfg.seed;
  if (cfg.out == "-" && (cfg.summary == "-" || cfg.summary.empty())) {
    std::cout << csv_out.str();
    std::cerr << render(summary);
  } else {
    write_text(cfg.out, csv_out.str());
    write_text(cfg.summary, render(summary));
  }
  return 0;
}

void add_common_options(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--loss", cfg.loss, "Loss: profile, l1reg, hinge, newsvendor")
      ->check(CLI::IsMember({"profile", "l1reg", "hinge", "newsvendor"}));
  sub->add_option("--predictor", cfg.predictor, "Predictor: saa, svp, kl, lp, hr, hd, winf, tv");
  sub->add_option("--alpha", cfg.params.alpha, "Misspecification level in [0, 1]");
  sub->add_option("--r", cfg.params.r, "KL radius >= 0");
  sub->add_option("--epsilon", cfg.params.epsilon, "Noise radius >= 0");
  sub->add_option("--epsilon-prime", cfg.epsilon_prime,
                  "Event-set radius >= epsilon (default epsilon)");
  sub->add_option("--svp-penalty", cfg.svp_penalty, "Standard-deviation penalty for svp");
  sub->add_option("--data", cfg.data, "Input CSV");
  sub->add_option("--out", cfg.out, "Output path ('-' for stdout)");
  sub->add_option("--seed", cfg.seed, "Seed for all randomness");
  sub->add_option("--decision", cfg.decision, "Decision vector (comma separated)")->delimiter(',');
  sub->add_option("--b-cost", cfg.b_cost, "Newsvendor backorder cost");
  sub->add_option("--h-cost", cfg.h_cost, "Newsvendor holding cost");
  sub->add_option("--demand-lo", cfg.demand_lo, "Newsvendor demand support lower end");
  sub->add_option("--demand-hi", cfg.demand_hi, "Newsvendor demand support upper end");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Robust cost predictors and decisions under noise, misspecification and sampling error"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto* eval = app.add_subcommand("eval", "Evaluate a predictor at a fixed decision");
  add_common_options(eval, cfg);
  eval->add_option("--worst-case", cfg.worst_case, "Worst-case loss for --loss profile");

  auto* fit_cmd = app.add_subcommand("fit", "Minimize a predictor over the decision");
  add_common_options(fit_cmd, cfg);
  fit_cmd->add_option("--max-iters", cfg.max_iters, "Subgradient iterations");
  fit_cmd->add_option("--step-scale", cfg.step_scale, "Step constant a in a/sqrt(t) (0 = auto)");
  fit_cmd->add_option("--trajectory", cfg.trajectory, "Write the objective trajectory CSV here");

  auto* sim = app.add_subcommand("simulate", "Monte-Carlo disappointment experiment");
  add_common_options(sim, cfg);
  sim->add_option("--trials", cfg.trials, "Number of trials");
  sim->add_option("--T", cfg.sample_size, "Samples per trial");
  sim->add_option("--summary", cfg.summary, "JSON summary path ('-' for stdout)");
  sim->add_option("--corruption", cfg.corruption, "Corruption mode: random or deterministic")
      ->check(CLI::IsMember({"random", "deterministic"}));
  sim->add_option("--alpha-true", cfg.alpha_true, "True misspecification level");
  sim->add_option("--epsilon-true", cfg.epsilon_true, "True noise radius");
  sim->add_option("--replacement", cfg.replacement, "Replacement point (comma separated)")
      ->delimiter(',');
  sim->add_option("--threads", cfg.threads, "Worker threads (0 = hardware)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    cfg.command = app.get_subcommands().front()->get_name();
    cfg.params.epsilon_prime = cfg.epsilon_prime.value_or(cfg.params.epsilon);
    cfg.params.validate();
    const PredictorKind kind = parse_predictor_kind(cfg.predictor);
    if (kind == PredictorKind::kSvp && !(cfg.svp_penalty >= 0.0)) {
      throw ConfigError("--svp-penalty must be >= 0");
    }
    if (cfg.command == "eval") return run_eval(cfg, kind);
    if (cfg.command == "fit") return run_fit(cfg, kind);
    return run_simulate(cfg, kind);
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}
