#include <iostream>

#include <CLI11.hpp>

#include "envar/tools/scenarios.hpp"

namespace {

template <class T>
void overlay(const CLI::Option* opt, const char* field, const T& value, T& into, envar::tools::ScenarioConfig& c) {
  if (opt->count() == 0) return;
  into = value;
  c.provided.insert(field);
}

}  // namespace

int main(int argc, char** argv) {
  using envar::tools::ScenarioConfig;
  CLI::App app{"Runs envariance and measurement-model scenarios and writes a JSON report."};
  app.set_version_flag("--version", "envar 0.1.0");

  ScenarioConfig flags;
  std::string scenario, config_path, out;
  std::uint64_t seed = 0;
  double tolerance = 0.0;
  std::int64_t denominator = 0;
  bool list = false;

  auto* scenario_opt = app.add_option("scenario", scenario, "grothendieck-int, envariance-restore, equiv-laws, "
                                                             "born, darwinism or nohide");
  app.add_flag("--list", list, "Print the scenario names and exit");
  app.add_option("--config", config_path, "JSON config file; flags override its fields")->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "Base seed");
  auto* out_opt = app.add_option("--out", out, "Output directory for report.json and CSV files");
  auto* tol_opt = app.add_option("--tolerance", tolerance, "Tolerance for every floating-point residual check");
  auto* range_opt = app.add_option("--range", flags.range, "grothendieck-int: sweep a, b, c, d over [0, range]");
  auto* trials_opt = app.add_option("--trials", flags.trials, "envariance-restore, equiv-laws: trial count");
  auto* dims_opt = app.add_option("--dims", flags.dims, "envariance-restore, equiv-laws: factor dimensions to draw from")
                       ->delimiter(',');
  auto* weights_opt = app.add_option("--weights", flags.weights, "born: integer counts m_k")->delimiter(',');
  auto* denom_opt = app.add_option("--denominator", denominator, "born: M, the sum of the counts");
  auto* probs_opt = app.add_option("--probabilities", flags.probabilities,
                                   "born: probabilities to round onto counts over --denominator")
                        ->delimiter(',');
  auto* env_opt = app.add_option("--env-qubits", flags.env_qubits, "darwinism: environment size N");
  auto* state_opt = app.add_option("--state", flags.state, "darwinism: ghz or imperfect");
  auto* theta_opt = app.add_option("--theta", flags.theta, "darwinism: record angle; overlap is cos(theta)");
  auto* delta_opt = app.add_option("--delta", flags.delta, "darwinism: information deficit for redundancy");
  auto* samples_opt = app.add_option("--samples-per-size", flags.samples_per_size,
                                     "darwinism: fragments per size before sampling kicks in");
  auto* dim_opt = app.add_option("--dim", flags.dim, "nohide: system dimension d");
  auto* inputs_opt = app.add_option("--inputs", flags.inputs, "nohide: number of random inputs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : envar::tools::kExitConfigError;
  }
  if (list) {
    for (const auto& name : envar::tools::scenario_names()) std::cout << name << "\n";
    return 0;
  }

  ScenarioConfig c;
  try {
    if (!config_path.empty()) c = envar::tools::load_config_file(config_path);
  } catch (const envar::tools::ConfigError& e) {
    for (const auto& p : e.problems()) std::cerr << "config error: " << p << "\n";
    return envar::tools::kExitConfigError;
  }
  overlay(scenario_opt, "scenario", scenario, c.scenario, c);
  overlay(seed_opt, "seed", seed, c.seed, c);
  if (out_opt->count() > 0) {
    c.out = out;
    c.provided.insert("out");
  }
  if (tol_opt->count() > 0) {
    c.tolerance = tolerance;
    c.provided.insert("tolerance");
  }
  if (denom_opt->count() > 0) {
    c.denominator = denominator;
    c.provided.insert("denominator");
  }
  overlay(range_opt, "range", flags.range, c.range, c);
  overlay(trials_opt, "trials", flags.trials, c.trials, c);
  overlay(dims_opt, "dims", flags.dims, c.dims, c);
  overlay(weights_opt, "weights", flags.weights, c.weights, c);
  overlay(probs_opt, "probabilities", flags.probabilities, c.probabilities, c);
  overlay(env_opt, "env_qubits", flags.env_qubits, c.env_qubits, c);
  overlay(state_opt, "state", flags.state, c.state, c);
  overlay(theta_opt, "theta", flags.theta, c.theta, c);
  overlay(delta_opt, "delta", flags.delta, c.delta, c);
  overlay(samples_opt, "samples_per_size", flags.samples_per_size, c.samples_per_size, c);
  overlay(dim_opt, "dim", flags.dim, c.dim, c);
  overlay(inputs_opt, "inputs", flags.inputs, c.inputs, c);

  if (c.scenario.empty()) {
    std::cerr << "config error: scenario: none given (see --list)\n";
    return envar::tools::kExitConfigError;
  }
  return envar::tools::execute(c, std::cout);
}
