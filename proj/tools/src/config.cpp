#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include "envar/collapse.hpp"
#include "envar/linalg.hpp"
#include "envar/tools/scenarios.hpp"

namespace envar::tools {
namespace {

std::string join_problems(const std::vector<std::string>& problems) {
  std::string out;
  for (const auto& p : problems) out += (out.empty() ? "" : "; ") + p;
  return out;
}

const std::vector<std::string> kCommonFields{"scenario", "seed", "out", "tolerance"};

const std::map<std::string, std::vector<std::string>>& scenario_fields() {
  static const std::map<std::string, std::vector<std::string>> fields{
      {"grothendieck-int", {"range"}},
      {"envariance-restore", {"trials", "dims"}},
      {"equiv-laws", {"trials", "dims"}},
      {"born", {"weights", "denominator", "probabilities"}},
      {"darwinism", {"env_qubits", "state", "theta", "delta", "samples_per_size"}},
      {"nohide", {"dim", "inputs"}},
  };
  return fields;
}

bool known_field(const std::string& name) {
  if (std::find(kCommonFields.begin(), kCommonFields.end(), name) != kCommonFields.end()) return true;
  for (const auto& [_, names] : scenario_fields()) {
    if (std::find(names.begin(), names.end(), name) != names.end()) return true;
  }
  return false;
}

template <class T>
void read(const nlohmann::json& j, const char* key, T& into, std::vector<std::string>& problems) {
  try {
    into = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    problems.push_back(std::string(key) + ": wrong type");
  }
}

void read_integer(const nlohmann::json& j, const char* key, std::int64_t& into, std::vector<std::string>& problems) {
  if (!j.at(key).is_number_integer()) {
    problems.push_back(std::string(key) + ": expected an integer");
    return;
  }
  into = j.at(key).get<std::int64_t>();
}

void read_integers(const nlohmann::json& j, const char* key, std::vector<std::int64_t>& into,
                   std::vector<std::string>& problems) {
  const auto& v = j.at(key);
  if (!v.is_array() || !std::all_of(v.begin(), v.end(), [](const auto& e) { return e.is_number_integer(); })) {
    problems.push_back(std::string(key) + ": expected an array of integers");
    return;
  }
  into = v.get<std::vector<std::int64_t>>();
}

std::int64_t max_of(const std::vector<std::int64_t>& v) { return *std::max_element(v.begin(), v.end()); }

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : Error("invalid configuration: " + join_problems(problems)), problems_(std::move(problems)) {}

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, _] : scenario_fields()) out.push_back(name);
    return out;
  }();
  return names;
}

ScenarioConfig merge_config(ScenarioConfig c, const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError({"config: expected a JSON object"});
  std::vector<std::string> problems;
  for (const auto& [key, _] : j.items()) {
    if (!known_field(key)) problems.push_back(key + ": unknown field");
  }
  for (const auto& [key, value] : j.items()) {
    if (!known_field(key)) continue;
    c.provided.insert(key);
    if (key == "scenario") {
      read(j, "scenario", c.scenario, problems);
      const auto& names = scenario_names();
      if (std::find(names.begin(), names.end(), c.scenario) == names.end()) {
        problems.push_back("scenario: unknown scenario '" + c.scenario + "'");
      }
    } else if (key == "seed") {
      if (!value.is_number_integer() || (!value.is_number_unsigned() && value.get<std::int64_t>() < 0)) {
        problems.push_back("seed: expected a non-negative integer");
      } else {
        c.seed = value.get<std::uint64_t>();
      }
    } else if (key == "out") {
      std::string out;
      read(j, "out", out, problems);
      c.out = out;
    } else if (key == "tolerance") {
      double t = 0.0;
      read(j, "tolerance", t, problems);
      c.tolerance = t;
    } else if (key == "range") read_integer(j, "range", c.range, problems);
    else if (key == "trials") read_integer(j, "trials", c.trials, problems);
    else if (key == "dims") read_integers(j, "dims", c.dims, problems);
    else if (key == "weights") read_integers(j, "weights", c.weights, problems);
    else if (key == "denominator") {
      std::int64_t d = 0;
      read_integer(j, "denominator", d, problems);
      c.denominator = d;
    } else if (key == "probabilities") read(j, "probabilities", c.probabilities, problems);
    else if (key == "env_qubits") read_integer(j, "env_qubits", c.env_qubits, problems);
    else if (key == "state") read(j, "state", c.state, problems);
    else if (key == "theta") read(j, "theta", c.theta, problems);
    else if (key == "delta") read(j, "delta", c.delta, problems);
    else if (key == "samples_per_size") read_integer(j, "samples_per_size", c.samples_per_size, problems);
    else if (key == "dim") read_integer(j, "dim", c.dim, problems);
    else if (key == "inputs") read_integer(j, "inputs", c.inputs, problems);
  }
  if (!problems.empty()) throw ConfigError(std::move(problems));
  return c;
}

ScenarioConfig load_config_file(const std::filesystem::path& path, ScenarioConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"config: cannot open " + path.string()});
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError({"config: " + std::string(e.what())});
  }
  return merge_config(std::move(base), j);
}

void validate(const ScenarioConfig& c) {
  std::vector<std::string> problems;
  const auto fields = scenario_fields().find(c.scenario);
  if (fields == scenario_fields().end()) {
    throw ConfigError({"scenario: unknown scenario '" + c.scenario + "'"});
  }
  for (const auto& key : c.provided) {
    const bool common = std::find(kCommonFields.begin(), kCommonFields.end(), key) != kCommonFields.end();
    const bool own = std::find(fields->second.begin(), fields->second.end(), key) != fields->second.end();
    if (!common && !own) problems.push_back(key + ": does not apply to scenario " + c.scenario);
  }
  if (c.tolerance && !(*c.tolerance > 0.0 && *c.tolerance < 1.0)) {
    problems.push_back("tolerance: must lie in (0, 1)");
  }
  const std::size_t budget = kDefaultTolerances.max_total_dim;

  if (c.scenario == "grothendieck-int" && (c.range < 0 || c.range > 100)) {
    problems.push_back("range: must lie in [0, 100]");
  }
  if (c.scenario == "envariance-restore" || c.scenario == "equiv-laws") {
    if (c.trials < 1 || c.trials > 10000) problems.push_back("trials: must lie in [1, 10000]");
    if (c.dims.empty()) {
      problems.push_back("dims: must not be empty");
    } else if (std::any_of(c.dims.begin(), c.dims.end(), [](std::int64_t d) { return d < 1 || d > 64; })) {
      problems.push_back("dims: every entry must lie in [1, 64]");
    } else {
      const auto d = static_cast<std::size_t>(max_of(c.dims));
      // equiv-laws chains two links with qubit ancillas: d⁴·4 amplitudes.
      const std::size_t need = c.scenario == "equiv-laws" ? d * d * d * d * 4 : d * d;
      if (need > budget) {
        problems.push_back("dims: largest entry needs dimension " + std::to_string(need) + ", budget is " +
                           std::to_string(budget));
      }
    }
  }
  if (c.scenario == "born") {
    const bool has_w = !c.weights.empty();
    const bool has_p = !c.probabilities.empty();
    if (has_w == has_p) {
      problems.push_back("weights: give exactly one of weights or probabilities");
    } else if (has_w) {
      if (std::any_of(c.weights.begin(), c.weights.end(), [](std::int64_t m) { return m < 1 || m > 4096; })) {
        problems.push_back("weights: every entry must lie in [1, 4096]");
      } else {
        const std::int64_t sum = std::accumulate(c.weights.begin(), c.weights.end(), std::int64_t{0});
        if (c.denominator && *c.denominator != sum) {
          problems.push_back("denominator: weights sum to " + std::to_string(sum) + ", not " +
                             std::to_string(*c.denominator));
        }
        const double need = static_cast<double>(c.weights.size() * c.weights.size()) *
                            static_cast<double>(max_of(c.weights)) * static_cast<double>(sum);
        if (need > static_cast<double>(budget)) {
          problems.push_back("weights: fine-grained state needs dimension " +
                             std::to_string(static_cast<std::size_t>(need)) + ", budget is " +
                             std::to_string(budget));
        }
      }
    } else {
      if (!c.denominator) {
        problems.push_back("denominator: required with probabilities");
      } else if (*c.denominator < 1 || *c.denominator > 4096) {
        problems.push_back("denominator: must lie in [1, 4096]");
      } else {
        try {
          const auto approx = collapse::approximate_weights(c.probabilities, *c.denominator);
          const auto& m = approx.weights.counts();
          const double need = static_cast<double>(m.size() * m.size()) * static_cast<double>(max_of(m)) *
                              static_cast<double>(*c.denominator);
          if (need > static_cast<double>(budget)) {
            problems.push_back("denominator: fine-grained state needs dimension " +
                               std::to_string(static_cast<std::size_t>(need)) + ", budget is " +
                               std::to_string(budget));
          }
        } catch (const Error& e) {
          problems.push_back(std::string("probabilities: ") + e.what());
        }
      }
    }
  }
  if (c.scenario == "darwinism") {
    if (c.env_qubits < 1 || c.env_qubits > 12) problems.push_back("env_qubits: must lie in [1, 12]");
    if (c.state != "ghz" && c.state != "imperfect") problems.push_back("state: must be ghz or imperfect");
    if (!std::isfinite(c.theta)) problems.push_back("theta: must be finite");
    if (!(c.delta > 0.0 && c.delta < 1.0)) problems.push_back("delta: must lie in (0, 1)");
    if (c.samples_per_size < 1 || c.samples_per_size > 1000000) {
      problems.push_back("samples_per_size: must lie in [1, 1000000]");
    }
  }
  if (c.scenario == "nohide") {
    if (c.dim < 2 || static_cast<std::size_t>(c.dim * c.dim * c.dim) > budget) {
      problems.push_back("dim: must be at least 2 with dim³ ≤ " + std::to_string(budget));
    }
    if (c.inputs < 2 || c.inputs > 1000) problems.push_back("inputs: must lie in [2, 1000]");
  }
  if (!problems.empty()) throw ConfigError(std::move(problems));
}

nlohmann::json config_echo(const ScenarioConfig& c) {
  nlohmann::json j;
  j["scenario"] = c.scenario;
  j["seed"] = c.seed;
  j["out"] = c.out.generic_string();
  j["tolerance"] = c.tolerance ? nlohmann::json(*c.tolerance) : nlohmann::json(nullptr);
  if (c.scenario == "grothendieck-int") j["range"] = c.range;
  if (c.scenario == "envariance-restore" || c.scenario == "equiv-laws") {
    j["trials"] = c.trials;
    j["dims"] = c.dims;
  }
  if (c.scenario == "born") {
    if (!c.weights.empty()) j["weights"] = c.weights;
    if (!c.probabilities.empty()) j["probabilities"] = c.probabilities;
    j["denominator"] = c.denominator ? *c.denominator
                                     : std::accumulate(c.weights.begin(), c.weights.end(), std::int64_t{0});
  }
  if (c.scenario == "darwinism") {
    j["env_qubits"] = c.env_qubits;
    j["state"] = c.state;
    if (c.state == "imperfect") j["theta"] = c.theta;
    j["delta"] = c.delta;
    j["samples_per_size"] = c.samples_per_size;
  }
  if (c.scenario == "nohide") {
    j["dim"] = c.dim;
    j["inputs"] = c.inputs;
  }
  return j;
}

}  // namespace envar::tools
