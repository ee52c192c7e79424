#pragma once

// Scenario runner shared by the `envar` executable and its tests.
//
// A scenario is configured from defaults, then an optional JSON config file,
// then command-line flags (flags win). run() computes a RunReport without
// touching the filesystem; execute() also writes report.json and any CSV
// artifacts into the output directory and maps the outcome to an exit code.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "envar/errors.hpp"

namespace envar::tools {

inline constexpr const char* kReportSchema = "report-v1";

inline constexpr int kExitPass = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfigError = 2;

/// Configuration problems, one message per offending field.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  std::vector<std::string> problems_;
};

struct ScenarioConfig {
  std::string scenario;
  std::uint64_t seed = 0;
  std::filesystem::path out = ".";
  /// Replaces the tolerance of every floating-point residual check.
  std::optional<double> tolerance;

  // grothendieck-int
  std::int64_t range = 50;
  // envariance-restore, equiv-laws
  std::int64_t trials = 100;
  std::vector<std::int64_t> dims{2, 3, 4, 6};
  // born
  std::vector<std::int64_t> weights;
  std::optional<std::int64_t> denominator;
  std::vector<double> probabilities;
  // darwinism
  std::int64_t env_qubits = 8;
  std::string state = "ghz";
  double theta = 0.7853981633974483;  // π/4
  double delta = 0.1;
  std::int64_t samples_per_size = 2000;
  // nohide
  std::int64_t dim = 2;
  std::int64_t inputs = 50;

  /// Field names set explicitly by a config file or flag.
  std::set<std::string> provided;
};

const std::vector<std::string>& scenario_names();

/// Overlays the fields present in `j` onto `base`. Unknown fields, wrong
/// types and unknown scenario names raise ConfigError.
ScenarioConfig merge_config(ScenarioConfig base, const nlohmann::json& j);
ScenarioConfig load_config_file(const std::filesystem::path& path, ScenarioConfig base = {});

/// Checks every field against its range and the library's dimension budgets,
/// and rejects fields that do not apply to the chosen scenario.
void validate(const ScenarioConfig& config);

/// The fields that apply to the scenario, with defaults resolved.
nlohmann::json config_echo(const ScenarioConfig& config);

struct Check {
  std::string name;
  bool pass = false;
  double residual = 0.0;
  double tolerance = 0.0;
};

struct RunReport {
  std::string scenario;
  nlohmann::json config;
  std::vector<Check> checks;
  nlohmann::json results = nlohmann::json::object();
  std::vector<std::string> artifacts;  // file names inside the output directory
  double wall_seconds = 0.0;
  /// CSV artifacts by file name, written by execute().
  std::vector<std::pair<std::string, std::string>> files;

  bool pass() const;
};

nlohmann::json report_to_json(const RunReport& report);

/// Problems with `report` against the report-v1 schema; empty when valid.
std::vector<std::string> validate_report(const nlohmann::json& report);

/// Validates and runs one scenario. Throws ConfigError on invalid input.
RunReport run(const ScenarioConfig& config);

/// run() plus file output. Returns kExitPass, kExitCheckFailed or
/// kExitConfigError; diagnostics go to `log`.
int execute(const ScenarioConfig& config, std::ostream& log);

}  // namespace envar::tools
