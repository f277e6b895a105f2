// Copyright 2026 The collapse-lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Configuration-driven experiment runner behind the collapse-lab CLI.

#ifndef COLLAPSE_LAB_EXPERIMENT_HPP
#define COLLAPSE_LAB_EXPERIMENT_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace collapse {

inline constexpr int kSchemaVersion = 1;

/// Parsed experiment file:
///   {"schema_version": 1, "kind": ..., "seed": ..., "output_dir": ...,
///    "parameters": {...}, "tolerances": {...}, "annotations": {...}}
/// parameters are checked against the kind when the experiment runs.
struct ExperimentConfig {
  std::string kind;
  std::uint64_t seed = 0;
  std::string output_dir;
  nlohmann::json parameters = nlohmann::json::object();
  nlohmann::json tolerances = nlohmann::json::object();
  /// Free-form, echoed into the report untouched.
  nlohmann::json annotations = nlohmann::json::object();

  nlohmann::json to_json() const;
};

inline const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds{"collide", "decohere", "cascade", "reduce", "epr"};
  return kinds;
}

/// Throws ConfigError naming the offending field.
ExperimentConfig parse_config(const nlohmann::json& doc);
/// Throws IoError when the file cannot be read, ConfigError on bad JSON.
ExperimentConfig load_config(const std::filesystem::path& path);

struct Check {
  std::string name;
  double measured = 0.0;
  std::optional<double> expected;
  std::optional<double> lower;
  std::optional<double> upper;
  bool pass = false;
  std::string detail;
};

using CsvCell = std::variant<double, std::int64_t, std::string>;

struct CsvTable {
  std::string file_name;
  std::vector<std::string> header;
  std::vector<std::vector<CsvCell>> rows;
};

struct RunReport {
  ExperimentConfig config;
  std::vector<Check> checks;
  std::vector<std::string> warnings;
  nlohmann::json metrics = nlohmann::json::object();
  std::vector<CsvTable> tables;
  /// Measured by the caller; printed, never written to report.json.
  double duration_seconds = 0.0;

  bool pass() const;
  /// The report.json document (without the wall-clock duration).
  nlohmann::json to_json() const;
};

struct RunOptions {
  /// Escalate accuracy warnings to errors.
  bool strict = false;
};

/// Validates the parameters for config.kind and runs the experiment.
/// Inner numeric failures propagate as collapse::Error with their module.
RunReport run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// Writes report.json (sorted keys, trailing newline) and every table as
/// CSV into `dir`, creating it if needed. Returns the written file names.
/// Throws IoError with the failing path.
std::vector<std::string> emit_report(const RunReport& report, const std::filesystem::path& dir);

/// Shortest round-trip decimal form of a double.
std::string format_real(double x);
std::string to_csv(const CsvTable& table);

struct Preset {
  std::string name;
  std::string kind;
  std::string description;
  std::string json_text;
};

/// Presets compiled into the binary from presets/*.json.
const std::vector<Preset>& presets();
const Preset* find_preset(const std::string& name);

}  // namespace collapse

#endif  // COLLAPSE_LAB_EXPERIMENT_HPP
