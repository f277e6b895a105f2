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

// collapse-lab run <config.json> [--seed N] [--out DIR] [--strict]
// collapse-lab presets [--write DIR]
//
// Exit status: 0 all checks pass, 1 a check (or a numeric step) failed,
// 2 configuration or I/O error.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "collapse_lab/errors.hpp"
#include "collapse_lab/experiment.hpp"
#include "collapse_lab/parallel.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitConfig = 2;

collapse::ExperimentConfig resolve_config(const std::string& source) {
  constexpr std::string_view prefix = "preset:";
  if (source.rfind(prefix, 0) == 0) {
    const std::string name = source.substr(prefix.size());
    const collapse::Preset* p = collapse::find_preset(name);
    if (p == nullptr) throw collapse::ConfigError("unknown preset \"" + name + "\"");
    try {
      return collapse::parse_config(nlohmann::json::parse(p->json_text));
    } catch (const nlohmann::json::exception& e) {
      throw collapse::ConfigError("preset " + name + ": " + e.what());
    }
  }
  return collapse::load_config(source);
}

int run_command(const std::string& source, std::optional<std::uint64_t> seed, const std::string& out, bool strict) {
  collapse::ExperimentConfig cfg = resolve_config(source);
  if (seed) cfg.seed = *seed;
  if (!out.empty()) cfg.output_dir = out;

  const auto start = std::chrono::steady_clock::now();
  collapse::RunOptions options;
  options.strict = strict;
  collapse::RunReport report = collapse::run_experiment(cfg, options);
  report.duration_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const auto files = collapse::emit_report(report, cfg.output_dir);

  for (const auto& c : report.checks) {
    std::printf("%s  %-60s %s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                collapse::format_real(c.measured).c_str());
  }
  for (const auto& w : report.warnings) std::printf("WARN  %s\n", w.c_str());
  std::printf("kind=%s seed=%llu workers=%zu duration=%.3fs\n", cfg.kind.c_str(),
              static_cast<unsigned long long>(cfg.seed), collapse::worker_count(), report.duration_seconds);
  std::printf("wrote %zu files to %s\n", files.size(), cfg.output_dir.c_str());
  std::printf("%s\n", report.pass() ? "ALL CHECKS PASSED" : "SOME CHECKS FAILED");
  return report.pass() ? kExitPass : kExitCheckFailed;
}

int presets_command(const std::string& write_dir) {
  const auto& all = collapse::presets();
  if (write_dir.empty()) {
    for (const auto& p : all) std::printf("%-16s %-9s %s\n", p.name.c_str(), p.kind.c_str(), p.description.c_str());
    return kExitPass;
  }
  std::error_code ec;
  std::filesystem::create_directories(write_dir, ec);
  if (ec) throw collapse::IoError("cannot create " + write_dir + ": " + ec.message());
  for (const auto& p : all) {
    const auto path = std::filesystem::path(write_dir) / (p.name + ".json");
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f << p.json_text;
    if (!f) throw collapse::IoError("cannot write " + path.string());
    std::printf("%s\n", path.string().c_str());
  }
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"collapse-lab: stochastic measurement-reduction experiments"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run an experiment config (a JSON file or preset:<name>)");
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  bool strict = false;
  run->add_option("config", config_path, "Experiment config")->required();
  run->add_option("--seed", seed, "Override the config seed");
  run->add_option("--out", out_dir, "Override the output directory");
  run->add_flag("--strict", strict, "Escalate accuracy warnings to errors");

  auto* presets = app.add_subcommand("presets", "List the built-in presets");
  std::string write_dir;
  presets->add_option("--write", write_dir, "Write every preset as <name>.json into DIR");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (run->parsed()) return run_command(config_path, seed, out_dir, strict);
    return presets_command(write_dir);
  } catch (const collapse::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const collapse::IoError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return kExitConfig;
  } catch (const collapse::Error& e) {
    std::fprintf(stderr, "error in module %s: %s\n", e.module().c_str(), e.what());
    return kExitCheckFailed;
  }
}
