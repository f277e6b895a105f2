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

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "collapse_lab/errors.hpp"
#include "collapse_lab/experiment.hpp"
#include "config_fields.hpp"

namespace collapse {

namespace detail {
// Defined in the generated presets source.
const std::vector<std::pair<std::string, std::string>>& embedded_preset_files();
}  // namespace detail

using nlohmann::json;

json ExperimentConfig::to_json() const {
  return json{{"schema_version", kSchemaVersion}, {"kind", kind},           {"seed", seed},
              {"output_dir", output_dir},         {"parameters", parameters}, {"tolerances", tolerances},
              {"annotations", annotations}};
}

ExperimentConfig parse_config(const json& doc) {
  detail::Fields top(doc, "config");
  const auto version = top.count("schema_version", 0, 1'000'000);
  if (version != static_cast<std::uint64_t>(kSchemaVersion)) {
    top.fail("schema_version", "unsupported version " + std::to_string(version) + " (expected " +
                                   std::to_string(kSchemaVersion) + ")");
  }
  ExperimentConfig cfg;
  cfg.kind = top.text_or("kind", "");
  const auto& kinds = experiment_kinds();
  if (std::find(kinds.begin(), kinds.end(), cfg.kind) == kinds.end()) {
    top.fail("kind", "must be one of collide, decohere, cascade, reduce, epr");
  }
  cfg.seed = top.count("seed", 0, UINT64_MAX);
  cfg.output_dir = top.text_or("output_dir", "collapse-lab-out");
  if (cfg.output_dir.empty()) top.fail("output_dir", "must not be empty");
  if (!doc.contains("parameters")) top.fail("parameters", "required field is missing");
  cfg.parameters = doc.at("parameters");
  top.object("parameters");
  if (!cfg.parameters.is_object()) top.fail("parameters", "expected an object");
  if (doc.contains("tolerances")) {
    cfg.tolerances = doc.at("tolerances");
    top.object("tolerances");
  }
  if (doc.contains("annotations")) {
    cfg.annotations = doc.at("annotations");
    top.object("annotations");
  }
  top.finish();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  json doc;
  try {
    doc = json::parse(buffer.str());
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": invalid JSON: " + e.what());
  }
  return parse_config(doc);
}

bool RunReport::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

namespace {

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json optional_number(const std::optional<double>& x) { return x ? number_or_null(*x) : json(nullptr); }

}  // namespace

json RunReport::to_json() const {
  json checks_json = json::array();
  for (const auto& c : checks) {
    checks_json.push_back({{"name", c.name},
                           {"measured", number_or_null(c.measured)},
                           {"expected", optional_number(c.expected)},
                           {"lower", optional_number(c.lower)},
                           {"upper", optional_number(c.upper)},
                           {"pass", c.pass},
                           {"detail", c.detail}});
  }
  json artifacts = json::array({"report.json"});
  for (const auto& t : tables) artifacts.push_back(t.file_name);
  return json{{"schema_version", kSchemaVersion},
              {"kind", config.kind},
              {"seed", config.seed},
              {"config", config.to_json()},
              {"checks", checks_json},
              {"warnings", warnings},
              {"metrics", metrics},
              {"artifacts", artifacts},
              {"pass", pass()}};
}

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::string to_csv(const CsvTable& table) {
  std::string out;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i > 0) out += ',';
    out += table.header[i];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out += ',';
      if (const auto* d = std::get_if<double>(&row[i])) {
        out += format_real(*d);
      } else if (const auto* n = std::get_if<std::int64_t>(&row[i])) {
        out += std::to_string(*n);
      } else {
        out += std::get<std::string>(row[i]);
      }
    }
    out += '\n';
  }
  return out;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

std::vector<std::string> emit_report(const RunReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw IoError("cannot create output directory " + dir.string() + (ec ? ": " + ec.message() : ""));
  }
  std::vector<std::string> files;
  write_file(dir / "report.json", report.to_json().dump(2) + "\n");
  files.push_back("report.json");
  for (const auto& t : report.tables) {
    write_file(dir / t.file_name, to_csv(t));
    files.push_back(t.file_name);
  }
  return files;
}

const std::vector<Preset>& presets() {
  static const std::vector<Preset> all = [] {
    std::vector<Preset> out;
    for (const auto& [name, text] : detail::embedded_preset_files()) {
      const json doc = json::parse(text);
      Preset p;
      p.name = name;
      p.kind = doc.value("kind", "");
      p.description = doc.contains("annotations") ? doc["annotations"].value("description", "") : "";
      p.json_text = text;
      out.push_back(std::move(p));
    }
    return out;
  }();
  return all;
}

const Preset* find_preset(const std::string& name) {
  for (const auto& p : presets()) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

}  // namespace collapse
