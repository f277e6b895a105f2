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

#include "config_fields.hpp"

#include <cmath>

#include "collapse_lab/errors.hpp"

namespace collapse::detail {

Fields::Fields(const nlohmann::json& object, std::string path) : object_(object), path_(std::move(path)) {
  if (!object_.is_object()) throw ConfigError(path_ + ": expected an object");
}

void Fields::fail(const std::string& key, const std::string& why) const {
  throw ConfigError(path_ + "." + key + ": " + why);
}

bool Fields::has(const std::string& key) const { return object_.contains(key); }

const nlohmann::json& Fields::get(const std::string& key) {
  auto it = object_.find(key);
  if (it == object_.end()) fail(key, "required field is missing");
  used_.insert(key);
  return *it;
}

double Fields::real(const std::string& key) {
  const auto& v = get(key);
  if (!v.is_number()) fail(key, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(key, "must be finite");
  return x;
}

double Fields::real_or(const std::string& key, double fallback) { return has(key) ? real(key) : fallback; }

double Fields::positive(const std::string& key) {
  const double x = real(key);
  if (!(x > 0.0)) fail(key, "must be > 0");
  return x;
}

double Fields::positive_or(const std::string& key, double fallback) {
  return has(key) ? positive(key) : fallback;
}

std::uint64_t Fields::count(const std::string& key, std::uint64_t lo, std::uint64_t hi) {
  const auto& v = get(key);
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
    fail(key, "expected a non-negative integer");
  }
  const auto n = v.get<std::uint64_t>();
  if (n < lo || n > hi) fail(key, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return n;
}

std::uint64_t Fields::count_or(const std::string& key, std::uint64_t fallback, std::uint64_t lo,
                               std::uint64_t hi) {
  return has(key) ? count(key, lo, hi) : fallback;
}

bool Fields::flag_or(const std::string& key, bool fallback) {
  if (!has(key)) return fallback;
  const auto& v = get(key);
  if (!v.is_boolean()) fail(key, "expected true or false");
  return v.get<bool>();
}

std::string Fields::text_or(const std::string& key, const std::string& fallback) {
  if (!has(key)) return fallback;
  const auto& v = get(key);
  if (!v.is_string()) fail(key, "expected a string");
  return v.get<std::string>();
}

std::vector<double> Fields::reals(const std::string& key) {
  const auto& v = get(key);
  if (!v.is_array() || v.empty()) fail(key, "expected a non-empty array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) fail(key, "expected a non-empty array of numbers");
    out.push_back(x.get<double>());
    if (!std::isfinite(out.back())) fail(key, "entries must be finite");
  }
  return out;
}

std::vector<double> Fields::reals_or(const std::string& key, std::vector<double> fallback) {
  return has(key) ? reals(key) : fallback;
}

std::complex<double> Fields::complex(const std::string& key) {
  const auto& v = get(key);
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return {v[0].get<double>(), v[1].get<double>()};
  }
  fail(key, "expected a number or a [re, im] pair");
}

Fields Fields::object(const std::string& key) { return Fields(get(key), path_ + "." + key); }

void Fields::finish() const {
  for (auto it = object_.begin(); it != object_.end(); ++it) {
    if (!used_.contains(it.key())) fail(it.key(), "unknown field");
  }
}

}  // namespace collapse::detail
