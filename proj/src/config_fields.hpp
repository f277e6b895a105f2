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

#ifndef COLLAPSE_LAB_SRC_CONFIG_FIELDS_HPP
#define COLLAPSE_LAB_SRC_CONFIG_FIELDS_HPP

#include <complex>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

namespace collapse::detail {

/// Typed, path-aware reader over one JSON object. Every accessor marks its
/// key as consumed; finish() rejects whatever was not consumed.
class Fields {
 public:
  Fields(const nlohmann::json& object, std::string path);

  bool has(const std::string& key) const;

  double real(const std::string& key);
  double real_or(const std::string& key, double fallback);
  /// Required, finite and > 0.
  double positive(const std::string& key);
  double positive_or(const std::string& key, double fallback);
  std::uint64_t count(const std::string& key, std::uint64_t lo, std::uint64_t hi);
  std::uint64_t count_or(const std::string& key, std::uint64_t fallback, std::uint64_t lo, std::uint64_t hi);
  bool flag_or(const std::string& key, bool fallback);
  std::string text_or(const std::string& key, const std::string& fallback);
  std::vector<double> reals(const std::string& key);
  std::vector<double> reals_or(const std::string& key, std::vector<double> fallback);
  /// A number or a [re, im] pair.
  std::complex<double> complex(const std::string& key);
  Fields object(const std::string& key);

  void finish() const;
  [[noreturn]] void fail(const std::string& key, const std::string& why) const;

 private:
  const nlohmann::json& get(const std::string& key);

  const nlohmann::json& object_;
  std::string path_;
  std::set<std::string> used_;
};

}  // namespace collapse::detail

#endif  // COLLAPSE_LAB_SRC_CONFIG_FIELDS_HPP
