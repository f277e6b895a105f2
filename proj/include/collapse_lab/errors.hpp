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

#ifndef COLLAPSE_LAB_ERRORS_HPP
#define COLLAPSE_LAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace collapse {

/// Base class for every error raised by the library. Carries the name of the
/// module that raised it so the runner can surface it with context.
class Error : public std::runtime_error {
 public:
  Error(std::string module, const std::string& message)
      : std::runtime_error("[" + module + "] " + message), module_(std::move(module)) {}

  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

/// Inconsistent or oversized matrix / subsystem dimensions.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Input violates a model invariant (sub-unitarity, PSD, normalization...).
class ModelError : public Error {
 public:
  using Error::Error;
};

/// Two sector weights are closer than the perturbative gap floor.
class DegeneracyError : public Error {
 public:
  DegeneracyError(std::size_t k, std::size_t k_prime, double gap)
      : Error("collision", "sector weights " + std::to_string(k) + " and " +
                               std::to_string(k_prime) + " are degenerate (gap " +
                               std::to_string(gap) + ")"),
        first(k),
        second(k_prime) {}

  std::size_t first;
  std::size_t second;
};

/// Time step exceeds the stability or accuracy cap of a scheme.
class StepSizeError : public Error {
 public:
  StepSizeError(std::string module, const std::string& message, double admissible)
      : Error(std::move(module), message), admissible_bound(admissible) {}

  double admissible_bound;
};

/// A trajectory did not reach a vertex within the step budget.
class NonAbsorptionError : public Error {
 public:
  using Error::Error;
};

/// Not enough data for a fit or statistical check.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

/// Invalid experiment configuration; the message names the offending field.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message) : Error("config", message) {}
};

/// Filesystem failure; the message carries the path.
class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error("io", message) {}
};

}  // namespace collapse

#endif  // COLLAPSE_LAB_ERRORS_HPP
