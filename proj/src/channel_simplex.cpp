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

#include "collapse_lab/channel_simplex.hpp"

#include <cmath>
#include <string>

#include "collapse_lab/errors.hpp"

namespace collapse {

double ChannelSimplex::ordered_sum() const {
  double s = 0.0;
  for (double x : p) s += x;
  return s;
}

void ChannelSimplex::validate(const Tolerances& tol) const {
  if (p.empty()) throw ModelError("reduction", "channel simplex is empty");
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (!(p[j] >= 0.0) || !std::isfinite(p[j])) {
      throw ModelError("reduction", "channel probability " + std::to_string(j) + " is invalid");
    }
  }
  const double s = ordered_sum();
  if (std::abs(s - 1.0) > tol.simplex_sum) {
    throw ModelError("reduction", "channel probabilities sum to " + std::to_string(s));
  }
}

void ChannelSimplex::canonicalize() {
  std::size_t last = p.size();
  for (std::size_t j = p.size(); j-- > 0;) {
    if (p[j] > 0.0) {
      last = j;
      break;
    }
  }
  if (last == p.size()) throw ModelError("reduction", "channel simplex has no positive entry");
  double head = 0.0;
  for (std::size_t j = 0; j < last; ++j) head += p[j];
  p[last] = 1.0 - head;
  if (p[last] < 0.0) {
    // Only reachable through rounding on an already-degenerate channel.
    p[last] = 0.0;
    canonicalize();
  }
}

std::size_t ChannelSimplex::vertex() const {
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (p[j] == 1.0) return j;
  }
  return p.size();
}

ChannelSimplex ChannelSimplex::from(std::vector<double> values) {
  ChannelSimplex s{std::move(values)};
  s.validate();
  s.canonicalize();
  return s;
}

}  // namespace collapse
