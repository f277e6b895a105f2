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

#ifndef COLLAPSE_LAB_CHANNEL_SIMPLEX_HPP
#define COLLAPSE_LAB_CHANNEL_SIMPLEX_HPP

#include <cstddef>
#include <vector>

#include "collapse_lab/tolerances.hpp"

namespace collapse {

/// Channel probabilities p_j >= 0 with sum 1.
///
/// Canonical form: the last positive channel holds 1 minus the in-order sum
/// of the channels before it. In that form ordered_sum() is exactly 1.0,
/// because fl(s + fl(1 - s)) == 1 for every double s in [0, 1].
struct ChannelSimplex {
  std::vector<double> p;

  std::size_t channels() const { return p.size(); }
  /// Sum in index order.
  double ordered_sum() const;
  /// Throws ModelError on negative entries or |sum - 1| > tol.simplex_sum.
  void validate(const Tolerances& tol = default_tolerances()) const;
  /// Rewrites the last positive channel so that ordered_sum() == 1.0.
  void canonicalize();
  /// Index of a channel equal to 1, or channels() if none.
  std::size_t vertex() const;

  /// Validates, then returns the canonical form.
  static ChannelSimplex from(std::vector<double> p);
};

}  // namespace collapse

#endif  // COLLAPSE_LAB_CHANNEL_SIMPLEX_HPP
