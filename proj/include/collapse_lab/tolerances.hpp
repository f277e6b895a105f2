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

#ifndef COLLAPSE_LAB_TOLERANCES_HPP
#define COLLAPSE_LAB_TOLERANCES_HPP

#include <cstddef>

namespace collapse {

/// Every numeric tolerance used across modules lives here.
struct Tolerances {
  double hermitian = 1e-12;
  double trace = 1e-10;
  double psd = 1e-10;
  /// Largest composite dimension a tensor product may produce.
  std::size_t max_dim = 4096;
  /// Simplex sums (sector weights, channel probabilities).
  double simplex_sum = 1e-10;
  /// Eigenvalues of a covariance below this are treated as zero.
  double eigen_floor = 1e-14;
  /// Minimum |p_k - p_k'| for first-order eigenvector corrections.
  double gap_floor = 1e-6;
  /// Distance from a vertex at which a reduction trajectory snaps onto it.
  double absorb = 1e-9;
};

inline const Tolerances& default_tolerances() {
  static const Tolerances tol{};
  return tol;
}

}  // namespace collapse

#endif  // COLLAPSE_LAB_TOLERANCES_HPP
