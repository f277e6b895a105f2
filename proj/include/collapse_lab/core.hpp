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

// Finite-dimensional density-matrix algebra shared by all modules.
//
// Composite indices are row-major over the factor list: the leftmost factor
// varies slowest, so for dims {d0, d1} the index of (i0, i1) is i0 * d1 + i1.

#ifndef COLLAPSE_LAB_CORE_HPP
#define COLLAPSE_LAB_CORE_HPP

#include <Eigen/Dense>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "collapse_lab/tolerances.hpp"

namespace collapse {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;

/// Diagnostic numbers behind the DensityMatrix invariants.
struct DensityDiagnostics {
  double hermiticity_defect = 0.0;  // max |m_ij - conj(m_ji)|
  double trace_defect = 0.0;        // |Tr m - 1|
  double min_eigenvalue = 0.0;      // of the Hermitian part
  bool finite = true;

  bool valid(const Tolerances& tol = default_tolerances()) const;
};

DensityDiagnostics diagnose(const ComplexMatrix& m);

/// Hermitian, unit-trace, positive-semidefinite matrix. Construction
/// validates; instances are immutable afterwards.
class DensityMatrix {
 public:
  /// Throws ModelError naming the violated invariant.
  explicit DensityMatrix(ComplexMatrix m, const Tolerances& tol = default_tolerances());

  static DensityMatrix diagonal(std::span<const double> weights);
  static DensityMatrix maximally_mixed(std::size_t dim);
  /// |psi><psi| for a normalized state vector.
  static DensityMatrix pure(std::span<const Complex> amplitudes);

  std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
  const ComplexMatrix& matrix() const { return m_; }
  Complex operator()(std::size_t i, std::size_t j) const {
    return m_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

 private:
  ComplexMatrix m_;
};

/// Factor dimensions of a composite space and the factor that a partial
/// trace keeps (or, for coherence_norm, the factor carrying the channel
/// index).
struct SubsystemSplit {
  std::vector<std::size_t> dims;
  std::size_t keep_index = 0;

  std::size_t composite_dim() const;
  /// Throws DimensionError unless dims are positive, keep_index is in
  /// range, and the product matches `dim`.
  void check(std::size_t dim) const;
};

DensityMatrix tensor_product(const DensityMatrix& a, const DensityMatrix& b,
                             const Tolerances& tol = default_tolerances());

/// Trace over every factor except split.keep_index.
DensityMatrix partial_trace(const DensityMatrix& rho, const SubsystemSplit& split);

/// Same contraction on an arbitrary square matrix (no validity checks on
/// the values; used for linearity tests and raw deltas).
ComplexMatrix partial_trace_matrix(const ComplexMatrix& m, const SubsystemSplit& split);

/// Frobenius norm of the coherences between distinct channel values, where
/// the channel is factor block_split.keep_index. Each unordered pair of
/// channel blocks is counted once (the upper blocks; the lower ones are
/// their adjoints), so for a 2x2 matrix this is |rho_01|.
double coherence_norm(const DensityMatrix& rho, const SubsystemSplit& block_split);

}  // namespace collapse

#endif  // COLLAPSE_LAB_CORE_HPP
