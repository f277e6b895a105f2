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

#include "collapse_lab/core.hpp"

#include <cmath>
#include <string>

#include "collapse_lab/errors.hpp"

namespace collapse {

namespace {

using Index = Eigen::Index;

// Digits of a composite index, leftmost factor first.
void decompose(std::size_t index, std::span<const std::size_t> dims, std::vector<std::size_t>& out) {
  out.resize(dims.size());
  for (std::size_t f = dims.size(); f-- > 0;) {
    out[f] = index % dims[f];
    index /= dims[f];
  }
}

}  // namespace

bool DensityDiagnostics::valid(const Tolerances& tol) const {
  return finite && hermiticity_defect <= tol.hermitian && trace_defect <= tol.trace &&
         min_eigenvalue >= -tol.psd;
}

DensityDiagnostics diagnose(const ComplexMatrix& m) {
  DensityDiagnostics d;
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw DimensionError("core", "density matrix must be square and non-empty");
  }
  d.finite = m.allFinite();
  if (!d.finite) return d;
  d.hermiticity_defect = (m - m.adjoint()).cwiseAbs().maxCoeff();
  d.trace_defect = std::abs(m.trace() - Complex(1.0, 0.0));
  const ComplexMatrix hermitian_part = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(hermitian_part, Eigen::EigenvaluesOnly);
  d.min_eigenvalue = solver.eigenvalues().minCoeff();
  return d;
}

DensityMatrix::DensityMatrix(ComplexMatrix m, const Tolerances& tol) : m_(std::move(m)) {
  const DensityDiagnostics d = diagnose(m_);
  if (!d.finite) throw ModelError("core", "density matrix has non-finite entries");
  if (d.hermiticity_defect > tol.hermitian) {
    throw ModelError("core", "density matrix not Hermitian (defect " +
                                 std::to_string(d.hermiticity_defect) + ")");
  }
  if (d.trace_defect > tol.trace) {
    throw ModelError("core", "density matrix trace differs from 1 by " +
                                 std::to_string(d.trace_defect));
  }
  if (d.min_eigenvalue < -tol.psd) {
    throw ModelError("core", "density matrix not positive semidefinite (min eigenvalue " +
                                 std::to_string(d.min_eigenvalue) + ")");
  }
}

DensityMatrix DensityMatrix::diagonal(std::span<const double> weights) {
  ComplexMatrix m = ComplexMatrix::Zero(static_cast<Index>(weights.size()),
                                        static_cast<Index>(weights.size()));
  for (std::size_t i = 0; i < weights.size(); ++i) {
    m(static_cast<Index>(i), static_cast<Index>(i)) = weights[i];
  }
  return DensityMatrix(std::move(m));
}

DensityMatrix DensityMatrix::maximally_mixed(std::size_t dim) {
  const auto n = static_cast<Index>(dim);
  return DensityMatrix(ComplexMatrix::Identity(n, n) / static_cast<double>(dim));
}

DensityMatrix DensityMatrix::pure(std::span<const Complex> amplitudes) {
  Eigen::VectorXcd psi(static_cast<Index>(amplitudes.size()));
  for (std::size_t i = 0; i < amplitudes.size(); ++i) psi(static_cast<Index>(i)) = amplitudes[i];
  return DensityMatrix(psi * psi.adjoint());
}

std::size_t SubsystemSplit::composite_dim() const {
  std::size_t product = 1;
  for (std::size_t d : dims) product *= d;
  return product;
}

void SubsystemSplit::check(std::size_t dim) const {
  if (dims.empty()) throw DimensionError("core", "subsystem split has no factors");
  for (std::size_t d : dims) {
    if (d == 0) throw DimensionError("core", "subsystem split has a zero-dimensional factor");
  }
  if (keep_index >= dims.size()) {
    throw DimensionError("core", "keep_index " + std::to_string(keep_index) + " out of range");
  }
  if (composite_dim() != dim) {
    throw DimensionError("core", "split dims multiply to " + std::to_string(composite_dim()) +
                                     " but matrix dim is " + std::to_string(dim));
  }
}

DensityMatrix tensor_product(const DensityMatrix& a, const DensityMatrix& b, const Tolerances& tol) {
  const std::size_t da = a.dim();
  const std::size_t db = b.dim();
  if (da > tol.max_dim / db) {
    throw DimensionError("core", "tensor product dimension " + std::to_string(da) + "x" +
                                     std::to_string(db) + " exceeds max " +
                                     std::to_string(tol.max_dim));
  }
  const auto n = static_cast<Index>(da * db);
  ComplexMatrix out(n, n);
  const auto ia = static_cast<Index>(da), ib = static_cast<Index>(db);
  for (Index i = 0; i < ia; ++i) {
    for (Index j = 0; j < ia; ++j) {
      out.block(i * ib, j * ib, ib, ib) = a.matrix()(i, j) * b.matrix();
    }
  }
  return DensityMatrix(std::move(out), tol);
}

ComplexMatrix partial_trace_matrix(const ComplexMatrix& m, const SubsystemSplit& split) {
  if (m.rows() != m.cols()) throw DimensionError("core", "partial trace of a non-square matrix");
  split.check(static_cast<std::size_t>(m.rows()));
  const std::size_t kept = split.dims[split.keep_index];
  const std::size_t rest = split.composite_dim() / kept;

  // Strides of the kept factor and of the traced-out "rest" index.
  std::vector<std::size_t> rest_dims;
  for (std::size_t f = 0; f < split.dims.size(); ++f) {
    if (f != split.keep_index) rest_dims.push_back(split.dims[f]);
  }
  std::vector<std::size_t> digits;
  std::vector<std::size_t> rest_offset(rest);
  for (std::size_t r = 0; r < rest; ++r) {
    decompose(r, rest_dims, digits);
    std::size_t index = 0;
    std::size_t d = 0;
    for (std::size_t f = 0; f < split.dims.size(); ++f) {
      index = index * split.dims[f] + (f == split.keep_index ? 0 : digits[d++]);
    }
    rest_offset[r] = index;
  }
  std::size_t kept_stride = 1;
  for (std::size_t f = split.keep_index + 1; f < split.dims.size(); ++f) kept_stride *= split.dims[f];

  ComplexMatrix out = ComplexMatrix::Zero(static_cast<Index>(kept), static_cast<Index>(kept));
  for (std::size_t a = 0; a < kept; ++a) {
    for (std::size_t b = 0; b < kept; ++b) {
      Complex sum = 0.0;
      for (std::size_t r = 0; r < rest; ++r) {
        sum += m(static_cast<Index>(rest_offset[r] + a * kept_stride),
                 static_cast<Index>(rest_offset[r] + b * kept_stride));
      }
      out(static_cast<Index>(a), static_cast<Index>(b)) = sum;
    }
  }
  return out;
}

DensityMatrix partial_trace(const DensityMatrix& rho, const SubsystemSplit& split) {
  return DensityMatrix(partial_trace_matrix(rho.matrix(), split));
}

double coherence_norm(const DensityMatrix& rho, const SubsystemSplit& block_split) {
  block_split.check(rho.dim());
  std::vector<std::size_t> di, dj;
  double sum_sq = 0.0;
  const std::size_t n = rho.dim();
  for (std::size_t i = 0; i < n; ++i) {
    decompose(i, block_split.dims, di);
    for (std::size_t j = 0; j < n; ++j) {
      decompose(j, block_split.dims, dj);
      if (di[block_split.keep_index] < dj[block_split.keep_index]) sum_sq += std::norm(rho(i, j));
    }
  }
  return std::sqrt(sum_sq);
}

}  // namespace collapse
