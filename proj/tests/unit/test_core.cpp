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

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "collapse_lab/errors.hpp"
#include "collapse_lab/rng.hpp"

namespace collapse {
namespace {

constexpr double kExact = 1e-12;

double max_abs(const ComplexMatrix& m) { return m.cwiseAbs().maxCoeff(); }

// G G^dagger / Tr, with complex Gaussian G.
DensityMatrix random_density(std::size_t dim, CounterRng& rng) {
  const auto n = static_cast<Eigen::Index>(dim);
  ComplexMatrix g(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) g(i, j) = Complex(rng.normal(), rng.normal());
  }
  ComplexMatrix m = g * g.adjoint();
  m /= m.trace().real();
  m = 0.5 * (m + m.adjoint()).eval();
  return DensityMatrix(m);
}

// Plain index arithmetic for Tr_B of a 2-factor matrix, keeping A.
ComplexMatrix trace_out_second(const ComplexMatrix& m, std::size_t da, std::size_t db) {
  ComplexMatrix out = ComplexMatrix::Zero(static_cast<Eigen::Index>(da), static_cast<Eigen::Index>(da));
  for (std::size_t i = 0; i < da; ++i) {
    for (std::size_t j = 0; j < da; ++j) {
      for (std::size_t b = 0; b < db; ++b) {
        out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) +=
            m(static_cast<Eigen::Index>(i * db + b), static_cast<Eigen::Index>(j * db + b));
      }
    }
  }
  return out;
}

TEST(DensityMatrix, RejectsNonHermitian) {
  ComplexMatrix m(2, 2);
  m << 0.5, Complex(0.1, 0.0), Complex(0.2, 0.0), 0.5;
  EXPECT_THROW(DensityMatrix{m}, ModelError);
}

TEST(DensityMatrix, RejectsBadTrace) {
  ComplexMatrix m = ComplexMatrix::Identity(2, 2);
  EXPECT_THROW(DensityMatrix{m}, ModelError);
}

TEST(DensityMatrix, RejectsNegativeEigenvalue) {
  ComplexMatrix m(2, 2);
  m << 0.5, 0.8, 0.8, 0.5;
  EXPECT_THROW(DensityMatrix{m}, ModelError);
}

TEST(DensityMatrix, RejectsNonFinite) {
  ComplexMatrix m(1, 1);
  m << Complex(std::nan(""), 0.0);
  EXPECT_THROW(DensityMatrix{m}, ModelError);
}

TEST(DensityMatrix, ToleratesTinyAsymmetry) {
  ComplexMatrix m(2, 2);
  m << 0.5, Complex(0.1, 1e-13), Complex(0.1, 0.0), 0.5;
  EXPECT_NO_THROW(DensityMatrix{m});
}

TEST(TensorProduct, MaximallyMixed) {
  const auto out = tensor_product(DensityMatrix::maximally_mixed(2), DensityMatrix::maximally_mixed(2));
  EXPECT_LE(max_abs(out.matrix() - ComplexMatrix::Identity(4, 4) / 4.0), kExact);
}

TEST(TensorProduct, PureProduct) {
  const std::vector<Complex> one{0.0, 1.0};
  const std::vector<Complex> a0{Complex(0.6, 0.0), Complex(0.0, 0.8)};
  const auto out = tensor_product(DensityMatrix::pure(one), DensityMatrix::pure(a0));
  Eigen::VectorXcd v(4);
  v << 0.0, 0.0, Complex(0.6, 0.0), Complex(0.0, 0.8);
  EXPECT_LE(max_abs(out.matrix() - v * v.adjoint()), kExact);
}

TEST(TensorProduct, Diagonal) {
  const std::vector<double> a{0.3, 0.7};
  const std::vector<double> b{0.5, 0.5};
  const auto out = tensor_product(DensityMatrix::diagonal(a), DensityMatrix::diagonal(b));
  const std::vector<double> expected{0.15, 0.15, 0.35, 0.35};
  for (Eigen::Index i = 0; i < 4; ++i) {
    for (Eigen::Index j = 0; j < 4; ++j) {
      EXPECT_NEAR(std::abs(out.matrix()(i, j) - (i == j ? expected[i] : 0.0)), 0.0, kExact);
    }
  }
}

TEST(TensorProduct, RejectsOversizedResult) {
  Tolerances tol;
  tol.max_dim = 8;
  EXPECT_THROW(tensor_product(DensityMatrix::maximally_mixed(3), DensityMatrix::maximally_mixed(3), tol),
               DimensionError);
}

TEST(PartialTrace, RecoversEachFactor) {
  CounterRng rng(5, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = random_density(2 + trial % 3, rng);
    const auto b = random_density(1 + trial % 4, rng);
    const auto ab = tensor_product(a, b);
    const auto ra = partial_trace(ab, SubsystemSplit{{a.dim(), b.dim()}, 0});
    const auto rb = partial_trace(ab, SubsystemSplit{{a.dim(), b.dim()}, 1});
    EXPECT_LE(max_abs(ra.matrix() - a.matrix()), kExact);
    EXPECT_LE(max_abs(rb.matrix() - b.matrix()), kExact);
  }
}

TEST(PartialTrace, MatchesIndexLoopOracle) {
  CounterRng rng(6, 0);
  const auto rho = random_density(6, rng);
  const auto out = partial_trace(rho, SubsystemSplit{{2, 3}, 0});
  EXPECT_LE(max_abs(out.matrix() - trace_out_second(rho.matrix(), 2, 3)), kExact);
}

TEST(PartialTrace, EntangledPointerState) {
  // c1 |A1>|1> + c2 |A2>|2>, apparatus first; trace out the apparatus.
  const Complex c1(0.6, 0.0), c2(0.0, 0.8);
  const std::vector<Complex> psi{c1, 0.0, 0.0, c2};
  const auto out = partial_trace(DensityMatrix::pure(psi), SubsystemSplit{{2, 2}, 1});
  EXPECT_NEAR(out(0, 0).real(), 0.36, kExact);
  EXPECT_NEAR(out(1, 1).real(), 0.64, kExact);
  EXPECT_NEAR(std::abs(out(0, 1)), 0.0, kExact);
}

TEST(PartialTrace, MaximallyMixedStaysMixed) {
  const auto out = partial_trace(DensityMatrix::maximally_mixed(4), SubsystemSplit{{2, 2}, 0});
  EXPECT_LE(max_abs(out.matrix() - ComplexMatrix::Identity(2, 2) / 2.0), kExact);
}

TEST(PartialTrace, ThreeFactorsMiddleKept) {
  CounterRng rng(7, 0);
  const auto a = random_density(2, rng);
  const auto b = random_density(3, rng);
  const auto c = random_density(2, rng);
  const auto abc = tensor_product(tensor_product(a, b), c);
  const auto out = partial_trace(abc, SubsystemSplit{{2, 3, 2}, 1});
  EXPECT_LE(max_abs(out.matrix() - b.matrix()), kExact);
}

TEST(PartialTrace, LinearAndTracePreserving) {
  CounterRng rng(8, 0);
  const SubsystemSplit split{{3, 2}, 1};
  for (int trial = 0; trial < 20; ++trial) {
    const auto r1 = random_density(6, rng);
    const auto r2 = random_density(6, rng);
    const double w = rng.uniform();
    const ComplexMatrix mix = w * r1.matrix() + (1.0 - w) * r2.matrix();
    const auto lhs = partial_trace(DensityMatrix(mix), split);
    const ComplexMatrix rhs =
        w * partial_trace(r1, split).matrix() + (1.0 - w) * partial_trace(r2, split).matrix();
    EXPECT_LE(max_abs(lhs.matrix() - rhs), kExact);
    EXPECT_NEAR(lhs.matrix().trace().real(), 1.0, 1e-10);
  }
}

TEST(PartialTrace, OutputsAreValidDensityMatrices) {
  CounterRng rng(9, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto rho = random_density(8, rng);
    for (std::size_t keep = 0; keep < 3; ++keep) {
      const auto out = partial_trace(rho, SubsystemSplit{{2, 2, 2}, keep});
      EXPECT_TRUE(diagnose(out.matrix()).valid());
    }
  }
}

TEST(PartialTrace, RejectsInconsistentSplit) {
  const auto rho = DensityMatrix::maximally_mixed(4);
  EXPECT_THROW(partial_trace(rho, SubsystemSplit{{2, 3}, 0}), DimensionError);
  EXPECT_THROW(partial_trace(rho, SubsystemSplit{{2, 2}, 2}), DimensionError);
  EXPECT_THROW(partial_trace(rho, SubsystemSplit{{4, 0}, 0}), DimensionError);
  EXPECT_THROW(partial_trace(rho, SubsystemSplit{{}, 0}), DimensionError);
}

TEST(CoherenceNorm, BlockDiagonalIsZero) {
  const std::vector<double> w{0.1, 0.2, 0.3, 0.4};
  EXPECT_EQ(coherence_norm(DensityMatrix::diagonal(w), SubsystemSplit{{2, 2}, 0}), 0.0);
  // Coherence inside one channel block does not count.
  ComplexMatrix m = ComplexMatrix::Zero(4, 4);
  m.topLeftCorner(2, 2) << 0.25, 0.2, 0.2, 0.25;
  m.bottomRightCorner(2, 2) << 0.25, 0.0, 0.0, 0.25;
  EXPECT_EQ(coherence_norm(DensityMatrix(m), SubsystemSplit{{2, 2}, 0}), 0.0);
}

TEST(CoherenceNorm, EqualSuperposition) {
  const double h = 1.0 / std::sqrt(2.0);
  // Pointer first, apparatus second: c1 |1>|A1> + c2 |2>|A2>.
  const std::vector<Complex> psi{h, 0.0, 0.0, h};
  EXPECT_NEAR(coherence_norm(DensityMatrix::pure(psi), SubsystemSplit{{2, 2}, 0}), 0.5, kExact);
}

TEST(CoherenceNorm, InvariantUnderChannelDiagonalUnitary) {
  CounterRng rng(10, 0);
  const SubsystemSplit split{{2, 3}, 0};
  for (int trial = 0; trial < 20; ++trial) {
    const auto rho = random_density(6, rng);
    // Independent random unitaries on each channel block.
    ComplexMatrix u = ComplexMatrix::Zero(6, 6);
    for (Eigen::Index blk = 0; blk < 2; ++blk) {
      ComplexMatrix g(3, 3);
      for (Eigen::Index i = 0; i < 3; ++i) {
        for (Eigen::Index j = 0; j < 3; ++j) g(i, j) = Complex(rng.normal(), rng.normal());
      }
      u.block(3 * blk, 3 * blk, 3, 3) = Eigen::HouseholderQR<ComplexMatrix>(g).householderQ() * ComplexMatrix::Identity(3, 3);
    }
    ComplexMatrix rotated = u * rho.matrix() * u.adjoint();
    rotated = 0.5 * (rotated + rotated.adjoint()).eval();
    EXPECT_NEAR(coherence_norm(DensityMatrix(rotated), split), coherence_norm(rho, split), 1e-12);
  }
}

TEST(CoherenceNorm, DampedOffDiagonalScalesExactly) {
  const double h = 1.0 / std::sqrt(2.0);
  const double rate = 2.0, t = 0.7;
  ComplexMatrix m(2, 2);
  m << 0.5, 0.5 * std::exp(-rate * t), 0.5 * std::exp(-rate * t), 0.5;
  const std::vector<Complex> psi{h, h};
  const double start = coherence_norm(DensityMatrix::pure(psi), SubsystemSplit{{2}, 0});
  EXPECT_NEAR(coherence_norm(DensityMatrix(m), SubsystemSplit{{2}, 0}), start * std::exp(-rate * t), kExact);
}

}  // namespace
}  // namespace collapse
