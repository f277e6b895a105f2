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

#include "collapse_lab/collision.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "collapse_lab/errors.hpp"

namespace collapse {
namespace {

double max_abs(const ComplexMatrix& m) { return m.cwiseAbs().maxCoeff(); }

SectorEnsemble random_ensemble(std::size_t k, CounterRng& rng) {
  std::vector<double> w(k);
  double sum = 0.0;
  for (auto& x : w) sum += (x = rng.uniform_pos());
  for (auto& x : w) x /= sum;
  return SectorEnsemble::from_weights(w).with_random_phases(rng);
}

// Gain written as sum_k'' p_k'' M M^dagger with M(k', q') = t[k', q', k'', q],
// conjugated by the phase diagonal; loss from Frobenius norms of the columns.
ComplexMatrix delta_oracle(const SectorEnsemble& ens, const ToyTMatrix& t, double eps) {
  const auto K = static_cast<Eigen::Index>(ens.size());
  const auto Q = static_cast<Eigen::Index>(t.momentum_labels());
  ComplexMatrix gain = ComplexMatrix::Zero(K, K);
  ComplexMatrix loss = ComplexMatrix::Zero(K, K);
  for (Eigen::Index src = 0; src < K; ++src) {
    ComplexMatrix m(K, Q);
    for (Eigen::Index ko = 0; ko < K; ++ko) {
      for (Eigen::Index qo = 0; qo < Q; ++qo) m(ko, qo) = t.at(ko, qo, src, t.incoming);
    }
    gain += ens.weights[src] * (m * m.adjoint());
    loss(src, src) = ens.weights[src] * m.squaredNorm();
  }
  Eigen::VectorXcd phase(K);
  for (Eigen::Index k = 0; k < K; ++k) phase(k) = std::polar(1.0, ens.phases[k]);
  return eps * (phase.asDiagonal() * gain * phase.conjugate().asDiagonal() - loss);
}

ToyTMatrix random_tmatrix(const SectorEnsemble& ens, std::size_t q, CounterRng& rng, bool saturate = false) {
  ToyTMatrixOptions opt;
  opt.coupling = 0.9;
  opt.saturate_sum_rule = saturate;
  return generate_toy_tmatrix(ens, q, opt, rng);
}

TEST(CollisionDelta, ZeroTMatrixGivesZero) {
  const auto ens = SectorEnsemble::from_weights({0.5, 0.3, 0.2});
  const ToyTMatrix t(3, 2);
  EXPECT_EQ(max_abs(collision_delta(ens, t, 0.5)), 0.0);
}

TEST(CollisionDelta, ZeroEpsGivesZero) {
  CounterRng rng(1, 0);
  const auto ens = random_ensemble(4, rng);
  EXPECT_EQ(max_abs(collision_delta(ens, random_tmatrix(ens, 3, rng), 0.0)), 0.0);
}

TEST(CollisionDelta, MatchesIndependentOracle) {
  CounterRng rng(2, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto ens = random_ensemble(4, rng);
    const auto t = random_tmatrix(ens, 3, rng);
    EXPECT_LE(max_abs(collision_delta(ens, t, 0.01) - delta_oracle(ens, t, 0.01)), 1e-15);
  }
}

TEST(CollisionDelta, TracelessAndHermitian) {
  CounterRng rng(3, 0);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto ens = random_ensemble(4, rng);
    const auto d = collision_delta(ens, random_tmatrix(ens, 3, rng), 0.01);
    ASSERT_LE(std::abs(d.trace()), 1e-12);
    ASSERT_LE(max_abs(d - d.adjoint()), 1e-12);
  }
}

TEST(CollisionDelta, LinearInEps) {
  CounterRng rng(4, 0);
  const auto ens = random_ensemble(5, rng);
  const auto t = random_tmatrix(ens, 2, rng);
  EXPECT_LE(max_abs(collision_delta(ens, t, 0.2) - 2.0 * collision_delta(ens, t, 0.1)), 1e-15);
}

TEST(CollisionDelta, RejectsSuperUnitaryT) {
  const auto ens = SectorEnsemble::from_weights({0.5, 0.5});
  ToyTMatrix t(2, 1);
  t.at(0, 0, 0, 0) = 0.9;
  t.at(1, 0, 0, 0) = 0.9;
  EXPECT_THROW(collision_delta(ens, t, 0.1), ModelError);
}

TEST(CollisionDelta, RandomPhasesAverageOutCoherences) {
  CounterRng rng(5, 0);
  const auto base = random_ensemble(4, rng);
  const auto t = random_tmatrix(base, 3, rng);
  const auto single = collision_delta(base, t, 0.01);
  const int draws = 10000;
  ComplexMatrix sum = ComplexMatrix::Zero(4, 4);
  CounterRng phases(5, 1);
  for (int i = 0; i < draws; ++i) sum += collision_delta(base.with_random_phases(phases), t, 0.01);
  sum /= static_cast<double>(draws);
  for (Eigen::Index i = 0; i < 4; ++i) {
    for (Eigen::Index j = 0; j < 4; ++j) {
      if (i == j) {
        EXPECT_NEAR(std::abs(sum(i, i) - single(i, i)), 0.0, 1e-15);
      } else {
        EXPECT_LE(std::abs(sum(i, j)), 3.0 / std::sqrt(draws) * std::abs(single(i, j)));
      }
    }
  }
}

TEST(TransitionProbability, EqualAmplitudesSplitEvenly) {
  const std::size_t K = 4;
  const auto ens = SectorEnsemble::from_weights({0.25, 0.25, 0.25, 0.25});
  ToyTMatrix t(K, 1);
  for (std::size_t ko = 0; ko < K; ++ko) t.at(ko, 0, 0, 0) = 0.5;
  const auto wp = WavePacketParams::from_density(1.0, 0.0, 1.0);
  for (std::size_t ko = 0; ko < K; ++ko) EXPECT_NEAR(transition_probability(t, wp, 0, ko), 0.25, 1e-15);
}

TEST(TransitionProbability, SumRuleOnSaturatedT) {
  CounterRng rng(6, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto ens = random_ensemble(4, rng);
    const auto t = random_tmatrix(ens, 3, rng, true);
    const auto wp = WavePacketParams::from_density(0.5 + rng.uniform(), rng.uniform() * 2.0, 1.0);
    for (std::size_t k = 0; k < 4; ++k) {
      double sigma = 0.0, prob = 0.0;
      for (std::size_t kp = 0; kp < 4; ++kp) {
        sigma += cross_section(t, wp, k, kp);
        prob += transition_probability(t, wp, k, kp);
      }
      EXPECT_NEAR(prob, 1.0, 1e-8);
      EXPECT_NEAR(sigma / (2.0 * std::numbers::pi * wp.size * wp.size), 1.0, 1e-8);
    }
  }
}

TEST(TransitionProbability, InvariantWhenSigmaAndAreaScaleTogether) {
  CounterRng rng(7, 0);
  const auto ens = random_ensemble(3, rng);
  // A single momentum label makes the packet weights independent of L.
  const auto t = random_tmatrix(ens, 1, rng);
  const auto small = WavePacketParams::from_density(8.0, 0.0, 1.0);
  const auto large = WavePacketParams::from_density(1.0, 0.0, 1.0);
  EXPECT_NEAR(large.size, 2.0 * small.size, 1e-15);
  const double ratio = cross_section(t, large, 0, 1) / cross_section(t, small, 0, 1);
  EXPECT_NEAR(ratio, 4.0, 1e-12);
  EXPECT_NEAR(transition_probability(t, large, 0, 1), transition_probability(t, small, 0, 1), 1e-15);
}

TEST(WavePacket, SizeFromDensity) {
  const auto wp = WavePacketParams::from_density(27.0, 0.0, 1.0);
  EXPECT_NEAR(wp.size, 1.0 / 3.0, 1e-12);
  EXPECT_THROW(WavePacketParams::from_density(0.0, 0.0, 1.0), ModelError);
}

TEST(ToyTMatrix, EnergyMatchingZeroesForbiddenEntries) {
  auto ens = SectorEnsemble::from_weights({0.5, 0.5});
  ens.energies = {0.0, 1.0};
  ToyTMatrixOptions opt;
  opt.momentum_energies = {0.0, 1.0};
  CounterRng rng(8, 0);
  const auto t = generate_toy_tmatrix(ens, 2, opt, rng);
  for (std::size_t ko = 0; ko < 2; ++ko) {
    for (std::size_t qo = 0; qo < 2; ++qo) {
      for (std::size_t ki = 0; ki < 2; ++ki) {
        for (std::size_t qi = 0; qi < 2; ++qi) {
          const bool allowed = ens.energies[ko] + opt.momentum_energies[qo] == ens.energies[ki] + opt.momentum_energies[qi];
          if (!allowed) EXPECT_EQ(t.at(ko, qo, ki, qi), Complex(0.0));
        }
      }
    }
  }
  EXPECT_NO_THROW(t.check_subunitary());
}

TEST(PerturbativeUpdate, ZeroDelta) {
  const auto ens = SectorEnsemble::from_weights({0.6, 0.3, 0.1});
  const auto up = perturbative_sector_update(ens, ComplexMatrix::Zero(3, 3));
  for (double s : up.weight_shifts) EXPECT_EQ(s, 0.0);
  EXPECT_EQ(max_abs(up.mixing), 0.0);
}

TEST(PerturbativeUpdate, DiagonalDelta) {
  const auto ens = SectorEnsemble::from_weights({0.6, 0.3, 0.1});
  ComplexMatrix d = ComplexMatrix::Zero(3, 3);
  d.diagonal() << 0.01, -0.004, -0.006;
  const auto up = perturbative_sector_update(ens, d);
  EXPECT_EQ(up.weight_shifts, (std::vector<double>{0.01, -0.004, -0.006}));
  EXPECT_EQ(max_abs(up.mixing), 0.0);
  const auto exact = rediagonalize_oracle(ens, d);
  EXPECT_EQ(exact.unitarity_defect, 0.0);
  EXPECT_NEAR(exact.weights[0], 0.61, 1e-15);
}

TEST(PerturbativeUpdate, MixingCarriesGapDenominators) {
  const auto ens = SectorEnsemble::from_weights({0.6, 0.3, 0.1});
  ComplexMatrix d = ComplexMatrix::Zero(3, 3);
  d(1, 0) = Complex(0.001, 0.002);
  d(0, 1) = std::conj(d(1, 0));
  const auto up = perturbative_sector_update(ens, d);
  EXPECT_NEAR(std::abs(up.mixing(1, 0) - d(1, 0) / 0.3), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(up.mixing(0, 1) - d(0, 1) / -0.3), 0.0, 1e-15);
}

TEST(PerturbativeUpdate, DegenerateWeightsNameThePair) {
  const auto ens = SectorEnsemble::from_weights({0.4, 0.2, 0.4});
  ComplexMatrix d = ComplexMatrix::Zero(3, 3);
  d(0, 2) = 1e-4;
  d(2, 0) = 1e-4;
  try {
    perturbative_sector_update(ens, d);
    FAIL() << "expected DegeneracyError";
  } catch (const DegeneracyError& e) {
    EXPECT_EQ(e.first, 0u);
    EXPECT_EQ(e.second, 2u);
  }
}

TEST(RediagonalizeOracle, ZeroDelta) {
  const auto ens = SectorEnsemble::from_weights({0.6, 0.3, 0.1});
  const auto exact = rediagonalize_oracle(ens, ComplexMatrix::Zero(3, 3));
  EXPECT_EQ(exact.weights, ens.weights);
  EXPECT_EQ(exact.unitarity_defect, 0.0);
  EXPECT_EQ(max_abs(exact.basis - ComplexMatrix::Identity(3, 3)), 0.0);
}

TEST(RediagonalizeOracle, GenericDeltaLeaksNorm) {
  CounterRng rng(9, 0);
  const auto ens = SectorEnsemble::from_weights({0.4, 0.3, 0.2, 0.1}).with_random_phases(rng);
  const auto d = collision_delta(ens, random_tmatrix(ens, 3, rng), 1e-3);
  EXPECT_GT(rediagonalize_oracle(ens, d).unitarity_defect, 0.0);
}

TEST(RediagonalizeOracle, RejectsNonPsdResult) {
  const auto ens = SectorEnsemble::from_weights({0.9, 0.1});
  ComplexMatrix d(2, 2);
  d << 0.0, 0.5, 0.5, 0.0;
  EXPECT_THROW(rediagonalize_oracle(ens, d), ModelError);
}

TEST(RediagonalizeOracle, PerturbationErrorIsQuadratic) {
  CounterRng rng(10, 0);
  const auto ens = SectorEnsemble::from_weights({0.6, 0.3, 0.1}).with_random_phases(rng);
  const auto t = random_tmatrix(ens, 3, rng);
  auto error = [&](double eps) {
    const auto d = collision_delta(ens, t, eps);
    const auto pert = perturbative_sector_update(ens, d);
    const auto exact = rediagonalize_oracle(ens, d);
    double err = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
      const double shift = exact.weights[k] - ens.weights[k];
      err += (shift - pert.weight_shifts[k]) * (shift - pert.weight_shifts[k]);
    }
    return std::sqrt(err);
  };
  const double ratio = error(1e-3) / error(5e-4);
  EXPECT_GT(ratio, 3.2);
  EXPECT_LT(ratio, 4.8);
  // Exact second-order check: sum_k' |d_k'k|^2 / (p_k - p_k').
  const auto d = collision_delta(ens, t, 1e-3);
  const auto exact = rediagonalize_oracle(ens, d);
  for (std::size_t k = 0; k < 3; ++k) {
    double second = 0.0;
    for (std::size_t kp = 0; kp < 3; ++kp) {
      if (kp != k) {
        second += std::norm(d(static_cast<Eigen::Index>(kp), static_cast<Eigen::Index>(k))) /
                  (ens.weights[k] - ens.weights[kp]);
      }
    }
    const double first = d(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)).real();
    EXPECT_NEAR(exact.weights[k] - ens.weights[k], first + second, 1e-9);
  }
}

}  // namespace
}  // namespace collapse
