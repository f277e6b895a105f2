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

// Joint reduction of an entangled spin pair measured by two separated
// apparatuses. Each apparatus only kicks its own marginal; the joint grid
// still ends on one cell with probability |c_ab|^2.
//
// Cells are ordered (++, +-, -+, --): cell(alpha, beta) = 2 * alpha + beta
// with 0 meaning "+".

#ifndef COLLAPSE_LAB_EPR_HPP
#define COLLAPSE_LAB_EPR_HPP

#include <Eigen/Dense>
#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "collapse_lab/core.hpp"
#include "collapse_lab/rng.hpp"
#include "collapse_lab/tolerances.hpp"

namespace collapse {

constexpr std::size_t cell(std::size_t alpha, std::size_t beta) { return 2 * alpha + beta; }

/// a |+-> + b |-+> along z, analyzed along z' at angle theta.
struct SpinPairState {
  Complex a{1.0, 0.0};
  Complex b{0.0, 0.0};
  double theta = 0.0;

  void validate() const;
};

/// Amplitudes in the rotated basis, cell order.
std::array<Complex, 4> rotate_coefficients(const SpinPairState& state);

struct JointChannelGrid {
  std::array<double, 4> q{};
  std::array<bool, 4> frozen{};

  /// (q(++) + q(-+)) + (q(+-) + q(--)); exactly 1 for canonical grids.
  double total() const;
  double row_mass(std::size_t alpha) const;
  double column_mass(std::size_t beta) const;
  /// Index of a cell equal to 1, or 4.
  std::size_t vertex() const;
  /// Throws ModelError on negative or non-finite cells, positive frozen
  /// cells, or a total off 1 by more than tol.simplex_sum.
  void validate(const Tolerances& tol = default_tolerances()) const;
};

/// Cells below this weight start frozen.
inline constexpr double kFreezeFloor = 1e-15;

/// q = |c|^2 with tiny cells frozen, written in canonical form.
JointChannelGrid joint_weights(const std::array<Complex, 4>& c);

/// Local rates of the two apparatuses.
struct BlockCovariance {
  double lambda1 = 1.0;
  double lambda2 = 1.0;

  void validate() const;
  /// Covariance rate of the cell increments for an interior grid:
  ///   V1 s_a s_a' [b == b'] + V2 s_b s_b' [a == a']
  /// with s_+ = 1, s_- = -1, V1 = lambda1 m+ m- / 2, V2 = lambda2 n+ n- / 2.
  Eigen::Matrix4d model(const JointChannelGrid& grid) const;
};

struct KickOptions {
  bool apparatus1 = true;
  bool apparatus2 = true;
  double max_rate_step = 0.01;
  /// Cells that would land at or below this are frozen at 0.
  double freeze_tol = 1e-12;
};

/// One step of local kicks. Apparatus 1 draws an independent kick u_b per
/// column with variance lambda1 m+ m- dt / 2 and adds (+u_b, -u_b) to the
/// cells (+b, -b); apparatus 2 does the same per row with lambda2 n+ n-.
/// The alpha marginal therefore moves by a Wright-Fisher kick of variance
/// lambda1 m+ m- dt driven by apparatus 1 alone, and symmetrically for beta.
///
/// A frozen cell's share is rerouted to the other cell of its row (for
/// apparatus 1) or column (for apparatus 2), which keeps the reroute inside
/// the kicking apparatus's own marginal. Frozen cells stay exactly 0 and
/// total() stays exactly 1. With lambda2 = 0 and no frozen cell the column
/// masses are bitwise unchanged.
///
/// rng1 and rng2 should be disjoint substreams. If `increment` is given it
/// receives the realized cell increments.
JointChannelGrid local_kick_step(const JointChannelGrid& grid, const BlockCovariance& cov, double dt,
                                 CounterRng& rng1, CounterRng& rng2, const KickOptions& options = {},
                                 std::array<double, 4>* increment = nullptr);

/// Cell increments recorded from a pre-step grid.
struct KickSample {
  std::array<double, 4> before{};
  std::array<double, 4> increment{};
};

/// `count` independent single steps from one grid; sample i uses stream i.
std::vector<KickSample> sample_single_kicks(const JointChannelGrid& grid, const BlockCovariance& cov,
                                            double dt, std::size_t count, std::uint64_t seed,
                                            const KickOptions& options = {});

struct JointReductionOptions {
  double absorb_tol = default_tolerances().absorb;
  std::size_t max_steps = 10'000'000;
  /// Apparatus 2 starts only after the alpha marginal has absorbed.
  bool sequential = false;
  /// Interior increments (all cells > 0.05) kept per trajectory.
  std::size_t interior_samples_per_trajectory = 0;
  KickOptions kick;
};

struct JointReductionSummary {
  std::size_t trajectories = 0;
  std::array<double, 4> expected{};
  std::array<std::size_t, 4> counts{};
  std::array<double, 4> frequencies{};
  std::array<double, 4> halfwidths{};
  std::array<double, 2> expected_marginal1{};
  std::array<double, 2> marginal1_frequencies{};
  std::array<double, 2> marginal1_halfwidths{};
  std::vector<std::size_t> outcomes;
  std::vector<double> absorption_times;
  std::vector<KickSample> interior_samples;
  /// Trajectories where a frozen cell became positive; 0 by construction.
  std::size_t frozen_violations = 0;
};

/// N trajectories to a single cell. Trajectory i uses substreams 1 and 2 of
/// stream i for the two apparatuses. Throws NonAbsorptionError with the
/// failure count.
JointReductionSummary run_joint_reduction(const SpinPairState& state, const BlockCovariance& cov,
                                          double dt, std::size_t trajectories, std::uint64_t seed,
                                          const JointReductionOptions& options = {});

struct BlockEntry {
  std::size_t i = 0;
  std::size_t j = 0;
  /// alpha != alpha' and beta != beta': required to vanish.
  bool block_zero = false;
  double empirical = 0.0;
  double model = 0.0;
  double standard_error = 0.0;
  double z = 0.0;
  bool pass = false;
};

struct BlockCheckReport {
  bool inconclusive = false;
  bool pass = false;
  std::size_t samples = 0;
  std::vector<BlockEntry> entries;
  std::string note;
};

/// Compares second moments of interior increments (all cells of `before`
/// above 0.05) with the model: block-zero entries need |z| <= 3, the rest
/// must lie within 10% of the model average. Fewer than min_samples interior
/// increments gives an inconclusive report.
BlockCheckReport covariance_block_check(const std::vector<KickSample>& samples, const BlockCovariance& cov,
                                        double dt, std::size_t min_samples = 10'000);

}  // namespace collapse

#endif  // COLLAPSE_LAB_EPR_HPP
