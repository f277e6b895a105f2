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

// Brownian reduction of channel probabilities. The probabilities diffuse on
// the simplex as a martingale whose covariance vanishes on faces; every
// trajectory ends on a vertex, and the chance of ending on vertex j is the
// starting p_j. A Monte Carlo engine and a finite-difference Fokker-Planck
// solver give two independent routes to the same absorption statistics.

#ifndef COLLAPSE_LAB_REDUCTION_HPP
#define COLLAPSE_LAB_REDUCTION_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "collapse_lab/channel_simplex.hpp"
#include "collapse_lab/rng.hpp"
#include "collapse_lab/tolerances.hpp"

namespace collapse {

/// Covariance rate A_jj'(p) of the channel increments: Cov(dp) = A(p) dt.
class CovarianceModel {
 public:
  /// Shape of A(p) before multiplication by the rate lambda.
  using Shape = std::function<Eigen::MatrixXd(std::span<const double>)>;

  /// A_jj' = lambda p_j (delta_jj' - p_j').
  static CovarianceModel wright_fisher(double lambda);
  /// Caller-supplied family. The shape must be symmetric with zero row sums.
  static CovarianceModel custom(std::string family, double lambda, Shape shape);

  double rate() const { return lambda_; }
  const std::string& family() const { return family_; }
  Eigen::MatrixXd matrix(std::span<const double> p) const;

 private:
  CovarianceModel(std::string family, double lambda, Shape shape);

  std::string family_;
  double lambda_;
  Shape shape_;
};

struct BrownianOptions {
  /// Largest admissible lambda * dt.
  double max_rate_step = 0.01;
  double eigen_floor = default_tolerances().eigen_floor;
};

/// One explicit step. The increment is Gaussian with covariance A(p) dt,
/// realized through the eigen-decomposition of A restricted to the live
/// (positive) channels; dead channels get exactly zero. Overshoots below 0
/// are clipped and the clipped mass is taken from the other live channels
/// in proportion to their size. The result is canonical (ordered sum == 1).
/// Throws StepSizeError when lambda * dt exceeds the cap.
ChannelSimplex brownian_step(const ChannelSimplex& p, const CovarianceModel& model, double dt,
                             CounterRng& rng, const BrownianOptions& options = {});

struct AbsorptionOptions {
  double absorb_tol = default_tolerances().absorb;
  std::size_t max_steps = 10'000'000;
  bool record_trajectory = false;
  BrownianOptions step;
};

struct AbsorptionRecord {
  std::size_t winner = 0;
  double time = 0.0;
  std::size_t steps = 0;
  /// State after every step (only when record_trajectory is set).
  std::vector<std::vector<double>> trajectory;
};

/// Iterates brownian_step until some channel reaches 1 - absorb_tol, then
/// snaps to that vertex. Throws NonAbsorptionError after max_steps.
AbsorptionRecord run_to_absorption(const ChannelSimplex& p0, const CovarianceModel& model,
                                   double dt, CounterRng& rng,
                                   const AbsorptionOptions& options = {});

struct TailFit {
  double rate = 0.0;
  double rate_stderr = 0.0;
  double r_squared = 0.0;
  std::size_t points = 0;
};

/// Exponential fit of the empirical survival curve over its upper half
/// (absorption times past the median), ignoring the last `min_survivors`
/// points where the curve is dominated by counting noise.
TailFit fit_survival_tail(std::span<const double> absorption_times, std::size_t min_survivors = 10);

struct BornRuleSummary {
  std::size_t trajectories = 0;
  std::vector<std::size_t> counts;
  std::vector<double> frequencies;
  /// 3-sigma binomial half-width around the expected p0_j.
  std::vector<double> halfwidths;
  /// Trajectory i's winner and time (trajectory i uses RNG stream i).
  std::vector<std::size_t> winners;
  std::vector<double> absorption_times;
  double mean_time = 0.0;
  TailFit tail;
  std::vector<double> histogram_edges;
  std::vector<std::size_t> histogram_counts;
};

/// N independent trajectories to absorption, run in parallel with
/// counter-derived streams, folded in trajectory order. Throws
/// NonAbsorptionError reporting how many trajectories failed.
BornRuleSummary born_rule_ensemble(const ChannelSimplex& p0, const CovarianceModel& model,
                                   double dt, std::size_t trajectories, std::uint64_t seed,
                                   const AbsorptionOptions& options = {},
                                   std::size_t histogram_bins = 40);

/// Fraction of trajectories that ended on `channel` no later than each time.
std::vector<double> absorbed_fraction_by_time(const BornRuleSummary& summary, std::size_t channel,
                                              std::span<const double> times);

struct FokkerPlanckOptions {
  /// Times at which to store snapshots (sorted, within (0, t_end]).
  std::vector<double> checkpoints;
  /// Explicit step; 0 picks safety * stability bound.
  double dt = 0.0;
  double safety = 0.9;
  /// Number of evenly spaced interior-mass samples kept for decay fits.
  std::size_t mass_samples = 400;
};

struct FokkerPlanckSnapshot {
  double time = 0.0;
  double absorbed_zero = 0.0;  // mass absorbed at p1 = 0
  double absorbed_one = 0.0;   // mass absorbed at p1 = 1
  double interior = 0.0;
  /// Density Q at the interior nodes p = i / grid_n, i = 1 .. grid_n - 1.
  std::vector<double> density;
};

struct FokkerPlanckResult {
  std::size_t grid_n = 0;
  double dt = 0.0;
  double stability_bound = 0.0;
  std::vector<FokkerPlanckSnapshot> snapshots;  // checkpoints, then t_end
  std::vector<double> mass_times;
  std::vector<double> interior_mass;

  const FokkerPlanckSnapshot& final() const { return snapshots.back(); }
};

/// Largest stable explicit step for the two-channel solver.
double fokker_planck_stability_bound(const CovarianceModel& model, std::size_t grid_n);

/// Two-channel Fokker-Planck equation for p = p1 on (0, 1):
///   dQ/dt = d^2/dp^2 [ (A_11(p) / 2) Q ]
/// with absorbing ends. Conservative finite differences on the nodes
/// p_i = i / grid_n; the flux through each end accumulates into the
/// absorbed masses. The initial delta at p0 is split between the two
/// nearest nodes so that its mean is exactly p0. Total mass and the
/// first moment (interior mean + mass at 1) are conserved by the scheme.
/// Throws StepSizeError (with the admissible bound) for an unstable dt.
FokkerPlanckResult fokker_planck_2ch(double p0, const CovarianceModel& model, std::size_t grid_n,
                                     double t_end, const FokkerPlanckOptions& options = {});

/// Decay rate of the interior mass over samples with time >= t_from.
TailFit interior_decay_rate(const FokkerPlanckResult& result, double t_from);

}  // namespace collapse

#endif  // COLLAPSE_LAB_REDUCTION_HPP
