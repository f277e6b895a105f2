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

// Entanglement cascade inside one beta region, the diffusive frontier that
// sweeps across such regions, and the aggregation of few-atom fluctuations
// into fluctuations of the channel probabilities.

#ifndef COLLAPSE_LAB_CASCADE_HPP
#define COLLAPSE_LAB_CASCADE_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "collapse_lab/channel_simplex.hpp"
#include "collapse_lab/rng.hpp"

namespace collapse {

/// Occupations of a beta region: q0 unentangled, q1 / q2 entangled with
/// channel 1 / 2.
struct CascadeState {
  double q0 = 1.0;
  double q1 = 0.0;
  double q2 = 0.0;
  double tau = 1.0;
  double epsilon = 0.0;

  double sum() const { return q0 + q1 + q2; }
  /// Throws ModelError unless all q >= 0, the sum is 1 within 1e-12 and
  /// tau > 0.
  void validate() const;

  /// State at t = 0 seeded with dq1 + dq2 = epsilon.
  static CascadeState seeded(double dq1, double dq2, double tau);
};

/// Exact solution of the cascade equations:
///   q0(t) = (1 - eps) e^{-t/tau} / D,  q_j(t) = dq_j / D,
///   D = eps + (1 - eps) e^{-t/tau}.
/// eps = 0 is the exact limit q0 = 1.
CascadeState cascade_closed_form(double t, double epsilon, double dq1, double dq2, double tau);

/// t -> infinity limit: q_j = dq_j / eps, q0 = 0.
CascadeState cascade_asymptote(double epsilon, double dq1, double dq2, double tau);

struct CascadeIntegrateOptions {
  /// Escalate the coarse-step warning to a StepSizeError.
  bool strict = false;
  /// Called with (t, state) at t = 0 and after every step.
  std::function<void(double, const CascadeState&)> observer;
};

struct CascadeIntegration {
  CascadeState state;
  std::vector<std::string> warnings;
};

/// Classical RK4 on
///   dq0/dt = -q0 (q1 + q2) / tau,  dq_j/dt = q0 q_j / tau.
/// Requires steps >= 10. A step above tau / 10 adds a warning, or throws
/// StepSizeError in strict mode.
CascadeIntegration cascade_integrate(const CascadeState& initial, double t_end, std::size_t steps,
                                     const CascadeIntegrateOptions& options = {});

/// One-dimensional frontier between the reactive and background regions.
struct FrontierModel {
  double diffusion = 1.0;  // D, length^2 / time
  double tau = 1.0;
  double region_size = 1.0;
  std::size_t regions = 1;

  /// v = 2 sqrt(D / tau).
  double velocity() const;
  /// Time for the frontier to cross one region.
  double crossing_time() const;
  void validate() const;
};

/// Centered channel-probability fluctuation seeded by one beta region.
struct BetaFluctuation {
  double dp1 = 0.0;
  double dp2 = 0.0;
  std::size_t atoms = 0;
};

struct BetaSamplingOptions {
  /// Entangled fraction the incoming atoms seed before amplification.
  double epsilon = 0.01;
};

/// Per region: n ~ Poisson(n_atoms_mean) incoming atoms, n1 ~ Binomial(n,
/// p1) of them carry channel 1. The seeds dq_j = eps n_j / n are amplified to
/// dq_j / eps by the cascade, and the fluctuation is the amplified share
/// minus p_j times the amplified mass. Regions with no atom contribute 0.
std::vector<BetaFluctuation> sample_beta_fluctuations(const ChannelSimplex& p, double n_atoms_mean,
                                                      std::size_t regions, CounterRng& rng,
                                                      const BetaSamplingOptions& options = {});

struct FrontierAggregate {
  double dp1 = 0.0;
  double dp2 = 0.0;
};

/// Sum over regions, then projection onto dp1 + dp2 = 0: the mean
/// violation is removed and dp2 is set to -dp1.
FrontierAggregate aggregate_frontier(const std::vector<BetaFluctuation>& fluctuations);

/// Empirical second moments of repeated aggregations.
struct FrontierCovariance {
  double a11 = 0.0;
  double a22 = 0.0;
  double a12 = 0.0;
  /// Per-aggregation second moments divided by the frontier crossing time.
  double a12_rate = 0.0;
  std::size_t repeats = 0;
  std::vector<FrontierAggregate> samples;
};

/// `repeats` independent aggregations over frontier.regions regions each;
/// repeat r uses RNG stream r.
FrontierCovariance frontier_covariance(const ChannelSimplex& p, double n_atoms_mean,
                                       const FrontierModel& frontier, std::size_t repeats,
                                       std::uint64_t seed, const BetaSamplingOptions& options = {});

/// Model value of A_12 per aggregation: -regions * p1 p2 * E[1/n; n >= 1]
/// for n ~ Poisson(n_atoms_mean).
double predicted_frontier_a12(const ChannelSimplex& p, double n_atoms_mean, std::size_t regions);

}  // namespace collapse

#endif  // COLLAPSE_LAB_CASCADE_HPP
