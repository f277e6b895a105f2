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

#include "collapse_lab/cascade.hpp"

#include <array>
#include <cmath>
#include <random>
#include <string>

#include "collapse_lab/errors.hpp"
#include "collapse_lab/parallel.hpp"

namespace collapse {

void CascadeState::validate() const {
  if (!(q0 >= 0.0 && q1 >= 0.0 && q2 >= 0.0)) {
    throw ModelError("cascade", "cascade occupations must be non-negative");
  }
  if (std::abs(sum() - 1.0) > 1e-12) {
    throw ModelError("cascade", "cascade occupations sum to " + std::to_string(sum()));
  }
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ModelError("cascade", "tau must be positive");
}

CascadeState CascadeState::seeded(double dq1, double dq2, double tau) {
  if (!(dq1 >= 0.0 && dq2 >= 0.0)) throw ModelError("cascade", "seed occupations must be >= 0");
  const double eps = dq1 + dq2;
  if (!(eps < 1.0)) throw ModelError("cascade", "entangled fraction must be < 1");
  CascadeState s{1.0 - eps, dq1, dq2, tau, eps};
  s.validate();
  return s;
}

namespace {

void check_seed(double epsilon, double dq1, double dq2, double tau) {
  if (!(epsilon >= 0.0 && epsilon < 1.0)) throw ModelError("cascade", "epsilon must lie in [0, 1)");
  if (!(dq1 >= 0.0 && dq2 >= 0.0)) throw ModelError("cascade", "seed occupations must be >= 0");
  if (std::abs(dq1 + dq2 - epsilon) > 1e-12) {
    throw ModelError("cascade", "seed occupations must sum to epsilon");
  }
  if (!(tau > 0.0)) throw ModelError("cascade", "tau must be positive");
}

}  // namespace

CascadeState cascade_closed_form(double t, double epsilon, double dq1, double dq2, double tau) {
  check_seed(epsilon, dq1, dq2, tau);
  if (!(t >= 0.0)) throw ModelError("cascade", "time must be >= 0");
  if (epsilon == 0.0) return {1.0, 0.0, 0.0, tau, 0.0};
  const double decay = std::exp(-t / tau);
  const double denom = epsilon + (1.0 - epsilon) * decay;
  return {(1.0 - epsilon) * decay / denom, dq1 / denom, dq2 / denom, tau, epsilon};
}

CascadeState cascade_asymptote(double epsilon, double dq1, double dq2, double tau) {
  check_seed(epsilon, dq1, dq2, tau);
  if (epsilon == 0.0) return {1.0, 0.0, 0.0, tau, 0.0};
  return {0.0, dq1 / epsilon, dq2 / epsilon, tau, epsilon};
}

CascadeIntegration cascade_integrate(const CascadeState& initial, double t_end, std::size_t steps,
                                     const CascadeIntegrateOptions& options) {
  initial.validate();
  if (steps < 10) throw StepSizeError("cascade", "cascade_integrate needs at least 10 steps", 0.0);
  if (!(t_end >= 0.0)) throw ModelError("cascade", "t_end must be >= 0");

  CascadeIntegration out;
  const double h = t_end / static_cast<double>(steps);
  const double tau = initial.tau;
  if (h > tau / 10.0) {
    const std::string msg = "step " + std::to_string(h) + " exceeds tau/10 = " + std::to_string(tau / 10.0);
    if (options.strict) throw StepSizeError("cascade", msg, tau / 10.0);
    out.warnings.push_back(msg);
  }

  using Vec = std::array<double, 3>;
  auto rhs = [tau](const Vec& q) -> Vec {
    const double g0 = q[0] / tau;
    return {-g0 * (q[1] + q[2]), g0 * q[1], g0 * q[2]};
  };
  auto axpy = [](const Vec& q, double a, const Vec& k) -> Vec {
    return {q[0] + a * k[0], q[1] + a * k[1], q[2] + a * k[2]};
  };

  Vec q{initial.q0, initial.q1, initial.q2};
  if (options.observer) options.observer(0.0, initial);
  for (std::size_t s = 0; s < steps; ++s) {
    const Vec k1 = rhs(q);
    const Vec k2 = rhs(axpy(q, 0.5 * h, k1));
    const Vec k3 = rhs(axpy(q, 0.5 * h, k2));
    const Vec k4 = rhs(axpy(q, h, k3));
    for (int i = 0; i < 3; ++i) q[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    if (options.observer) {
      options.observer(h * static_cast<double>(s + 1), {q[0], q[1], q[2], tau, initial.epsilon});
    }
  }
  out.state = {q[0], q[1], q[2], tau, initial.epsilon};
  return out;
}

double FrontierModel::velocity() const { return 2.0 * std::sqrt(diffusion / tau); }

double FrontierModel::crossing_time() const { return region_size / velocity(); }

void FrontierModel::validate() const {
  if (!(diffusion > 0.0) || !(tau > 0.0) || !(region_size > 0.0)) {
    throw ModelError("cascade", "frontier diffusion, tau and region size must be positive");
  }
  if (regions == 0) throw ModelError("cascade", "frontier needs at least one region");
}

std::vector<BetaFluctuation> sample_beta_fluctuations(const ChannelSimplex& p, double n_atoms_mean,
                                                      std::size_t regions, CounterRng& rng,
                                                      const BetaSamplingOptions& options) {
  if (p.channels() != 2) throw DimensionError("cascade", "beta fluctuations are two-channel");
  p.validate();
  if (!(n_atoms_mean > 0.0)) throw ModelError("cascade", "n_atoms_mean must be positive");
  if (!(options.epsilon > 0.0 && options.epsilon < 1.0)) {
    throw ModelError("cascade", "epsilon must lie in (0, 1)");
  }

  std::poisson_distribution<std::size_t> arrivals(n_atoms_mean);
  std::vector<BetaFluctuation> out(regions);
  for (auto& f : out) {
    const std::size_t n = arrivals(rng);
    f.atoms = n;
    if (n == 0) continue;
    std::binomial_distribution<std::size_t> labels(n, p.p[0]);
    const std::size_t n1 = labels(rng);
    const double dq1 = options.epsilon * static_cast<double>(n1) / static_cast<double>(n);
    const double dq2 = options.epsilon * static_cast<double>(n - n1) / static_cast<double>(n);
    const CascadeState amplified = cascade_asymptote(dq1 + dq2, dq1, dq2, 1.0);
    const double mass = amplified.q1 + amplified.q2;
    f.dp1 = amplified.q1 - p.p[0] * mass;
    f.dp2 = amplified.q2 - p.p[1] * mass;
  }
  return out;
}

FrontierAggregate aggregate_frontier(const std::vector<BetaFluctuation>& fluctuations) {
  if (fluctuations.empty()) throw InsufficientDataError("cascade", "no regions to aggregate");
  double s1 = 0.0;
  double s2 = 0.0;
  for (const auto& f : fluctuations) {
    s1 += f.dp1;
    s2 += f.dp2;
  }
  const double violation = 0.5 * (s1 + s2);
  const double dp1 = s1 - violation;
  return {dp1, -dp1};
}

FrontierCovariance frontier_covariance(const ChannelSimplex& p, double n_atoms_mean,
                                       const FrontierModel& frontier, std::size_t repeats,
                                       std::uint64_t seed, const BetaSamplingOptions& options) {
  frontier.validate();
  if (repeats == 0) throw InsufficientDataError("cascade", "no repeats requested");
  FrontierCovariance cov;
  cov.repeats = repeats;
  cov.samples.resize(repeats);
  parallel_for(repeats, [&](std::size_t r) {
    CounterRng rng(seed, r);
    cov.samples[r] = aggregate_frontier(sample_beta_fluctuations(p, n_atoms_mean, frontier.regions, rng, options));
  });
  for (const auto& s : cov.samples) {
    cov.a11 += s.dp1 * s.dp1;
    cov.a22 += s.dp2 * s.dp2;
    cov.a12 += s.dp1 * s.dp2;
  }
  const double n = static_cast<double>(repeats);
  cov.a11 /= n;
  cov.a22 /= n;
  cov.a12 /= n;
  cov.a12_rate = cov.a12 / frontier.crossing_time();
  return cov;
}

double predicted_frontier_a12(const ChannelSimplex& p, double n_atoms_mean, std::size_t regions) {
  if (p.channels() != 2) throw DimensionError("cascade", "beta fluctuations are two-channel");
  if (!(n_atoms_mean > 0.0)) throw ModelError("cascade", "n_atoms_mean must be positive");
  // Pois(n) built by the recurrence pmf(n) = pmf(n - 1) * mean / n.
  const auto cutoff = static_cast<std::size_t>(n_atoms_mean + 40.0 * std::sqrt(n_atoms_mean) + 60.0);
  double pmf = std::exp(-n_atoms_mean);
  double inverse_moment = 0.0;
  for (std::size_t n = 1; n <= cutoff; ++n) {
    pmf *= n_atoms_mean / static_cast<double>(n);
    inverse_moment += pmf / static_cast<double>(n);
  }
  return -static_cast<double>(regions) * p.p[0] * p.p[1] * inverse_moment;
}

}  // namespace collapse
