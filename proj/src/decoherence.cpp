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

#include "collapse_lab/decoherence.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "collapse_lab/errors.hpp"
#include "collapse_lab/parallel.hpp"
#include "collapse_lab/rng.hpp"
#include "collapse_lab/stats.hpp"

namespace collapse {

void CollisionStream::validate() const {
  if (!(flux >= 0.0) || !(cross_section >= 0.0)) {
    throw ModelError("decoherence", "flux and cross-section must be non-negative");
  }
  if (!separated) {
    throw ModelError("decoherence",
                     "pointer positions not separated; channels would not scatter independently");
  }
}

PointerChannelAmplitudes PointerChannelAmplitudes::initial(Complex c1, Complex c2,
                                                           std::vector<double> weights) {
  if (std::abs(std::norm(c1) + std::norm(c2) - 1.0) > 1e-12) {
    throw ModelError("decoherence", "channel amplitudes must satisfy |c1|^2 + |c2|^2 = 1");
  }
  if (weights.empty()) throw ModelError("decoherence", "no sectors");
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw ModelError("decoherence", "negative sector weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > default_tolerances().simplex_sum) {
    throw ModelError("decoherence", "sector weights sum to " + std::to_string(sum));
  }
  PointerChannelAmplitudes s;
  s.c1 = c1;
  s.c2 = c2;
  s.coherent.assign(weights.size(), {1.0, 1.0});
  s.incoherent.assign(weights.size(), {Complex(0.0), Complex(0.0)});
  s.sector_weights = std::move(weights);
  return s;
}

namespace {

Complex random_phase(CounterRng& rng) {
  return std::polar(1.0, 2.0 * std::numbers::pi * rng.uniform());
}

void advance_channel(double& a, Complex& b, double x, ArrivalMode mode, CounterRng& rng) {
  if (mode == ArrivalMode::continuous_rate) {
    // Drift to a sqrt(1 - x) plus jitter uniform in [-d, d]: the mean decay
    // is exact and a stays in (0, previous a].
    const double drifted = a * std::sqrt(1.0 - x);
    const double d = a - drifted;
    const double a_new = drifted + d * (2.0 * rng.uniform() - 1.0);
    const double sigma = a * std::sqrt(0.5 * x);
    b += Complex(sigma * rng.normal(), sigma * rng.normal());
    a = a_new;
    return;
  }
  std::poisson_distribution<int> collisions(x);
  const int events = collisions(rng);
  for (int e = 0; e < events; ++e) {
    const double a_new = 0.5 * a;
    b += std::sqrt(a * a - a_new * a_new) * random_phase(rng);
    a = a_new;
  }
}

}  // namespace

PointerChannelAmplitudes step_sector_ensemble(const PointerChannelAmplitudes& state,
                                              const CollisionStream& stream, double dt,
                                              std::uint64_t seed, const DecoherenceOptions& options) {
  stream.validate();
  if (!(dt > 0.0)) throw StepSizeError("decoherence", "dt must be positive", options.max_rate_step);
  const double x = stream.rate() * dt;
  if (x > options.max_rate_step) {
    throw StepSizeError("decoherence",
                        "rate*dt = " + std::to_string(x) + " exceeds cap " +
                            std::to_string(options.max_rate_step),
                        options.max_rate_step / std::max(stream.rate(), 1e-300));
  }

  PointerChannelAmplitudes next = state;
  next.steps = state.steps + 1;
  next.time = state.time + dt;
  if (x == 0.0) return next;

  const std::uint64_t step = state.steps;
  parallel_for(state.sectors(), [&](std::size_t k) {
    for (std::uint32_t j = 0; j < 2; ++j) {
      CounterRng rng(seed, k, static_cast<std::uint32_t>(2 * step + j));
      advance_channel(next.coherent[k][j], next.incoherent[k][j], x, options.mode, rng);
    }
  });
  return next;
}

DensityMatrix reduced_pointer_matrix(const PointerChannelAmplitudes& state) {
  double overlap = 0.0;
  for (std::size_t k = 0; k < state.sectors(); ++k) {
    overlap += state.sector_weights[k] * state.coherent[k][0] * state.coherent[k][1];
  }
  ComplexMatrix m(2, 2);
  m(0, 0) = std::norm(state.c1);
  m(1, 1) = std::norm(state.c2);
  m(0, 1) = state.c1 * std::conj(state.c2) * overlap;
  m(1, 0) = std::conj(m(0, 1));
  return DensityMatrix(std::move(m));
}

std::vector<OffDiagonalSample> run_decoherence(const PointerChannelAmplitudes& initial,
                                               const CollisionStream& stream, double dt,
                                               std::size_t steps, std::uint64_t seed,
                                               const DecoherenceOptions& options) {
  std::vector<OffDiagonalSample> series;
  series.reserve(steps + 1);
  PointerChannelAmplitudes state = initial;
  auto record = [&] {
    const DensityMatrix rho = reduced_pointer_matrix(state);
    series.push_back({state.time, rho(0, 1), rho(0, 0).real(), rho(1, 1).real()});
  };
  record();
  for (std::size_t s = 0; s < steps; ++s) {
    state = step_sector_ensemble(state, stream, dt, seed, options);
    record();
  }
  return series;
}

DecayFit decay_rate_fit(std::span<const double> times, std::span<const double> magnitudes,
                        double floor) {
  if (times.size() != magnitudes.size()) {
    throw InsufficientDataError("decoherence", "times and magnitudes differ in length");
  }
  std::vector<double> ts, logs;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(magnitudes[i] > floor)) break;
    ts.push_back(times[i]);
    logs.push_back(std::log(magnitudes[i]));
  }
  if (ts.size() < 20) {
    throw InsufficientDataError("decoherence", "decay fit needs >= 20 points above the floor, got " +
                                                   std::to_string(ts.size()));
  }
  if (logs.front() - logs.back() < 2.0) {
    throw InsufficientDataError("decoherence", "decay fit needs >= 2 e-folds of decay");
  }
  const stats::LineFit line = stats::fit_line(ts, logs);
  return {-line.slope, line.slope_stderr, line.r_squared, line.points};
}

}  // namespace collapse
