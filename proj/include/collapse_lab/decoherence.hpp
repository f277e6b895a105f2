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

// Sector-amplitude dynamics of a two-position pointer under a stream of
// environmental collisions. Every sector k carries, per pointer channel j,
// a coherent amplitude a_kj (starts at 1, never grows) and an incoherent
// accumulator b_kj. Only the coherent parts enter the off-diagonal element
// of the pointer's reduced matrix.

#ifndef COLLAPSE_LAB_DECOHERENCE_HPP
#define COLLAPSE_LAB_DECOHERENCE_HPP

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "collapse_lab/core.hpp"

namespace collapse {

struct CollisionStream {
  double flux = 0.0;           // collisions per area per time
  double cross_section = 0.0;  // area
  /// Pointer positions are far enough apart (|x1 - x2| >> hbar/q) that the
  /// two channels scatter independently.
  bool separated = true;

  double rate() const { return flux * cross_section; }
  /// A zero rate is allowed (no collisions); negative values and an
  /// unseparated pointer are rejected.
  void validate() const;
};

enum class ArrivalMode {
  /// a <- a sqrt(1 - rate dt) with bounded zero-mean jitter every step.
  continuous_rate,
  /// Explicit Poisson collision count per step; each collision halves a.
  poisson_events,
};

struct PointerChannelAmplitudes {
  Complex c1{1.0, 0.0};
  Complex c2{0.0, 0.0};
  std::vector<double> sector_weights;
  std::vector<std::array<double, 2>> coherent;     // a_kj
  std::vector<std::array<Complex, 2>> incoherent;  // b_kj
  std::uint64_t steps = 0;
  double time = 0.0;

  /// a_kj = 1, b_kj = 0. Throws ModelError unless |c1|^2 + |c2|^2 = 1 and
  /// the weights form a distribution.
  static PointerChannelAmplitudes initial(Complex c1, Complex c2, std::vector<double> weights);
  std::size_t sectors() const { return sector_weights.size(); }
};

struct DecoherenceOptions {
  ArrivalMode mode = ArrivalMode::continuous_rate;
  /// Largest admissible rate * dt.
  double max_rate_step = 0.1;
};

/// Advances every sector by dt. Sector k, channel j, step s draws from
/// CounterRng(seed, k, 2 s + j), so the two channels are independent and
/// the result does not depend on the worker count.
/// Throws StepSizeError when rate * dt exceeds the cap.
PointerChannelAmplitudes step_sector_ensemble(const PointerChannelAmplitudes& state,
                                              const CollisionStream& stream, double dt,
                                              std::uint64_t seed,
                                              const DecoherenceOptions& options = {});

/// 2x2 reduced matrix of the pointer. Diagonal: |c_j|^2 (collisions never
/// move the pointer, so channel norms are conserved). Off-diagonal:
/// c1 conj(c2) sum_k p_k a_k1 a_k2, summed in sector order.
DensityMatrix reduced_pointer_matrix(const PointerChannelAmplitudes& state);

struct OffDiagonalSample {
  double time = 0.0;
  Complex offdiag{0.0, 0.0};
  double diag1 = 0.0;
  double diag2 = 0.0;
};

/// Records reduced_pointer_matrix at t = 0 and after each of `steps` steps.
std::vector<OffDiagonalSample> run_decoherence(const PointerChannelAmplitudes& initial,
                                               const CollisionStream& stream, double dt,
                                               std::size_t steps, std::uint64_t seed,
                                               const DecoherenceOptions& options = {});

struct DecayFit {
  double rate = 0.0;
  double rate_stderr = 0.0;
  double r_squared = 0.0;
  std::size_t points = 0;
};

/// Least-squares slope of log|m| against t. The series is cut at the first
/// magnitude below `floor`. Needs >= 20 remaining points spanning >= 2
/// e-folds, else InsufficientDataError.
DecayFit decay_rate_fit(std::span<const double> times, std::span<const double> magnitudes,
                        double floor = 1e-300);

}  // namespace collapse

#endif  // COLLAPSE_LAB_DECOHERENCE_HPP
