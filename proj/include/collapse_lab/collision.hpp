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

// Toy model of one environmental collision on the apparatus. Sectors are
// the eigenvectors of rho_A; the collision operator is a finite table of
// amplitudes t[k', q', k, q] between (sector, momentum label) pairs.

#ifndef COLLAPSE_LAB_COLLISION_HPP
#define COLLAPSE_LAB_COLLISION_HPP

#include <cstddef>
#include <vector>

#include "collapse_lab/core.hpp"
#include "collapse_lab/rng.hpp"

namespace collapse {

/// rho_A = sum_k p_k |k><k| with a ray phase alpha_k attached to each |k>.
struct SectorEnsemble {
  std::vector<double> weights;   // p_k >= 0, sum 1
  std::vector<double> phases;    // alpha_k in [0, 2 pi)
  std::vector<double> energies;  // E_k, arbitrary units

  std::size_t size() const { return weights.size(); }
  /// Throws ModelError on negative weights, bad sum, or ragged fields.
  void validate(const Tolerances& tol = default_tolerances()) const;

  /// Weights as given, zero phases, zero energies.
  static SectorEnsemble from_weights(std::vector<double> weights);
  /// Copy with fresh uniform phases (one draw per collision).
  SectorEnsemble with_random_phases(CounterRng& rng) const;
};

struct ToyTMatrixOptions {
  /// Largest column norm |t[., ., k, q]| after scaling; must be in (0, 1].
  double coupling = 1.0;
  /// Renormalize every column to norm 1 (exact cross-section sum rule).
  bool saturate_sum_rule = false;
  /// Momentum value of each label; defaults to 0, 1, ..., Q-1.
  std::vector<double> momenta;
  /// Kinetic energy of each label. When empty, energy matching is off.
  std::vector<double> momentum_energies;
  double energy_tolerance = 1e-9;
  /// Label of the incoming plane wave used by collision_delta.
  std::size_t incoming = 0;
};

class ToyTMatrix {
 public:
  ToyTMatrix(std::size_t sectors, std::size_t momenta);

  std::size_t sectors() const { return k_; }
  std::size_t momentum_labels() const { return q_; }

  Complex& at(std::size_t k_out, std::size_t q_out, std::size_t k_in, std::size_t q_in);
  Complex at(std::size_t k_out, std::size_t q_out, std::size_t k_in, std::size_t q_in) const;

  /// sum over (k', q') of |t[k', q', k, q]|^2.
  double column_norm_sq(std::size_t k_in, std::size_t q_in) const;
  /// Throws ModelError when some column norm exceeds 1.
  void check_subunitary(double slack = 1e-12) const;

  std::vector<double> momenta;
  std::size_t incoming = 0;

 private:
  std::size_t index(std::size_t k_out, std::size_t q_out, std::size_t k_in, std::size_t q_in) const;

  std::size_t k_;
  std::size_t q_;
  std::vector<Complex> amps_;
};

/// Complex Gaussian amplitudes, zeroed where E_k' + e_q' != E_k + e_q, then
/// scaled per the options. Sector energies come from the ensemble.
ToyTMatrix generate_toy_tmatrix(const SectorEnsemble& ens, std::size_t momentum_labels,
                                const ToyTMatrixOptions& options, CounterRng& rng);

/// Incoming wave packet. L is the packet size, n the number density of the
/// environment, q_mean the mean momentum, v the speed.
struct WavePacketParams {
  double size = 1.0;
  double density = 1.0;
  double q_mean = 0.0;
  double speed = 1.0;

  /// L = n^(-1/3).
  static WavePacketParams from_density(double density, double q_mean, double speed);
  void validate() const;
};

/// Packet weights |G(q)|^2 over the momentum labels, normalized: a Gaussian
/// in momentum centred at q_mean with spread 1/L.
std::vector<double> packet_weights(const ToyTMatrix& t, const WavePacketParams& wp);

/// sigma(k q_in -> k') = 2 pi L^2 * P(k q_in -> k').
double cross_section(const ToyTMatrix& t, const WavePacketParams& wp, std::size_t k,
                     std::size_t k_prime);

/// P(k q_in -> k') = sum_q |G(q)|^2 sum_q' |t[k', q', k, q]|^2.
double transition_probability(const ToyTMatrix& t, const WavePacketParams& wp, std::size_t k,
                              std::size_t k_prime);

/// K x K change of rho_A (in the sector basis) after one collision with the
/// incoming plane wave t.incoming, occurring with probability eps:
///   loss:  -eps p_k |t_k|^2 on the diagonal
///   gain:  eps exp(i(alpha_k' - alpha_k)) sum_k'' p_k'' sum_q' t[k',q',k'',q] conj(t[k,q',k'',q])
/// Traceless and Hermitian.
ComplexMatrix collision_delta(const SectorEnsemble& ens, const ToyTMatrix& t, double eps);

struct PerturbativeUpdate {
  /// First-order weight shifts: the diagonal of the delta.
  std::vector<double> weight_shifts;
  /// mixing(k', k): coefficient of |k'> in the first-order correction to |k>,
  /// delta(k', k) / (p_k - p_k'). Zero on the diagonal.
  ComplexMatrix mixing;
};

/// Throws DegeneracyError for a coupled pair with |p_k - p_k'| < gap_floor.
PerturbativeUpdate perturbative_sector_update(const SectorEnsemble& ens, const ComplexMatrix& delta,
                                              double gap_floor = default_tolerances().gap_floor);

struct ExactUpdate {
  /// New eigenvalue of the eigenvector matched to old sector k.
  std::vector<double> weights;
  /// Column k is the new eigenvector matched to sector k, phased so that its
  /// k-th component is real and non-negative.
  ComplexMatrix basis;
  /// max_k | |basis(k, k)| - 1 |: norm leaking out of the original sector.
  double unitarity_defect = 0.0;
};

/// Exact eigen-decomposition of diag(p) + delta. Throws ModelError if the
/// perturbed matrix is no longer PSD.
ExactUpdate rediagonalize_oracle(const SectorEnsemble& ens, const ComplexMatrix& delta,
                                 const Tolerances& tol = default_tolerances());

}  // namespace collapse

#endif  // COLLAPSE_LAB_COLLISION_HPP
