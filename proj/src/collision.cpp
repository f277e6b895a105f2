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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "collapse_lab/errors.hpp"

namespace collapse {

namespace {
using Index = Eigen::Index;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}  // namespace

void SectorEnsemble::validate(const Tolerances& tol) const {
  if (weights.empty()) throw ModelError("collision", "sector ensemble is empty");
  if (phases.size() != weights.size() || energies.size() != weights.size()) {
    throw ModelError("collision", "sector ensemble fields have different lengths");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (!(weights[k] >= 0.0)) {
      throw ModelError("collision", "sector weight " + std::to_string(k) + " is negative");
    }
    sum += weights[k];
  }
  if (std::abs(sum - 1.0) > tol.simplex_sum) {
    throw ModelError("collision", "sector weights sum to " + std::to_string(sum));
  }
}

SectorEnsemble SectorEnsemble::from_weights(std::vector<double> w) {
  SectorEnsemble ens;
  ens.phases.assign(w.size(), 0.0);
  ens.energies.assign(w.size(), 0.0);
  ens.weights = std::move(w);
  ens.validate();
  return ens;
}

SectorEnsemble SectorEnsemble::with_random_phases(CounterRng& rng) const {
  SectorEnsemble out = *this;
  for (double& alpha : out.phases) alpha = kTwoPi * rng.uniform();
  return out;
}

ToyTMatrix::ToyTMatrix(std::size_t sectors, std::size_t labels)
    : k_(sectors), q_(labels), amps_(sectors * labels * sectors * labels) {
  if (sectors == 0 || labels == 0) throw DimensionError("collision", "empty T-matrix");
  momenta.resize(labels);
  for (std::size_t q = 0; q < labels; ++q) momenta[q] = static_cast<double>(q);
}

std::size_t ToyTMatrix::index(std::size_t ko, std::size_t qo, std::size_t ki, std::size_t qi) const {
  if (ko >= k_ || ki >= k_ || qo >= q_ || qi >= q_) {
    throw DimensionError("collision", "T-matrix index out of range");
  }
  return ((ko * q_ + qo) * k_ + ki) * q_ + qi;
}

Complex& ToyTMatrix::at(std::size_t ko, std::size_t qo, std::size_t ki, std::size_t qi) {
  return amps_[index(ko, qo, ki, qi)];
}

Complex ToyTMatrix::at(std::size_t ko, std::size_t qo, std::size_t ki, std::size_t qi) const {
  return amps_[index(ko, qo, ki, qi)];
}

double ToyTMatrix::column_norm_sq(std::size_t ki, std::size_t qi) const {
  double sum = 0.0;
  for (std::size_t ko = 0; ko < k_; ++ko) {
    for (std::size_t qo = 0; qo < q_; ++qo) sum += std::norm(at(ko, qo, ki, qi));
  }
  return sum;
}

void ToyTMatrix::check_subunitary(double slack) const {
  for (std::size_t k = 0; k < k_; ++k) {
    for (std::size_t q = 0; q < q_; ++q) {
      const double norm = column_norm_sq(k, q);
      if (norm > 1.0 + slack) {
        throw ModelError("collision", "T-matrix column (" + std::to_string(k) + ", " +
                                          std::to_string(q) + ") violates sub-unitarity: " +
                                          std::to_string(norm));
      }
    }
  }
}

ToyTMatrix generate_toy_tmatrix(const SectorEnsemble& ens, std::size_t labels,
                                const ToyTMatrixOptions& options, CounterRng& rng) {
  const std::size_t K = ens.size();
  if (!(options.coupling > 0.0 && options.coupling <= 1.0)) {
    throw ModelError("collision", "coupling must lie in (0, 1]");
  }
  if (options.incoming >= labels) throw DimensionError("collision", "incoming label out of range");
  const bool match_energy = !options.momentum_energies.empty();
  if (match_energy && options.momentum_energies.size() != labels) {
    throw DimensionError("collision", "momentum_energies must have one entry per label");
  }
  if (!options.momenta.empty() && options.momenta.size() != labels) {
    throw DimensionError("collision", "momenta must have one entry per label");
  }

  ToyTMatrix t(K, labels);
  if (!options.momenta.empty()) t.momenta = options.momenta;
  t.incoming = options.incoming;

  const double amp_scale = std::sqrt(0.5);
  for (std::size_t ko = 0; ko < K; ++ko) {
    for (std::size_t qo = 0; qo < labels; ++qo) {
      for (std::size_t ki = 0; ki < K; ++ki) {
        for (std::size_t qi = 0; qi < labels; ++qi) {
          const Complex z(amp_scale * rng.normal(), amp_scale * rng.normal());
          bool allowed = true;
          if (match_energy) {
            const double e_out = ens.energies[ko] + options.momentum_energies[qo];
            const double e_in = ens.energies[ki] + options.momentum_energies[qi];
            allowed = std::abs(e_out - e_in) <= options.energy_tolerance;
          }
          t.at(ko, qo, ki, qi) = allowed ? z : Complex(0.0);
        }
      }
    }
  }

  if (options.saturate_sum_rule) {
    for (std::size_t ki = 0; ki < K; ++ki) {
      for (std::size_t qi = 0; qi < labels; ++qi) {
        const double norm = std::sqrt(t.column_norm_sq(ki, qi));
        if (norm == 0.0) {
          throw ModelError("collision", "cannot saturate the sum rule: column (" +
                                            std::to_string(ki) + ", " + std::to_string(qi) +
                                            ") has no energy-allowed transitions");
        }
        for (std::size_t ko = 0; ko < K; ++ko) {
          for (std::size_t qo = 0; qo < labels; ++qo) t.at(ko, qo, ki, qi) /= norm;
        }
      }
    }
    return t;
  }

  double strongest = 0.0;
  for (std::size_t ki = 0; ki < K; ++ki) {
    for (std::size_t qi = 0; qi < labels; ++qi) {
      strongest = std::max(strongest, t.column_norm_sq(ki, qi));
    }
  }
  if (strongest > 0.0) {
    const double scale = options.coupling / std::sqrt(strongest);
    for (std::size_t ko = 0; ko < K; ++ko) {
      for (std::size_t qo = 0; qo < labels; ++qo) {
        for (std::size_t ki = 0; ki < K; ++ki) {
          for (std::size_t qi = 0; qi < labels; ++qi) t.at(ko, qo, ki, qi) *= scale;
        }
      }
    }
  }
  return t;
}

WavePacketParams WavePacketParams::from_density(double density, double q_mean, double speed) {
  WavePacketParams wp;
  wp.density = density;
  wp.size = std::cbrt(1.0 / density);
  wp.q_mean = q_mean;
  wp.speed = speed;
  wp.validate();
  return wp;
}

void WavePacketParams::validate() const {
  if (!(size > 0.0) || !std::isfinite(size)) throw ModelError("collision", "packet size must be > 0");
  if (!(density > 0.0)) throw ModelError("collision", "environment density must be > 0");
  if (!(speed > 0.0)) throw ModelError("collision", "packet speed must be > 0");
}

std::vector<double> packet_weights(const ToyTMatrix& t, const WavePacketParams& wp) {
  wp.validate();
  const std::size_t Q = t.momentum_labels();
  std::vector<double> log_w(Q);
  for (std::size_t q = 0; q < Q; ++q) {
    const double dq = (t.momenta[q] - wp.q_mean) * wp.size;
    log_w[q] = -0.5 * dq * dq;
  }
  const double peak = *std::max_element(log_w.begin(), log_w.end());
  std::vector<double> w(Q);
  double sum = 0.0;
  for (std::size_t q = 0; q < Q; ++q) {
    w[q] = std::exp(log_w[q] - peak);
    sum += w[q];
  }
  for (double& x : w) x /= sum;
  return w;
}

double transition_probability(const ToyTMatrix& t, const WavePacketParams& wp, std::size_t k,
                              std::size_t k_prime) {
  const std::vector<double> w = packet_weights(t, wp);
  double p = 0.0;
  for (std::size_t q = 0; q < t.momentum_labels(); ++q) {
    double out = 0.0;
    for (std::size_t qo = 0; qo < t.momentum_labels(); ++qo) out += std::norm(t.at(k_prime, qo, k, q));
    p += w[q] * out;
  }
  return p;
}

double cross_section(const ToyTMatrix& t, const WavePacketParams& wp, std::size_t k,
                     std::size_t k_prime) {
  return 2.0 * std::numbers::pi * wp.size * wp.size * transition_probability(t, wp, k, k_prime);
}

ComplexMatrix collision_delta(const SectorEnsemble& ens, const ToyTMatrix& t, double eps) {
  ens.validate();
  if (t.sectors() != ens.size()) {
    throw DimensionError("collision", "T-matrix sector count does not match the ensemble");
  }
  if (!(eps >= 0.0 && eps <= 1.0)) throw ModelError("collision", "eps must lie in [0, 1]");
  t.check_subunitary();

  const std::size_t K = ens.size();
  const std::size_t Q = t.momentum_labels();
  const std::size_t q = t.incoming;
  const auto n = static_cast<Index>(K);
  ComplexMatrix delta = ComplexMatrix::Zero(n, n);
  if (eps == 0.0) return delta;

  for (std::size_t k = 0; k < K; ++k) {
    delta(static_cast<Index>(k), static_cast<Index>(k)) -= eps * ens.weights[k] * t.column_norm_sq(k, q);
  }
  for (std::size_t ko = 0; ko < K; ++ko) {
    for (std::size_t k = 0; k < K; ++k) {
      Complex gain = 0.0;
      for (std::size_t ks = 0; ks < K; ++ks) {
        Complex overlap = 0.0;
        for (std::size_t qo = 0; qo < Q; ++qo) overlap += t.at(ko, qo, ks, q) * std::conj(t.at(k, qo, ks, q));
        gain += ens.weights[ks] * overlap;
      }
      const Complex phase = std::polar(1.0, ens.phases[ko] - ens.phases[k]);
      delta(static_cast<Index>(ko), static_cast<Index>(k)) += eps * phase * gain;
    }
  }
  return delta;
}

PerturbativeUpdate perturbative_sector_update(const SectorEnsemble& ens, const ComplexMatrix& delta,
                                              double gap_floor) {
  ens.validate();
  const std::size_t K = ens.size();
  if (static_cast<std::size_t>(delta.rows()) != K || delta.rows() != delta.cols()) {
    throw DimensionError("collision", "delta must be K x K");
  }
  PerturbativeUpdate out;
  out.weight_shifts.resize(K);
  out.mixing = ComplexMatrix::Zero(delta.rows(), delta.cols());
  for (std::size_t k = 0; k < K; ++k) {
    out.weight_shifts[k] = delta(static_cast<Index>(k), static_cast<Index>(k)).real();
  }
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t kp = 0; kp < K; ++kp) {
      if (kp == k) continue;
      const Complex coupling = delta(static_cast<Index>(kp), static_cast<Index>(k));
      if (coupling == Complex(0.0)) continue;
      const double gap = ens.weights[k] - ens.weights[kp];
      if (std::abs(gap) < gap_floor) throw DegeneracyError(std::min(k, kp), std::max(k, kp), std::abs(gap));
      out.mixing(static_cast<Index>(kp), static_cast<Index>(k)) = coupling / gap;
    }
  }
  return out;
}

ExactUpdate rediagonalize_oracle(const SectorEnsemble& ens, const ComplexMatrix& delta,
                                 const Tolerances& tol) {
  ens.validate(tol);
  const std::size_t K = ens.size();
  if (static_cast<std::size_t>(delta.rows()) != K || delta.rows() != delta.cols()) {
    throw DimensionError("collision", "delta must be K x K");
  }
  const auto n = static_cast<Index>(K);

  ExactUpdate out;
  out.weights.resize(K);
  bool off_diagonal = false;
  for (Index i = 0; i < n && !off_diagonal; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (i != j && delta(i, j) != Complex(0.0)) {
        off_diagonal = true;
        break;
      }
    }
  }

  if (!off_diagonal) {
    // Commuting perturbation: the sector basis is already an eigenbasis.
    out.basis = ComplexMatrix::Identity(n, n);
    for (std::size_t k = 0; k < K; ++k) {
      out.weights[k] = ens.weights[k] + delta(static_cast<Index>(k), static_cast<Index>(k)).real();
      if (out.weights[k] < -tol.psd) {
        throw ModelError("collision", "perturbed rho_A is not PSD; delta too large");
      }
    }
    return out;
  }

  ComplexMatrix perturbed = delta;
  for (std::size_t k = 0; k < K; ++k) perturbed(static_cast<Index>(k), static_cast<Index>(k)) += ens.weights[k];
  perturbed = 0.5 * (perturbed + perturbed.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(perturbed);
  if (solver.info() != Eigen::Success) throw ModelError("collision", "eigen-decomposition failed");
  if (solver.eigenvalues().minCoeff() < -tol.psd) {
    throw ModelError("collision", "perturbed rho_A is not PSD; delta too large");
  }

  // Match eigenvectors to sectors greedily by largest overlap.
  std::vector<bool> taken(K, false);
  std::vector<std::size_t> match(K, K);
  std::vector<std::tuple<double, std::size_t, std::size_t>> overlaps;
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t e = 0; e < K; ++e) {
      overlaps.emplace_back(std::abs(solver.eigenvectors()(static_cast<Index>(k), static_cast<Index>(e))), k, e);
    }
  }
  std::sort(overlaps.begin(), overlaps.end(), [](const auto& a, const auto& b) {
    return std::get<0>(a) > std::get<0>(b);
  });
  for (const auto& [mag, k, e] : overlaps) {
    if (match[k] != K || taken[e]) continue;
    match[k] = e;
    taken[e] = true;
  }

  out.basis = ComplexMatrix(n, n);
  for (std::size_t k = 0; k < K; ++k) {
    const auto e = static_cast<Index>(match[k]);
    Eigen::VectorXcd v = solver.eigenvectors().col(e);
    const Complex lead = v(static_cast<Index>(k));
    if (std::abs(lead) > 0.0) v *= std::conj(lead) / std::abs(lead);
    out.basis.col(static_cast<Index>(k)) = v;
    out.weights[k] = solver.eigenvalues()(e);
    out.unitarity_defect = std::max(out.unitarity_defect, std::abs(std::abs(v(static_cast<Index>(k))) - 1.0));
  }
  return out;
}

}  // namespace collapse
