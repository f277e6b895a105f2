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

#include "collapse_lab/epr.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "collapse_lab/errors.hpp"
#include "collapse_lab/parallel.hpp"
#include "collapse_lab/stats.hpp"

namespace collapse {

void SpinPairState::validate() const {
  if (!std::isfinite(a.real()) || !std::isfinite(a.imag()) || !std::isfinite(b.real()) ||
      !std::isfinite(b.imag()) || !std::isfinite(theta)) {
    throw ModelError("epr", "spin pair state is not finite");
  }
  const double norm = std::norm(a) + std::norm(b);
  if (std::abs(norm - 1.0) > 1e-12) {
    throw ModelError("epr", "|a|^2 + |b|^2 = " + std::to_string(norm) + ", expected 1");
  }
}

std::array<Complex, 4> rotate_coefficients(const SpinPairState& state) {
  state.validate();
  const double c = std::cos(0.5 * state.theta);
  const double s = std::sin(0.5 * state.theta);
  const Complex a = state.a;
  const Complex b = state.b;
  return {-(a + b) * c * s, a * c * c - b * s * s, b * c * c - a * s * s, (a + b) * c * s};
}

double JointChannelGrid::total() const {
  return (q[cell(0, 0)] + q[cell(1, 0)]) + (q[cell(0, 1)] + q[cell(1, 1)]);
}

double JointChannelGrid::row_mass(std::size_t alpha) const { return q[cell(alpha, 0)] + q[cell(alpha, 1)]; }

double JointChannelGrid::column_mass(std::size_t beta) const { return q[cell(0, beta)] + q[cell(1, beta)]; }

std::size_t JointChannelGrid::vertex() const {
  for (std::size_t k = 0; k < 4; ++k) {
    if (q[k] == 1.0) return k;
  }
  return 4;
}

void JointChannelGrid::validate(const Tolerances& tol) const {
  for (std::size_t k = 0; k < 4; ++k) {
    if (!(q[k] >= 0.0) || !std::isfinite(q[k])) {
      throw ModelError("epr", "joint cell " + std::to_string(k) + " is invalid");
    }
    if (frozen[k] && q[k] != 0.0) throw ModelError("epr", "frozen cell " + std::to_string(k) + " is positive");
  }
  if (std::abs(total() - 1.0) > tol.simplex_sum) {
    throw ModelError("epr", "joint cells sum to " + std::to_string(total()));
  }
}

namespace {

/// Writes the column pair (lo, hi) of a column holding mass `mass`. The
/// larger target is kept and the other cell takes the exact remainder: with
/// the kept value in [mass/2, mass] the subtraction is exact, so the two
/// cells add back to `mass` without rounding.
void split_exact(double mass, double& x, double& y, bool x_live, bool y_live) {
  if (!x_live && !y_live) {
    x = y = 0.0;
  } else if (!y_live) {
    x = mass;
    y = 0.0;
  } else if (!x_live) {
    x = 0.0;
    y = mass;
  } else if (x >= y) {
    x = std::clamp(x, 0.5 * mass, mass);
    y = mass - x;
  } else {
    y = std::clamp(y, 0.5 * mass, mass);
    x = mass - y;
  }
}

/// Canonical form from target cells and target column masses.
void canonicalize(JointChannelGrid& g, std::array<double, 2> columns) {
  std::array<bool, 4> live{};
  for (std::size_t k = 0; k < 4; ++k) live[k] = !g.frozen[k];
  const bool col_live0 = live[cell(0, 0)] || live[cell(1, 0)];
  const bool col_live1 = live[cell(0, 1)] || live[cell(1, 1)];
  split_exact(1.0, columns[0], columns[1], col_live0, col_live1);
  for (std::size_t beta = 0; beta < 2; ++beta) {
    split_exact(columns[beta], g.q[cell(0, beta)], g.q[cell(1, beta)], live[cell(0, beta)],
                live[cell(1, beta)]);
  }
  for (std::size_t k = 0; k < 4; ++k) {
    if (g.q[k] <= 0.0) {
      g.q[k] = 0.0;
      g.frozen[k] = true;
    }
  }
}

}  // namespace

JointChannelGrid joint_weights(const std::array<Complex, 4>& c) {
  double norm = 0.0;
  for (const auto& x : c) norm += std::norm(x);
  if (std::abs(norm - 1.0) > 1e-12) throw ModelError("epr", "coefficients are not normalized");
  JointChannelGrid g;
  for (std::size_t k = 0; k < 4; ++k) {
    g.q[k] = std::norm(c[k]);
    if (g.q[k] < kFreezeFloor) {
      g.q[k] = 0.0;
      g.frozen[k] = true;
    }
  }
  canonicalize(g, {g.column_mass(0), g.column_mass(1)});
  return g;
}

void BlockCovariance::validate() const {
  if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0) || !std::isfinite(lambda1) || !std::isfinite(lambda2)) {
    throw ModelError("epr", "local rates must be finite and >= 0");
  }
}

Eigen::Matrix4d BlockCovariance::model(const JointChannelGrid& grid) const {
  const double v1 = 0.5 * lambda1 * grid.row_mass(0) * grid.row_mass(1);
  const double v2 = 0.5 * lambda2 * grid.column_mass(0) * grid.column_mass(1);
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  for (std::size_t a = 0; a < 2; ++a) {
    for (std::size_t b = 0; b < 2; ++b) {
      for (std::size_t a2 = 0; a2 < 2; ++a2) {
        for (std::size_t b2 = 0; b2 < 2; ++b2) {
          const double sa = (a == a2) ? 1.0 : -1.0;
          const double sb = (b == b2) ? 1.0 : -1.0;
          double value = 0.0;
          if (b == b2) value += v1 * sa;
          if (a == a2) value += v2 * sb;
          m(static_cast<Eigen::Index>(cell(a, b)), static_cast<Eigen::Index>(cell(a2, b2))) = value;
        }
      }
    }
  }
  return m;
}

JointChannelGrid local_kick_step(const JointChannelGrid& grid, const BlockCovariance& cov, double dt,
                                 CounterRng& rng1, CounterRng& rng2, const KickOptions& options,
                                 std::array<double, 4>* increment) {
  cov.validate();
  if (!(dt > 0.0)) throw StepSizeError("epr", "dt must be positive", 0.0);
  const double fastest = std::max(cov.lambda1, cov.lambda2);
  if (fastest * dt > options.max_rate_step) {
    throw StepSizeError("epr",
                        "max(lambda1, lambda2)*dt = " + std::to_string(fastest * dt) + " exceeds cap " +
                            std::to_string(options.max_rate_step),
                        options.max_rate_step / fastest);
  }

  std::array<double, 4> inc{};
  const double rows = grid.row_mass(0) * grid.row_mass(1);
  const double cols = grid.column_mass(0) * grid.column_mass(1);

  auto deposit = [&](std::size_t a, std::size_t b, double share, bool along_row) {
    if (!grid.frozen[cell(a, b)]) {
      inc[cell(a, b)] += share;
      return;
    }
    const std::size_t target = along_row ? cell(a, 1 - b) : cell(1 - a, b);
    if (!grid.frozen[target]) inc[target] += share;
  };

  if (options.apparatus1 && cov.lambda1 > 0.0 && rows > 0.0) {
    const double sd = std::sqrt(0.5 * cov.lambda1 * rows * dt);
    for (std::size_t b = 0; b < 2; ++b) {
      const double u = sd * rng1.normal();
      deposit(0, b, u, true);
      deposit(1, b, -u, true);
    }
  }
  if (options.apparatus2 && cov.lambda2 > 0.0 && cols > 0.0) {
    const double sd = std::sqrt(0.5 * cov.lambda2 * cols * dt);
    for (std::size_t a = 0; a < 2; ++a) {
      const double w = sd * rng2.normal();
      deposit(a, 0, w, false);
      deposit(a, 1, -w, false);
    }
  }

  JointChannelGrid next = grid;
  bool repair = false;
  for (std::size_t k = 0; k < 4; ++k) {
    if (grid.frozen[k]) continue;
    next.q[k] = grid.q[k] + inc[k];
    if (next.q[k] <= options.freeze_tol) repair = true;
  }

  std::array<double, 2> columns{};
  if (!repair) {
    for (std::size_t b = 0; b < 2; ++b) {
      columns[b] = grid.column_mass(b) + (inc[cell(0, b)] + inc[cell(1, b)]);
    }
  } else {
    // Overshoot: freeze the cells that crossed, hand the deficit back to the
    // survivors in proportion to their size.
    double positive = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
      if (next.frozen[k]) continue;
      if (next.q[k] <= options.freeze_tol) {
        next.q[k] = 0.0;
        next.frozen[k] = true;
      } else {
        positive += next.q[k];
      }
    }
    for (double& x : next.q) x /= positive;
    columns = {next.column_mass(0), next.column_mass(1)};
  }
  canonicalize(next, columns);

  if (increment != nullptr) {
    for (std::size_t k = 0; k < 4; ++k) (*increment)[k] = next.q[k] - grid.q[k];
  }
  return next;
}

std::vector<KickSample> sample_single_kicks(const JointChannelGrid& grid, const BlockCovariance& cov,
                                            double dt, std::size_t count, std::uint64_t seed,
                                            const KickOptions& options) {
  grid.validate();
  std::vector<KickSample> out(count);
  parallel_for(count, [&](std::size_t i) {
    CounterRng rng1(seed, i, 1);
    CounterRng rng2(seed, i, 2);
    out[i].before = grid.q;
    local_kick_step(grid, cov, dt, rng1, rng2, options, &out[i].increment);
  });
  return out;
}

namespace {

struct TrajectoryResult {
  std::size_t outcome = 4;
  double time = 0.0;
  bool frozen_violation = false;
  bool absorbed = false;
  std::vector<KickSample> interior;
};

bool interior(const JointChannelGrid& g) {
  return std::all_of(g.q.begin(), g.q.end(), [](double x) { return x > 0.05; });
}

TrajectoryResult run_one(const JointChannelGrid& start, const BlockCovariance& cov, double dt,
                         std::uint64_t seed, std::size_t index, const JointReductionOptions& options) {
  CounterRng rng1(seed, index, 1);
  CounterRng rng2(seed, index, 2);
  TrajectoryResult r;
  JointChannelGrid g = start;
  KickOptions kick = options.kick;
  std::array<double, 4> inc{};
  for (std::size_t step = 0;; ++step) {
    for (std::size_t k = 0; k < 4; ++k) {
      if (g.q[k] >= 1.0 - options.absorb_tol) {
        r.outcome = k;
        r.time = static_cast<double>(step) * dt;
        r.absorbed = true;
        return r;
      }
    }
    if (step >= options.max_steps) return r;
    if (options.sequential) {
      const bool alpha_done = g.row_mass(0) == 0.0 || g.row_mass(1) == 0.0;
      kick.apparatus2 = options.kick.apparatus2 && alpha_done;
    }
    const bool record = r.interior.size() < options.interior_samples_per_trajectory && interior(g);
    const JointChannelGrid next = local_kick_step(g, cov, dt, rng1, rng2, kick, record ? &inc : nullptr);
    if (record) r.interior.push_back({g.q, inc});
    for (std::size_t k = 0; k < 4; ++k) {
      if (g.frozen[k] && next.q[k] != 0.0) r.frozen_violation = true;
    }
    g = next;
  }
}

}  // namespace

JointReductionSummary run_joint_reduction(const SpinPairState& state, const BlockCovariance& cov,
                                          double dt, std::size_t trajectories, std::uint64_t seed,
                                          const JointReductionOptions& options) {
  cov.validate();
  if (trajectories == 0) throw InsufficientDataError("epr", "no trajectories requested");
  const std::array<Complex, 4> c = rotate_coefficients(state);
  const JointChannelGrid start = joint_weights(c);

  std::vector<TrajectoryResult> results(trajectories);
  parallel_for(trajectories, [&](std::size_t i) { results[i] = run_one(start, cov, dt, seed, i, options); });

  const auto failures = static_cast<std::size_t>(
      std::count_if(results.begin(), results.end(), [](const TrajectoryResult& r) { return !r.absorbed; }));
  if (failures > 0) {
    throw NonAbsorptionError("epr", std::to_string(failures) + " of " + std::to_string(trajectories) +
                                        " trajectories did not absorb");
  }

  JointReductionSummary s;
  s.trajectories = trajectories;
  for (std::size_t k = 0; k < 4; ++k) s.expected[k] = std::norm(c[k]);
  s.expected_marginal1 = {s.expected[0] + s.expected[1], s.expected[2] + s.expected[3]};
  s.outcomes.reserve(trajectories);
  s.absorption_times.reserve(trajectories);
  for (auto& r : results) {
    ++s.counts[r.outcome];
    s.outcomes.push_back(r.outcome);
    s.absorption_times.push_back(r.time);
    if (r.frozen_violation) ++s.frozen_violations;
    s.interior_samples.insert(s.interior_samples.end(), r.interior.begin(), r.interior.end());
  }
  const double n = static_cast<double>(trajectories);
  for (std::size_t k = 0; k < 4; ++k) {
    s.frequencies[k] = static_cast<double>(s.counts[k]) / n;
    s.halfwidths[k] = stats::binomial_halfwidth(s.expected[k], trajectories);
  }
  for (std::size_t a = 0; a < 2; ++a) {
    s.marginal1_frequencies[a] = s.frequencies[cell(a, 0)] + s.frequencies[cell(a, 1)];
    s.marginal1_halfwidths[a] = stats::binomial_halfwidth(s.expected_marginal1[a], trajectories);
  }
  return s;
}

BlockCheckReport covariance_block_check(const std::vector<KickSample>& samples, const BlockCovariance& cov,
                                        double dt, std::size_t min_samples) {
  BlockCheckReport report;
  std::vector<const KickSample*> kept;
  for (const auto& s : samples) {
    if (std::all_of(s.before.begin(), s.before.end(), [](double x) { return x > 0.05; })) kept.push_back(&s);
  }
  report.samples = kept.size();
  if (kept.size() < min_samples) {
    report.inconclusive = true;
    report.note = "only " + std::to_string(kept.size()) + " interior increments, need " + std::to_string(min_samples);
    return report;
  }

  std::vector<double> products(kept.size());
  report.pass = true;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = i; j < 4; ++j) {
      BlockEntry e;
      e.i = i;
      e.j = j;
      e.block_zero = (i / 2 != j / 2) && (i % 2 != j % 2);
      double model = 0.0;
      for (std::size_t k = 0; k < kept.size(); ++k) {
        products[k] = kept[k]->increment[i] * kept[k]->increment[j];
        JointChannelGrid g;
        g.q = kept[k]->before;
        model += cov.model(g)(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * dt;
      }
      const stats::Moments m = stats::moments(products);
      e.empirical = m.mean;
      e.model = model / static_cast<double>(kept.size());
      e.standard_error = m.standard_error();
      e.z = e.standard_error > 0.0 ? (e.empirical - e.model) / e.standard_error : (e.empirical == e.model ? 0.0 : INFINITY);
      if (e.block_zero || e.model == 0.0) {
        e.pass = std::abs(e.z) <= 3.0;
      } else {
        e.pass = std::abs(e.empirical - e.model) <= 0.1 * std::abs(e.model);
      }
      report.pass = report.pass && e.pass;
      report.entries.push_back(e);
    }
  }
  return report;
}

}  // namespace collapse
