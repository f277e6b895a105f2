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

#include "collapse_lab/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "collapse_lab/errors.hpp"
#include "collapse_lab/parallel.hpp"
#include "collapse_lab/stats.hpp"

namespace collapse {

namespace {
using Index = Eigen::Index;
}

CovarianceModel::CovarianceModel(std::string family, double lambda, Shape shape)
    : family_(std::move(family)), lambda_(lambda), shape_(std::move(shape)) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ModelError("reduction", "covariance rate must be finite and >= 0");
  }
}

CovarianceModel CovarianceModel::wright_fisher(double lambda) {
  return CovarianceModel("wright-fisher", lambda, [](std::span<const double> p) {
    const auto n = static_cast<Index>(p.size());
    Eigen::MatrixXd a(n, n);
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) {
        a(i, j) = p[static_cast<std::size_t>(i)] * ((i == j ? 1.0 : 0.0) - p[static_cast<std::size_t>(j)]);
      }
    }
    return a;
  });
}

CovarianceModel CovarianceModel::custom(std::string family, double lambda, Shape shape) {
  return CovarianceModel(std::move(family), lambda, std::move(shape));
}

Eigen::MatrixXd CovarianceModel::matrix(std::span<const double> p) const {
  return lambda_ * shape_(p);
}

ChannelSimplex brownian_step(const ChannelSimplex& p, const CovarianceModel& model, double dt,
                             CounterRng& rng, const BrownianOptions& options) {
  if (!(dt > 0.0)) throw StepSizeError("reduction", "dt must be positive", 0.0);
  if (model.rate() * dt > options.max_rate_step) {
    throw StepSizeError("reduction",
                        "lambda*dt = " + std::to_string(model.rate() * dt) + " exceeds cap " +
                            std::to_string(options.max_rate_step),
                        options.max_rate_step / model.rate());
  }

  std::vector<std::size_t> live;
  for (std::size_t j = 0; j < p.channels(); ++j) {
    if (p.p[j] > 0.0) live.push_back(j);
  }
  if (live.size() <= 1 || model.rate() == 0.0) return p;

  std::vector<double> sub(live.size());
  for (std::size_t i = 0; i < live.size(); ++i) sub[i] = p.p[live[i]];
  const Eigen::MatrixXd cov = model.matrix(sub);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw ModelError("reduction", "covariance eigen-solve failed");

  const auto n = static_cast<Index>(live.size());
  Eigen::VectorXd increment = Eigen::VectorXd::Zero(n);
  const double sqrt_dt = std::sqrt(dt);
  for (Index e = 0; e < n; ++e) {
    const double z = rng.normal();
    const double mu = solver.eigenvalues()(e);
    if (mu > options.eigen_floor) increment += (std::sqrt(mu) * sqrt_dt * z) * solver.eigenvectors().col(e);
  }
  // Remove rounding-level drift off the zero-sum subspace.
  increment.array() -= increment.mean();

  ChannelSimplex next = p;
  double deficit = 0.0;
  double positive = 0.0;
  for (std::size_t i = 0; i < live.size(); ++i) {
    double& x = next.p[live[i]];
    x += increment(static_cast<Index>(i));
    if (x <= 0.0) {
      deficit -= x;
      x = 0.0;
    } else {
      positive += x;
    }
  }
  if (deficit > 0.0) {
    for (std::size_t j : live) next.p[j] /= positive;
  }
  next.canonicalize();
  return next;
}

AbsorptionRecord run_to_absorption(const ChannelSimplex& p0, const CovarianceModel& model, double dt,
                                   CounterRng& rng, const AbsorptionOptions& options) {
  p0.validate();
  ChannelSimplex state = p0;
  state.canonicalize();
  AbsorptionRecord record;

  auto absorbed = [&](const ChannelSimplex& s) -> std::size_t {
    for (std::size_t j = 0; j < s.channels(); ++j) {
      if (s.p[j] >= 1.0 - options.absorb_tol) return j;
    }
    return s.channels();
  };

  for (;;) {
    if (const std::size_t w = absorbed(state); w < state.channels()) {
      record.winner = w;
      record.time = static_cast<double>(record.steps) * dt;
      if (options.record_trajectory) {
        std::vector<double> vertex(state.channels(), 0.0);
        vertex[w] = 1.0;
        record.trajectory.push_back(std::move(vertex));
      }
      return record;
    }
    if (record.steps >= options.max_steps) {
      std::string where;
      for (double x : state.p) where += std::to_string(x) + " ";
      throw NonAbsorptionError("reduction", "no absorption after " + std::to_string(options.max_steps) +
                                                " steps; final state " + where);
    }
    state = brownian_step(state, model, dt, rng, options.step);
    ++record.steps;
    if (options.record_trajectory) record.trajectory.push_back(state.p);
  }
}

TailFit fit_survival_tail(std::span<const double> absorption_times, std::size_t min_survivors) {
  std::vector<double> sorted(absorption_times.begin(), absorption_times.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  std::vector<double> ts, logs;
  for (std::size_t i = n / 2; i + min_survivors < n; ++i) {
    // Survival just after the i-th sorted time: (n - i - 1) / n.
    ts.push_back(sorted[i]);
    logs.push_back(std::log(static_cast<double>(n - i - 1) / static_cast<double>(n)));
  }
  if (ts.size() < 3) throw InsufficientDataError("reduction", "too few absorption times for a tail fit");
  const stats::LineFit line = stats::fit_line(ts, logs);
  return {-line.slope, line.slope_stderr, line.r_squared, line.points};
}

BornRuleSummary born_rule_ensemble(const ChannelSimplex& p0, const CovarianceModel& model, double dt,
                                   std::size_t trajectories, std::uint64_t seed,
                                   const AbsorptionOptions& options, std::size_t histogram_bins) {
  p0.validate();
  if (trajectories == 0) throw InsufficientDataError("reduction", "no trajectories requested");

  std::vector<AbsorptionRecord> records(trajectories);
  std::vector<char> failed(trajectories, 0);
  AbsorptionOptions quiet = options;
  quiet.record_trajectory = false;
  parallel_for(trajectories, [&](std::size_t i) {
    CounterRng rng(seed, i);
    try {
      records[i] = run_to_absorption(p0, model, dt, rng, quiet);
    } catch (const NonAbsorptionError&) {
      failed[i] = 1;
    }
  });
  const auto failures = static_cast<std::size_t>(std::count(failed.begin(), failed.end(), 1));
  if (failures > 0) {
    throw NonAbsorptionError("reduction", std::to_string(failures) + " of " + std::to_string(trajectories) +
                                              " trajectories did not absorb");
  }

  BornRuleSummary s;
  s.trajectories = trajectories;
  s.counts.assign(p0.channels(), 0);
  s.winners.resize(trajectories);
  s.absorption_times.resize(trajectories);
  double time_sum = 0.0;
  for (std::size_t i = 0; i < trajectories; ++i) {
    s.winners[i] = records[i].winner;
    s.absorption_times[i] = records[i].time;
    ++s.counts[records[i].winner];
    time_sum += records[i].time;
  }
  s.mean_time = time_sum / static_cast<double>(trajectories);
  for (std::size_t j = 0; j < p0.channels(); ++j) {
    s.frequencies.push_back(static_cast<double>(s.counts[j]) / static_cast<double>(trajectories));
    s.halfwidths.push_back(stats::binomial_halfwidth(p0.p[j], trajectories));
  }

  const double t_max = *std::max_element(s.absorption_times.begin(), s.absorption_times.end());
  const std::size_t bins = std::max<std::size_t>(1, histogram_bins);
  const double width = t_max > 0.0 ? t_max / static_cast<double>(bins) : 1.0;
  for (std::size_t b = 0; b <= bins; ++b) s.histogram_edges.push_back(width * static_cast<double>(b));
  s.histogram_counts.assign(bins, 0);
  for (double t : s.absorption_times) {
    const auto b = std::min(bins - 1, static_cast<std::size_t>(t / width));
    ++s.histogram_counts[b];
  }

  try {
    s.tail = fit_survival_tail(s.absorption_times);
  } catch (const InsufficientDataError&) {
    s.tail = {};
  }
  return s;
}

std::vector<double> absorbed_fraction_by_time(const BornRuleSummary& summary, std::size_t channel,
                                              std::span<const double> times) {
  std::vector<double> out;
  out.reserve(times.size());
  for (double t : times) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < summary.trajectories; ++i) {
      if (summary.winners[i] == channel && summary.absorption_times[i] <= t) ++hits;
    }
    out.push_back(static_cast<double>(hits) / static_cast<double>(summary.trajectories));
  }
  return out;
}

namespace {

std::vector<double> diffusion_profile(const CovarianceModel& model, std::size_t grid_n) {
  std::vector<double> d(grid_n + 1, 0.0);
  const double h = 1.0 / static_cast<double>(grid_n);
  for (std::size_t i = 1; i < grid_n; ++i) {
    const double p = h * static_cast<double>(i);
    const std::vector<double> point{p, 1.0 - p};
    d[i] = 0.5 * model.matrix(point)(0, 0);
  }
  return d;
}

}  // namespace

double fokker_planck_stability_bound(const CovarianceModel& model, std::size_t grid_n) {
  const std::vector<double> d = diffusion_profile(model, grid_n);
  const double d_max = *std::max_element(d.begin(), d.end());
  const double h = 1.0 / static_cast<double>(grid_n);
  return d_max > 0.0 ? h * h / (2.0 * d_max) : std::numeric_limits<double>::infinity();
}

FokkerPlanckResult fokker_planck_2ch(double p0, const CovarianceModel& model, std::size_t grid_n,
                                     double t_end, const FokkerPlanckOptions& options) {
  if (grid_n < 200) throw DimensionError("reduction", "Fokker-Planck grid_n must be >= 200");
  if (!(p0 >= 0.0 && p0 <= 1.0)) throw ModelError("reduction", "p0 must lie in [0, 1]");
  if (!(t_end > 0.0)) throw ModelError("reduction", "t_end must be positive");
  for (std::size_t c = 0; c < options.checkpoints.size(); ++c) {
    const double t = options.checkpoints[c];
    if (!(t > 0.0 && t <= t_end) || (c > 0 && t <= options.checkpoints[c - 1])) {
      throw ModelError("reduction", "checkpoints must be increasing and within (0, t_end]");
    }
  }

  FokkerPlanckResult result;
  result.grid_n = grid_n;
  result.stability_bound = fokker_planck_stability_bound(model, grid_n);
  if (options.dt > 0.0) {
    if (options.dt > result.stability_bound) {
      throw StepSizeError("reduction",
                          "Fokker-Planck dt " + std::to_string(options.dt) + " exceeds stability bound " +
                              std::to_string(result.stability_bound),
                          result.stability_bound);
    }
    result.dt = options.dt;
  } else {
    result.dt = std::min(options.safety * result.stability_bound, t_end);
  }

  const double h = 1.0 / static_cast<double>(grid_n);
  const std::vector<double> diff = diffusion_profile(model, grid_n);
  std::vector<double> q(grid_n + 1, 0.0);
  std::vector<double> flux(grid_n + 1, 0.0);
  double absorbed_zero = 0.0;
  double absorbed_one = 0.0;

  // Linear split of the initial delta between the bracketing nodes.
  const double scaled = p0 * static_cast<double>(grid_n);
  const auto lower = std::min(grid_n - 1, static_cast<std::size_t>(std::floor(scaled)));
  const double frac = scaled - static_cast<double>(lower);
  auto deposit = [&](std::size_t node, double mass) {
    if (node == 0) {
      absorbed_zero += mass;
    } else if (node == grid_n) {
      absorbed_one += mass;
    } else {
      q[node] += mass / h;
    }
  };
  deposit(lower, 1.0 - frac);
  deposit(lower + 1, frac);

  auto interior_mass = [&] {
    double m = 0.0;
    for (std::size_t i = 1; i < grid_n; ++i) m += q[i];
    return m * h;
  };
  auto snapshot = [&](double t) {
    FokkerPlanckSnapshot s;
    s.time = t;
    s.absorbed_zero = absorbed_zero;
    s.absorbed_one = absorbed_one;
    s.interior = interior_mass();
    s.density.assign(q.begin() + 1, q.end() - 1);
    result.snapshots.push_back(std::move(s));
  };

  std::vector<double> stops = options.checkpoints;
  if (stops.empty() || stops.back() < t_end) stops.push_back(t_end);
  const std::size_t samples = std::max<std::size_t>(1, options.mass_samples);
  std::vector<double> sample_times;
  for (std::size_t k = 1; k <= samples; ++k) sample_times.push_back(t_end * static_cast<double>(k) / static_cast<double>(samples));
  std::size_t next_sample = 0;

  double t = 0.0;
  const double inv_h2 = 1.0 / (h * h);
  for (std::size_t stop_index = 0; stop_index < stops.size(); ++stop_index) {
    const double stop = stops[stop_index];
    while (t < stop) {
      const double target = std::min(stop, next_sample < samples ? sample_times[next_sample] : stop);
      const double step = std::min(result.dt, target - t);
      for (std::size_t i = 1; i < grid_n; ++i) flux[i] = diff[i] * q[i];
      absorbed_zero += step * flux[1] / h;
      absorbed_one += step * flux[grid_n - 1] / h;
      for (std::size_t i = 1; i < grid_n; ++i) {
        q[i] += step * inv_h2 * (flux[i + 1] - 2.0 * flux[i] + flux[i - 1]);
      }
      t = (step == target - t) ? target : t + step;
      if (next_sample < samples && t >= sample_times[next_sample]) {
        result.mass_times.push_back(t);
        result.interior_mass.push_back(interior_mass());
        ++next_sample;
      }
    }
    snapshot(stop);
  }
  return result;
}

TailFit interior_decay_rate(const FokkerPlanckResult& result, double t_from) {
  std::vector<double> ts, logs;
  for (std::size_t i = 0; i < result.mass_times.size(); ++i) {
    if (result.mass_times[i] >= t_from && result.interior_mass[i] > 1e-300) {
      ts.push_back(result.mass_times[i]);
      logs.push_back(std::log(result.interior_mass[i]));
    }
  }
  if (ts.size() < 3) throw InsufficientDataError("reduction", "too few interior-mass samples");
  const stats::LineFit line = stats::fit_line(ts, logs);
  return {-line.slope, line.slope_stderr, line.r_squared, line.points};
}

}  // namespace collapse
