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

#include "collapse_lab/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "collapse_lab/cascade.hpp"
#include "collapse_lab/collision.hpp"
#include "collapse_lab/decoherence.hpp"
#include "collapse_lab/epr.hpp"
#include "collapse_lab/errors.hpp"
#include "collapse_lab/reduction.hpp"
#include "collapse_lab/stats.hpp"
#include "config_fields.hpp"

namespace collapse {

using nlohmann::json;
using detail::Fields;

namespace {

constexpr std::uint64_t kMaxTrajectories = 10'000'000;
constexpr std::uint64_t kMaxSteps = 1'000'000'000;

Check at_most(std::string name, double measured, double upper, std::string detail = {}) {
  Check c;
  c.name = std::move(name);
  c.measured = measured;
  c.upper = upper;
  c.pass = measured <= upper;
  c.detail = std::move(detail);
  return c;
}

Check at_least(std::string name, double measured, double lower, std::string detail = {}) {
  Check c;
  c.name = std::move(name);
  c.measured = measured;
  c.lower = lower;
  c.pass = measured >= lower;
  c.detail = std::move(detail);
  return c;
}

Check within(std::string name, double measured, double expected, double halfwidth, std::string detail = {}) {
  Check c;
  c.name = std::move(name);
  c.measured = measured;
  c.expected = expected;
  c.lower = expected - halfwidth;
  c.upper = expected + halfwidth;
  c.pass = std::abs(measured - expected) <= halfwidth;
  c.detail = std::move(detail);
  return c;
}

/// Core tolerances plus the check thresholds a kind understands.
struct Thresholds {
  Tolerances tol;
  std::map<std::string, double> checks;

  double operator[](const std::string& key) const { return checks.at(key); }
};

Thresholds read_thresholds(const json& doc, std::map<std::string, double> check_defaults) {
  Thresholds t;
  Fields f(doc, "tolerances");
  t.tol.hermitian = f.positive_or("hermitian", t.tol.hermitian);
  t.tol.trace = f.positive_or("trace", t.tol.trace);
  t.tol.psd = f.positive_or("psd", t.tol.psd);
  t.tol.simplex_sum = f.positive_or("simplex_sum", t.tol.simplex_sum);
  t.tol.eigen_floor = f.positive_or("eigen_floor", t.tol.eigen_floor);
  t.tol.gap_floor = f.positive_or("gap_floor", t.tol.gap_floor);
  t.tol.absorb = f.positive_or("absorb", t.tol.absorb);
  for (auto& [key, value] : check_defaults) value = f.positive_or(key, value);
  f.finish();
  t.checks = std::move(check_defaults);
  return t;
}

std::string p_label(double p) { return format_real(p); }

// ---------------------------------------------------------------- collide

std::vector<double> dirichlet_weights(std::size_t k, CounterRng& rng) {
  std::vector<double> w(k);
  double sum = 0.0;
  for (double& x : w) {
    x = -std::log(rng.uniform_pos());
    sum += x;
  }
  for (double& x : w) x /= sum;
  return w;
}

double hermiticity_defect(const ComplexMatrix& m) { return (m - m.adjoint()).cwiseAbs().maxCoeff(); }

RunReport run_collide(const ExperimentConfig& cfg, const RunOptions&) {
  Fields f(cfg.parameters, "parameters");
  const auto sectors = f.count("sectors", 2, 64);
  const auto labels = f.count("momentum_labels", 1, 64);
  const auto instances = f.count("instances", 1, 100'000);
  const double eps = f.positive("eps");
  const double coupling = f.positive("coupling");
  const double density = f.positive("density");
  const double q_mean = f.real_or("q_mean", 0.0);
  const double speed = f.positive_or("speed", 1.0);
  const auto pert_instances = f.count_or("perturbation_instances", 100, 1, 100'000);
  const double pert_eps = f.positive("perturbation_eps");
  f.finish();
  if (eps > 1.0) throw ConfigError("parameters.eps: must lie in (0, 1]");
  if (coupling > 1.0) throw ConfigError("parameters.coupling: must lie in (0, 1]");
  if (pert_eps > 1.0) throw ConfigError("parameters.perturbation_eps: must lie in (0, 1]");
  const Thresholds th = read_thresholds(cfg.tolerances, {{"conservation", 1e-12}, {"sum_rule", 1e-8},
                                                         {"convergence_ratio_rel", 0.2}});

  RunReport report;
  report.config = cfg;
  const WavePacketParams wp = WavePacketParams::from_density(density, q_mean, speed);

  double worst_trace = 0.0;
  double worst_herm = 0.0;
  double worst_sum_rule = 0.0;
  for (std::uint64_t i = 0; i < instances; ++i) {
    CounterRng rng(cfg.seed, i, 0);
    const SectorEnsemble ens = SectorEnsemble::from_weights(dirichlet_weights(sectors, rng));
    ToyTMatrixOptions opt;
    opt.coupling = coupling;
    const ToyTMatrix t = generate_toy_tmatrix(ens, labels, opt, rng);
    const ComplexMatrix delta = collision_delta(ens.with_random_phases(rng), t, eps);
    worst_trace = std::max(worst_trace, std::abs(delta.trace()));
    worst_herm = std::max(worst_herm, hermiticity_defect(delta));

    opt.saturate_sum_rule = true;
    const ToyTMatrix sat = generate_toy_tmatrix(ens, labels, opt, rng);
    for (std::size_t k = 0; k < sectors; ++k) {
      double total = 0.0;
      for (std::size_t kp = 0; kp < sectors; ++kp) total += transition_probability(sat, wp, k, kp);
      worst_sum_rule = std::max(worst_sum_rule, std::abs(total - 1.0));
    }
  }
  report.checks.push_back(at_most("delta_trace_max", worst_trace, th["conservation"]));
  report.checks.push_back(at_most("delta_hermiticity_max", worst_herm, th["conservation"]));
  report.checks.push_back(at_most("sum_rule_max_defect", worst_sum_rule, th["sum_rule"]));

  // Well-separated weights p_k proportional to K - k.
  std::vector<double> spaced(sectors);
  const double norm = 0.5 * static_cast<double>(sectors * (sectors + 1));
  for (std::size_t k = 0; k < sectors; ++k) spaced[k] = static_cast<double>(sectors - k) / norm;

  CsvTable table{"perturbation.csv", {"instance", "error_full", "error_half", "ratio", "unitarity_defect"}, {}};
  double ratio_min = INFINITY;
  double ratio_max = 0.0;
  double defect_min = INFINITY;
  for (std::uint64_t i = 0; i < pert_instances; ++i) {
    CounterRng rng(cfg.seed, i, 1);
    ToyTMatrixOptions opt;
    opt.coupling = coupling;
    SectorEnsemble ens = SectorEnsemble::from_weights(spaced);
    const ToyTMatrix t = generate_toy_tmatrix(ens, labels, opt, rng);
    ens = ens.with_random_phases(rng);
    double errors[2];
    double defect = 0.0;
    for (int h = 0; h < 2; ++h) {
      const ComplexMatrix delta = collision_delta(ens, t, h == 0 ? pert_eps : 0.5 * pert_eps);
      const PerturbativeUpdate pert = perturbative_sector_update(ens, delta, th.tol.gap_floor);
      const ExactUpdate exact = rediagonalize_oracle(ens, delta, th.tol);
      double err = 0.0;
      for (std::size_t k = 0; k < sectors; ++k) {
        err = std::max(err, std::abs(exact.weights[k] - ens.weights[k] - pert.weight_shifts[k]));
      }
      errors[h] = err;
      if (h == 0) defect = exact.unitarity_defect;
    }
    const double ratio = errors[0] / errors[1];
    ratio_min = std::min(ratio_min, ratio);
    ratio_max = std::max(ratio_max, ratio);
    defect_min = std::min(defect_min, defect);
    table.rows.push_back({static_cast<std::int64_t>(i), errors[0], errors[1], ratio, defect});
  }
  const double rel = th["convergence_ratio_rel"];
  report.checks.push_back(within("convergence_ratio_min", ratio_min, 4.0, 4.0 * rel));
  report.checks.push_back(within("convergence_ratio_max", ratio_max, 4.0, 4.0 * rel));
  Check defect = at_least("unitarity_defect_min", defect_min, 0.0);
  defect.pass = defect_min > 0.0;
  defect.detail = "strictly positive for generic off-diagonal deltas";
  report.checks.push_back(defect);
  report.metrics["wave_packet_size"] = wp.size;
  report.tables.push_back(std::move(table));
  return report;
}

// --------------------------------------------------------------- decohere

RunReport run_decohere(const ExperimentConfig& cfg, const RunOptions&) {
  Fields f(cfg.parameters, "parameters");
  CollisionStream stream;
  stream.flux = f.positive("flux");
  stream.cross_section = f.positive("cross_section");
  stream.separated = f.flag_or("separated", true);
  const auto sectors = f.count("sectors", 1, 10'000'000);
  const double dt = f.positive("dt");
  const auto steps = f.count("steps", 20, 10'000'000);
  const Complex c1 = f.complex("c1");
  const Complex c2 = f.complex("c2");
  const auto replicates = f.count_or("replicates", 3, 1, 1000);
  const std::string mode = f.text_or("mode", "continuous");
  DecoherenceOptions opts;
  opts.max_rate_step = f.positive_or("max_rate_step", opts.max_rate_step);
  f.finish();
  if (mode == "continuous") {
    opts.mode = ArrivalMode::continuous_rate;
  } else if (mode == "poisson") {
    opts.mode = ArrivalMode::poisson_events;
  } else {
    throw ConfigError("parameters.mode: must be \"continuous\" or \"poisson\"");
  }
  const Thresholds th = read_thresholds(cfg.tolerances, {{"decay_rate_rel", 0.05}});

  RunReport report;
  report.config = cfg;
  const double rate = stream.rate();
  const PointerChannelAmplitudes initial =
      PointerChannelAmplitudes::initial(c1, c2, std::vector<double>(sectors, 1.0 / static_cast<double>(sectors)));

  json fits = json::array();
  for (std::uint64_t r = 0; r < replicates; ++r) {
    const std::uint64_t seed = cfg.seed + r;
    const auto series = run_decoherence(initial, stream, dt, steps, seed, opts);
    std::vector<double> times, mags;
    bool diag_constant = true;
    for (const auto& s : series) {
      times.push_back(s.time);
      mags.push_back(std::abs(s.offdiag));
      diag_constant = diag_constant && s.diag1 == series.front().diag1 && s.diag2 == series.front().diag2;
    }
    const DecayFit fit = decay_rate_fit(times, mags);
    report.checks.push_back(within("decay_rate[seed=" + std::to_string(seed) + "]", fit.rate, rate,
                                   th["decay_rate_rel"] * rate));
    Check diag;
    diag.name = "diagonal_bitwise_constant[seed=" + std::to_string(seed) + "]";
    diag.measured = diag_constant ? 1.0 : 0.0;
    diag.expected = 1.0;
    diag.pass = diag_constant;
    report.checks.push_back(diag);
    fits.push_back({{"seed", seed}, {"rate", fit.rate}, {"rate_stderr", fit.rate_stderr},
                    {"r_squared", fit.r_squared}, {"points", fit.points}});
    if (r == 0) {
      CsvTable table{"offdiag_timeseries.csv", {"t", "offdiag_re", "offdiag_im", "diag_1", "diag_2"}, {}};
      for (const auto& s : series) {
        table.rows.push_back({s.time, s.offdiag.real(), s.offdiag.imag(), s.diag1, s.diag2});
      }
      report.tables.push_back(std::move(table));
    }
  }
  report.metrics["configured_rate"] = rate;
  report.metrics["fits"] = fits;
  return report;
}

// ---------------------------------------------------------------- cascade

RunReport run_cascade(const ExperimentConfig& cfg, const RunOptions& run) {
  Fields f(cfg.parameters, "parameters");
  const double tau = f.positive("tau");
  const double epsilon = f.positive("epsilon");
  const double share1 = f.real_or("channel1_share", 0.5);
  const double t_end = f.positive_or("t_end", 10.0 * tau);
  const auto steps = f.count_or("steps", 10'000, 1, kMaxSteps);
  const auto curve_points = f.count_or("curve_points", 200, 2, 1'000'000);
  const std::vector<double> eps_grid = f.reals_or("epsilon_grid", {1e-3, 1e-2, 0.1});
  const std::vector<double> t_grid = f.reals_or("time_grid_tau", {0.1, 1.0, 10.0});
  const double n_atoms = f.positive("n_atoms_mean");
  const auto regions = f.count("regions", 1, 1'000'000);
  const auto repeats = f.count_or("repeats", 10'000, 100, kMaxTrajectories);
  const std::vector<double> p_grid = f.reals_or("p1_grid", {0.1, 0.3, 0.5, 0.7, 0.9});
  FrontierModel frontier;
  frontier.diffusion = f.positive("diffusion");
  frontier.region_size = f.positive("region_size");
  f.finish();
  frontier.tau = tau;
  frontier.regions = regions;
  if (!(epsilon < 1.0)) throw ConfigError("parameters.epsilon: must lie in (0, 1)");
  if (!(share1 >= 0.0 && share1 <= 1.0)) throw ConfigError("parameters.channel1_share: must lie in [0, 1]");
  for (double e : eps_grid) {
    if (!(e > 0.0 && e < 1.0)) throw ConfigError("parameters.epsilon_grid: entries must lie in (0, 1)");
  }
  for (double p : p_grid) {
    if (!(p > 0.0 && p < 1.0)) throw ConfigError("parameters.p1_grid: entries must lie in (0, 1)");
  }
  const Thresholds th = read_thresholds(cfg.tolerances, {{"closed_form", 1e-8}, {"asymptote", 1e-12},
                                                         {"integrator_simplex", 1e-10}, {"a12_model_rel", 0.1},
                                                         {"a12_r2", 0.95}});

  RunReport report;
  report.config = cfg;
  CascadeIntegrateOptions iopt;
  iopt.strict = run.strict;

  // Closed form vs RK4 over the (epsilon, t) grid plus the configured epsilon.
  std::vector<double> all_eps = eps_grid;
  all_eps.push_back(epsilon);
  double worst = 0.0;
  double drift = 0.0;
  double closed_defect = 0.0;
  double ratio_err = 0.0;
  for (double e : all_eps) {
    const double dq1 = share1 * e;
    const double dq2 = e - dq1;
    for (double tt : t_grid) {
      const double t = tt * tau;
      const CascadeIntegration num = cascade_integrate(CascadeState::seeded(dq1, dq2, tau), t, steps, iopt);
      for (const auto& w : num.warnings) report.warnings.push_back("cascade: " + w);
      const CascadeState ref = cascade_closed_form(t, e, dq1, dq2, tau);
      worst = std::max({worst, std::abs(num.state.q0 - ref.q0), std::abs(num.state.q1 - ref.q1),
                        std::abs(num.state.q2 - ref.q2)});
      drift = std::max(drift, std::abs(num.state.sum() - 1.0));
      closed_defect = std::max(closed_defect, std::abs(ref.sum() - 1.0));
    }
    const CascadeState late = cascade_closed_form(50.0 * tau, e, dq1, dq2, tau);
    const CascadeState limit = cascade_asymptote(e, dq1, dq2, tau);
    if (dq1 > 0.0) ratio_err = std::max(ratio_err, std::abs(late.q1 / limit.q1 - 1.0));
    if (dq2 > 0.0) ratio_err = std::max(ratio_err, std::abs(late.q2 / limit.q2 - 1.0));
  }
  report.checks.push_back(at_most("integrator_vs_closed_form_max_error", worst, th["closed_form"]));
  report.checks.push_back(at_most("integrator_simplex_drift", drift, th["integrator_simplex"]));
  report.checks.push_back(at_most("closed_form_simplex_defect", closed_defect, th["integrator_simplex"]));
  report.checks.push_back(at_most("asymptote_ratio_error_at_50tau", ratio_err, th["asymptote"]));

  CsvTable curve{"cascade_curve.csv", {"t", "q0", "q1", "q2", "q0_closed", "q1_closed", "q2_closed"}, {}};
  {
    const double dq1 = share1 * epsilon;
    const double dq2 = epsilon - dq1;
    const std::uint64_t stride = std::max<std::uint64_t>(1, steps / curve_points);
    std::uint64_t index = 0;
    iopt.observer = [&](double t, const CascadeState& s) {
      if (index++ % stride != 0 && index - 1 != steps) return;
      const CascadeState ref = cascade_closed_form(t, epsilon, dq1, dq2, tau);
      curve.rows.push_back({t, s.q0, s.q1, s.q2, ref.q0, ref.q1, ref.q2});
    };
    cascade_integrate(CascadeState::seeded(dq1, dq2, tau), t_end, steps, iopt);
  }
  report.tables.push_back(std::move(curve));

  // Frontier fluctuations.
  BetaSamplingOptions bopt;
  bopt.epsilon = epsilon;
  CsvTable cov_table{"covariance_table.csv", {"p1", "a11", "a22", "a12", "a12_model", "zero_sum_max"}, {}};
  std::vector<double> xs, ys;
  json per_point = json::array();
  for (std::size_t i = 0; i < p_grid.size(); ++i) {
    const ChannelSimplex p = ChannelSimplex::from({p_grid[i], 1.0 - p_grid[i]});
    const FrontierCovariance cov = frontier_covariance(p, n_atoms, frontier, repeats, cfg.seed + i, bopt);
    double zero_sum = 0.0;
    for (const auto& s : cov.samples) zero_sum = std::max(zero_sum, std::abs(s.dp1 + s.dp2));
    const double model = predicted_frontier_a12(p, n_atoms, regions);
    cov_table.rows.push_back({p.p[0], cov.a11, cov.a22, cov.a12, model, zero_sum});
    Check zs;
    zs.name = "zero_sum_exact[p1=" + p_label(p.p[0]) + "]";
    zs.measured = zero_sum;
    zs.expected = 0.0;
    zs.pass = zero_sum == 0.0;
    report.checks.push_back(zs);
    report.checks.push_back(at_most("a12_nonpositive[p1=" + p_label(p.p[0]) + "]", cov.a12, 0.0));
    if (p.p[0] == 0.5) {
      report.checks.push_back(within("a12_vs_model[p1=0.5]", cov.a12, model, th["a12_model_rel"] * std::abs(model)));
    }
    xs.push_back(p.p[0] * p.p[1]);
    ys.push_back(-cov.a12);
    per_point.push_back({{"p1", p.p[0]}, {"a12", cov.a12}, {"a12_rate", cov.a12_rate}, {"model", model}});
  }
  const stats::ProportionalFit fit = stats::fit_proportional(xs, ys);
  report.checks.push_back(at_least("a12_vs_p1p2_r_squared", fit.r_squared, th["a12_r2"],
                                   "consistency with A_12 = -lambda p1 p2; lambda fitted per aggregation"));
  report.tables.push_back(std::move(cov_table));
  report.metrics["frontier_velocity"] = frontier.velocity();
  report.metrics["frontier_crossing_time"] = frontier.crossing_time();
  report.metrics["fitted_lambda_per_aggregation"] = fit.slope;
  report.metrics["fitted_lambda_rate"] = fit.slope / frontier.crossing_time();
  report.metrics["covariance_points"] = per_point;
  return report;
}

// ----------------------------------------------------------------- reduce

RunReport run_reduce(const ExperimentConfig& cfg, const RunOptions&) {
  Fields f(cfg.parameters, "parameters");
  const double lambda = f.positive("lambda");
  const double dt = f.positive("dt");
  const std::vector<double> p0_values = f.reals("p0");
  const auto trajectories = f.count("trajectories", 1000, kMaxTrajectories);
  const auto max_steps = f.count_or("max_steps", 10'000'000, 1, kMaxSteps);
  const auto bins = f.count_or("histogram_bins", 40, 1, 100'000);
  const bool with_fp = f.has("fokker_planck");
  std::size_t grid_n = 0;
  double t_end = 0.0;
  std::vector<double> checkpoints;
  if (with_fp) {
    Fields fp = f.object("fokker_planck");
    grid_n = fp.count("grid_n", 200, 100'000);
    t_end = fp.positive("t_end");
    checkpoints = fp.reals("checkpoints");
    fp.finish();
  }
  f.finish();
  if (p0_values.size() < 2) throw ConfigError("parameters.p0: needs at least two channels");
  if (with_fp && p0_values.size() != 2) throw ConfigError("parameters.fokker_planck: needs exactly two channels");
  ChannelSimplex p0;
  try {
    p0 = ChannelSimplex::from(p0_values);
  } catch (const ModelError& e) {
    throw ConfigError(std::string("parameters.p0: ") + e.what());
  }
  const Thresholds th = read_thresholds(cfg.tolerances, {{"born_sigmas", 3.0}, {"fp_curve_abs", 0.02},
                                                         {"fp_mass", 1e-6}, {"fp_absorbed_abs", 0.01},
                                                         {"tail_r2", 0.98}, {"tail_rate_rel", 0.1}});

  RunReport report;
  report.config = cfg;
  const CovarianceModel model = CovarianceModel::wright_fisher(lambda);
  AbsorptionOptions aopt;
  aopt.absorb_tol = th.tol.absorb;
  aopt.max_steps = max_steps;
  aopt.step.eigen_floor = th.tol.eigen_floor;
  const BornRuleSummary born = born_rule_ensemble(p0, model, dt, trajectories, cfg.seed, aopt, bins);

  for (std::size_t j = 0; j < p0.channels(); ++j) {
    report.checks.push_back(within("winner_frequency[" + std::to_string(j) + "]", born.frequencies[j], p0.p[j],
                                   stats::binomial_halfwidth(p0.p[j], trajectories, th["born_sigmas"])));
  }
  report.checks.push_back(at_least("tail_log_survival_r_squared", born.tail.r_squared, th["tail_r2"]));

  CsvTable traj{"trajectories.csv", {"trajectory", "winner", "time"}, {}};
  for (std::size_t i = 0; i < trajectories; ++i) {
    traj.rows.push_back({static_cast<std::int64_t>(i), static_cast<std::int64_t>(born.winners[i]),
                         born.absorption_times[i]});
  }
  report.tables.push_back(std::move(traj));
  CsvTable hist{"absorption_histogram.csv", {"t_lo", "t_hi", "count"}, {}};
  for (std::size_t b = 0; b < born.histogram_counts.size(); ++b) {
    hist.rows.push_back({born.histogram_edges[b], born.histogram_edges[b + 1],
                         static_cast<std::int64_t>(born.histogram_counts[b])});
  }
  report.tables.push_back(std::move(hist));

  json freq = json::array();
  json half = json::array();
  for (std::size_t j = 0; j < p0.channels(); ++j) {
    freq.push_back(born.frequencies[j]);
    half.push_back(born.halfwidths[j]);
  }
  report.metrics["frequencies"] = freq;
  report.metrics["halfwidths"] = half;
  report.metrics["mean_absorption_time"] = born.mean_time;
  report.metrics["tail"] = {{"rate", born.tail.rate}, {"rate_stderr", born.tail.rate_stderr},
                            {"r_squared", born.tail.r_squared}, {"points", born.tail.points}};

  if (with_fp) {
    FokkerPlanckOptions fopt;
    fopt.checkpoints = checkpoints;
    const FokkerPlanckResult fp = fokker_planck_2ch(p0.p[0], model, grid_n, t_end, fopt);
    const std::vector<double> mc = absorbed_fraction_by_time(born, 0, checkpoints);
    CsvTable curve{"fokker_planck.csv", {"t", "absorbed_zero", "absorbed_one", "interior", "mc_absorbed_one"}, {}};
    double worst_curve = 0.0;
    double worst_mass = 0.0;
    for (std::size_t c = 0; c < fp.snapshots.size(); ++c) {
      const auto& s = fp.snapshots[c];
      worst_mass = std::max(worst_mass, std::abs(s.absorbed_zero + s.absorbed_one + s.interior - 1.0));
      const double mc_value = c < mc.size() ? mc[c] : absorbed_fraction_by_time(born, 0, std::vector<double>{s.time})[0];
      if (c < mc.size()) worst_curve = std::max(worst_curve, std::abs(mc_value - s.absorbed_one));
      curve.rows.push_back({s.time, s.absorbed_zero, s.absorbed_one, s.interior, mc_value});
    }
    report.checks.push_back(at_most("mc_vs_fokker_planck_absorbed_one_max_abs", worst_curve, th["fp_curve_abs"],
                                    std::to_string(mc.size()) + " checkpoints"));
    report.checks.push_back(at_most("fokker_planck_mass_defect", worst_mass, th["fp_mass"]));
    report.checks.push_back(within("fokker_planck_absorbed_one_final", fp.final().absorbed_one, p0.p[0],
                                   th["fp_absorbed_abs"]));
    const TailFit pde_tail = interior_decay_rate(fp, 0.5 * t_end);
    report.checks.push_back(within("tail_rate_mc_vs_fokker_planck", born.tail.rate, pde_tail.rate,
                                   th["tail_rate_rel"] * pde_tail.rate));
    report.metrics["fokker_planck"] = {{"dt", fp.dt}, {"stability_bound", fp.stability_bound},
                                       {"interior_decay_rate", pde_tail.rate}, {"grid_n", grid_n}};
    report.tables.push_back(std::move(curve));

    CsvTable density{"fokker_planck_density.csv", {"t", "p", "Q"}, {}};
    for (const auto& s : fp.snapshots) {
      for (std::size_t i = 0; i < s.density.size(); ++i) {
        density.rows.push_back({s.time, static_cast<double>(i + 1) / static_cast<double>(grid_n), s.density[i]});
      }
    }
    report.tables.push_back(std::move(density));
  }
  return report;
}

// -------------------------------------------------------------------- epr

RunReport run_epr(const ExperimentConfig& cfg, const RunOptions&) {
  Fields f(cfg.parameters, "parameters");
  SpinPairState state;
  state.a = f.complex("a");
  state.b = f.complex("b");
  state.theta = f.real("theta");
  BlockCovariance cov;
  cov.lambda1 = f.positive("lambda1");
  cov.lambda2 = f.positive("lambda2");
  const double dt = f.positive("dt");
  const auto trajectories = f.count("trajectories", 1000, kMaxTrajectories);
  JointReductionOptions jopt;
  jopt.sequential = f.flag_or("sequential", false);
  jopt.max_steps = f.count_or("max_steps", jopt.max_steps, 1, kMaxSteps);
  const auto block_samples = f.count_or("block_check_samples", 100'000, 1, kMaxTrajectories);
  const auto locality_trajectories = f.count_or("locality_trajectories", 1000, 1, kMaxTrajectories);
  const auto locality_steps = f.count_or("locality_steps", 200, 1, kMaxSteps);
  f.finish();
  try {
    state.validate();
  } catch (const ModelError& e) {
    throw ConfigError(std::string("parameters.a/b: ") + e.what());
  }
  const Thresholds th = read_thresholds(cfg.tolerances, {{"born_sigmas", 3.0}, {"block_z", 3.0}, {"block_rel", 0.1}});
  jopt.absorb_tol = th.tol.absorb;

  RunReport report;
  report.config = cfg;
  const JointReductionSummary s = run_joint_reduction(state, cov, dt, trajectories, cfg.seed, jopt);
  static const char* names[4] = {"++", "+-", "-+", "--"};
  for (std::size_t k = 0; k < 4; ++k) {
    report.checks.push_back(within(std::string("outcome_frequency[") + names[k] + "]", s.frequencies[k], s.expected[k],
                                   stats::binomial_halfwidth(s.expected[k], trajectories, th["born_sigmas"])));
  }
  for (std::size_t a = 0; a < 2; ++a) {
    report.checks.push_back(within(std::string("apparatus1_marginal[") + (a == 0 ? "+" : "-") + "]",
                                   s.marginal1_frequencies[a], s.expected_marginal1[a],
                                   stats::binomial_halfwidth(s.expected_marginal1[a], trajectories, th["born_sigmas"])));
  }
  Check frozen;
  frozen.name = "frozen_cell_permanence_violations";
  frozen.measured = static_cast<double>(s.frozen_violations);
  frozen.expected = 0.0;
  frozen.pass = s.frozen_violations == 0;
  report.checks.push_back(frozen);

  // Block structure on an interior grid.
  JointChannelGrid interior_grid = joint_weights({Complex(0.5), Complex(0.5), Complex(0.5), Complex(0.5)});
  const auto kicks = sample_single_kicks(interior_grid, cov, dt, block_samples, cfg.seed + 1);
  const BlockCheckReport block = covariance_block_check(kicks, cov, dt);
  CsvTable cov_table{"covariance.csv", {"cell_i", "cell_j", "block_zero", "empirical", "model", "stderr", "z", "pass"}, {}};
  for (const auto& e : block.entries) {
    cov_table.rows.push_back({std::string(names[e.i]), std::string(names[e.j]), static_cast<std::int64_t>(e.block_zero),
                              e.empirical, e.model, e.standard_error, e.z, static_cast<std::int64_t>(e.pass)});
    if (e.block_zero) {
      report.checks.push_back(at_most(std::string("block_zero_abs_z[") + names[e.i] + "," + names[e.j] + "]",
                                      std::abs(e.z), th["block_z"]));
    } else if (e.model != 0.0) {
      report.checks.push_back(within(std::string("block_entry[") + names[e.i] + "," + names[e.j] + "]", e.empirical,
                                     e.model, th["block_rel"] * std::abs(e.model)));
    }
  }
  Check conclusive;
  conclusive.name = "block_check_conclusive";
  conclusive.measured = static_cast<double>(block.samples);
  conclusive.lower = 10'000.0;
  conclusive.pass = !block.inconclusive;
  conclusive.detail = block.note;
  report.checks.push_back(conclusive);
  report.tables.push_back(std::move(cov_table));

  // One-sided locality: apparatus 2 silent, interior start, stop at the
  // first frozen cell.
  BlockCovariance silent = cov;
  silent.lambda2 = 0.0;
  std::size_t checked = 0;
  bool constant = true;
  for (std::uint64_t i = 0; i < locality_trajectories; ++i) {
    CounterRng rng1(cfg.seed + 2, i, 1);
    CounterRng rng2(cfg.seed + 2, i, 2);
    JointChannelGrid g = interior_grid;
    const double n0 = g.column_mass(0);
    const double n1 = g.column_mass(1);
    for (std::uint64_t step = 0; step < locality_steps; ++step) {
      const JointChannelGrid next = local_kick_step(g, silent, dt, rng1, rng2);
      if (std::any_of(next.frozen.begin(), next.frozen.end(), [](bool b) { return b; })) break;
      constant = constant && next.column_mass(0) == n0 && next.column_mass(1) == n1;
      ++checked;
      g = next;
    }
  }
  Check local;
  local.name = "apparatus2_marginals_bitwise_constant_when_lambda2_zero";
  local.measured = constant ? 1.0 : 0.0;
  local.expected = 1.0;
  local.pass = constant && checked > 0;
  local.detail = std::to_string(checked) + " interior steps checked";
  report.checks.push_back(local);

  CsvTable outcomes{"outcomes.csv", {"trajectory", "alpha", "beta", "time"}, {}};
  for (std::size_t i = 0; i < trajectories; ++i) {
    const std::size_t k = s.outcomes[i];
    outcomes.rows.push_back({static_cast<std::int64_t>(i), std::string(k / 2 == 0 ? "+" : "-"),
                             std::string(k % 2 == 0 ? "+" : "-"), s.absorption_times[i]});
  }
  report.tables.push_back(std::move(outcomes));

  json freq = json::object();
  json expected = json::object();
  for (std::size_t k = 0; k < 4; ++k) {
    freq[names[k]] = s.frequencies[k];
    expected[names[k]] = s.expected[k];
  }
  report.metrics["frequencies"] = freq;
  report.metrics["expected"] = expected;
  report.metrics["apparatus1_marginal"] = {s.marginal1_frequencies[0], s.marginal1_frequencies[1]};
  report.metrics["block_check_pass"] = block.pass;
  return report;
}

}  // namespace

RunReport run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  if (config.kind == "collide") return run_collide(config, options);
  if (config.kind == "decohere") return run_decohere(config, options);
  if (config.kind == "cascade") return run_cascade(config, options);
  if (config.kind == "reduce") return run_reduce(config, options);
  if (config.kind == "epr") return run_epr(config, options);
  throw ConfigError("kind: unknown experiment kind \"" + config.kind + "\"");
}

}  // namespace collapse
