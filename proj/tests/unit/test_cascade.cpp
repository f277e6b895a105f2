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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "collapse_lab/errors.hpp"
#include "collapse_lab/stats.hpp"

namespace collapse {
namespace {

double max_component_error(const CascadeState& a, const CascadeState& b) {
  return std::max({std::abs(a.q0 - b.q0), std::abs(a.q1 - b.q1), std::abs(a.q2 - b.q2)});
}

// Moments of n1/n - p1 with n ~ Poisson(mean), n1 ~ Binomial(n, p1), n <= 40,
// by brute-force enumeration of both counts.
struct Enumerated {
  double mean = 0.0;
  double m2 = 0.0;
  double m4 = 0.0;
};

Enumerated enumerate_fluctuation(double p1, double mean) {
  Enumerated e;
  for (int n = 0; n <= 40; ++n) {
    const double pn = std::exp(n * std::log(mean) - mean - std::lgamma(n + 1.0));
    if (n == 0) continue;
    for (int n1 = 0; n1 <= n; ++n1) {
      double pb = std::exp(std::lgamma(n + 1.0) - std::lgamma(n1 + 1.0) - std::lgamma(n - n1 + 1.0));
      pb *= std::pow(p1, n1) * std::pow(1.0 - p1, n - n1);
      const double d = static_cast<double>(n1) / n - p1;
      e.mean += pn * pb * d;
      e.m2 += pn * pb * d * d;
      e.m4 += pn * pb * d * d * d * d;
    }
  }
  return e;
}

TEST(CascadeClosedForm, InitialValues) {
  const auto s = cascade_closed_form(0.0, 0.01, 0.003, 0.007, 2.0);
  EXPECT_NEAR(s.q0, 0.99, 1e-15);
  EXPECT_NEAR(s.q1, 0.003, 1e-15);
  EXPECT_NEAR(s.q2, 0.007, 1e-15);
}

TEST(CascadeClosedForm, LongTimeLimit) {
  const double tau = 1.5;
  const auto s = cascade_closed_form(50.0 * tau, 0.1, 0.04, 0.06, tau);
  EXPECT_LE(s.q0, 1e-20);
  EXPECT_NEAR(s.q1, 0.4, 1e-12);
  EXPECT_NEAR(s.q2, 0.6, 1e-12);
}

TEST(CascadeClosedForm, ZeroEpsilonNeverCascades) {
  for (double t : {0.0, 1.0, 100.0}) {
    const auto s = cascade_closed_form(t, 0.0, 0.0, 0.0, 1.0);
    EXPECT_EQ(s.q0, 1.0);
    EXPECT_EQ(s.q1, 0.0);
    EXPECT_EQ(s.q2, 0.0);
  }
}

TEST(CascadeClosedForm, SumsToOneAndKeepsRatio) {
  for (double t : {0.0, 0.3, 1.0, 7.0, 30.0}) {
    const auto s = cascade_closed_form(t, 0.02, 0.005, 0.015, 1.0);
    EXPECT_NEAR(s.sum(), 1.0, 1e-15);
    EXPECT_NEAR(s.q1 / s.q2, 1.0 / 3.0, 1e-15);
  }
}

TEST(CascadeClosedForm, RejectsInconsistentSeed) {
  EXPECT_THROW(cascade_closed_form(1.0, 0.1, 0.05, 0.02, 1.0), ModelError);
  EXPECT_THROW(cascade_closed_form(1.0, 1.0, 0.5, 0.5, 1.0), ModelError);
}

TEST(CascadeAsymptote, ExactAmplification) {
  const double eps = 0.003;
  const auto s = cascade_asymptote(eps, 0.001, 0.002, 1.0);
  EXPECT_NEAR(s.q1 * eps / 0.001, 1.0, 1e-12);
  EXPECT_NEAR(s.q2 * eps / 0.002, 1.0, 1e-12);
}

TEST(CascadeIntegrate, MatchesClosedFormOnGrid) {
  const double tau = 1.0;
  for (double eps : {1e-3, 1e-2, 0.1}) {
    for (double t_end : {0.1 * tau, tau, 10.0 * tau}) {
      const double dq1 = 0.3 * eps;
      const double dq2 = eps - dq1;
      const auto run = cascade_integrate(CascadeState::seeded(dq1, dq2, tau), t_end, 10000);
      const auto exact = cascade_closed_form(t_end, eps, dq1, dq2, tau);
      EXPECT_LE(max_component_error(run.state, exact), 1e-8) << "eps " << eps << " t " << t_end;
      EXPECT_LE(std::abs(run.state.sum() - 1.0), 1e-10);
      EXPECT_TRUE(run.warnings.empty());
    }
  }
}

TEST(CascadeIntegrate, ZeroSeedStaysZero) {
  const auto run = cascade_integrate(CascadeState::seeded(0.0, 0.01, 1.0), 10.0, 1000);
  EXPECT_EQ(run.state.q1, 0.0);
}

TEST(CascadeIntegrate, ChannelRatioConstant) {
  CascadeIntegrateOptions opt;
  double worst = 0.0;
  opt.observer = [&](double, const CascadeState& s) { worst = std::max(worst, std::abs(s.q1 / s.q2 - 0.25)); };
  cascade_integrate(CascadeState::seeded(0.002, 0.008, 1.0), 10.0, 1000, opt);
  EXPECT_LE(worst, 1e-13);
}

TEST(CascadeIntegrate, CoarseStepWarnsOrThrows) {
  const auto seed = CascadeState::seeded(0.005, 0.005, 1.0);
  const auto run = cascade_integrate(seed, 10.0, 20);
  EXPECT_EQ(run.warnings.size(), 1u);
  CascadeIntegrateOptions strict;
  strict.strict = true;
  EXPECT_THROW(cascade_integrate(seed, 10.0, 20, strict), StepSizeError);
  EXPECT_THROW(cascade_integrate(seed, 1.0, 5), StepSizeError);
}

TEST(FrontierModel, Velocity) {
  FrontierModel f{4.0, 0.25, 0.5, 10};
  EXPECT_NEAR(f.velocity(), 8.0, 1e-12);
  EXPECT_NEAR(f.crossing_time(), 0.5 / 8.0, 1e-15);
  f.regions = 0;
  EXPECT_THROW(f.validate(), ModelError);
}

TEST(BetaFluctuations, DeadChannelStaysDead) {
  CounterRng rng(1, 0);
  for (const auto& f : sample_beta_fluctuations(ChannelSimplex::from({1.0, 0.0}), 4.0, 1000, rng)) {
    EXPECT_EQ(f.dp2, 0.0);
  }
}

TEST(BetaFluctuations, ZeroAtomsGiveZero) {
  CounterRng rng(2, 0);
  for (const auto& f : sample_beta_fluctuations(ChannelSimplex::from({0.3, 0.7}), 0.5, 1000, rng)) {
    if (f.atoms == 0) {
      EXPECT_EQ(f.dp1, 0.0);
      EXPECT_EQ(f.dp2, 0.0);
    }
  }
}

TEST(BetaFluctuations, MomentsMatchEnumeration) {
  const std::size_t n = 100000;
  CounterRng rng(3, 0);
  const auto fl = sample_beta_fluctuations(ChannelSimplex::from({0.5, 0.5}), 4.0, n, rng);
  std::vector<double> dp1;
  for (const auto& f : fl) dp1.push_back(f.dp1);
  const auto m = stats::moments(dp1);
  const auto e = enumerate_fluctuation(0.5, 4.0);
  EXPECT_NEAR(e.mean, 0.0, 1e-15);
  EXPECT_NEAR(m.mean, 0.0, 3.0 * std::sqrt(e.m2 / n));
  const double var_se = std::sqrt((e.m4 - e.m2 * e.m2) / n);
  EXPECT_NEAR(m.variance, e.m2, 3.0 * var_se);
}

TEST(BetaFluctuations, LopsidedChannelsFluctuateLess) {
  EXPECT_LT(enumerate_fluctuation(0.9, 4.0).m2, enumerate_fluctuation(0.5, 4.0).m2);
  CounterRng r1(4, 0), r2(4, 1);
  std::vector<double> a, b;
  for (const auto& f : sample_beta_fluctuations(ChannelSimplex::from({0.9, 0.1}), 4.0, 100000, r1)) a.push_back(f.dp1);
  for (const auto& f : sample_beta_fluctuations(ChannelSimplex::from({0.5, 0.5}), 4.0, 100000, r2)) b.push_back(f.dp1);
  EXPECT_LT(stats::moments(a).variance, stats::moments(b).variance);
}

TEST(AggregateFrontier, SingleRegionProjection) {
  const auto agg = aggregate_frontier({BetaFluctuation{0.2, 0.0, 1}});
  EXPECT_EQ(agg.dp1, 0.1);
  EXPECT_EQ(agg.dp1 + agg.dp2, 0.0);
}

TEST(AggregateFrontier, ExactlyZeroSum) {
  CounterRng rng(5, 0);
  for (int r = 0; r < 100; ++r) {
    const auto agg = aggregate_frontier(sample_beta_fluctuations(ChannelSimplex::from({0.3, 0.7}), 3.0, 100, rng));
    EXPECT_EQ(agg.dp1 + agg.dp2, 0.0);
  }
}

TEST(FrontierCovariance, MatchesEnumerationAtHalf) {
  const FrontierModel frontier{1.0, 1.0, 0.1, 50};
  const auto p = ChannelSimplex::from({0.5, 0.5});
  const auto cov = frontier_covariance(p, 4.0, frontier, 10000, 6);
  const double oracle = -50.0 * enumerate_fluctuation(0.5, 4.0).m2;
  EXPECT_LT(cov.a12, 0.0);
  EXPECT_NEAR(cov.a12, oracle, 0.1 * std::abs(oracle));
  EXPECT_NEAR(cov.a11, -cov.a12, 1e-15);
  EXPECT_NEAR(cov.a22, -cov.a12, 1e-15);
  EXPECT_NEAR(predicted_frontier_a12(p, 4.0, 50), oracle, 1e-12);
  EXPECT_NEAR(cov.a12_rate, cov.a12 / frontier.crossing_time(), 1e-15);
}

TEST(FrontierCovariance, ProportionalToChannelProduct) {
  const FrontierModel frontier{1.0, 1.0, 0.1, 50};
  std::vector<double> x, y;
  for (double p1 : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    const auto cov = frontier_covariance(ChannelSimplex::from({p1, 1.0 - p1}), 4.0, frontier, 2000, 7);
    EXPECT_LE(cov.a12, 0.0);
    x.push_back(p1 * (1.0 - p1));
    y.push_back(-cov.a12);
  }
  const auto fit = stats::fit_proportional(x, y);
  EXPECT_GE(fit.r_squared, 0.95);
  EXPECT_GT(fit.slope, 0.0);
}

}  // namespace
}  // namespace collapse
