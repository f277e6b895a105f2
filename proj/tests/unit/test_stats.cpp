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

#include "collapse_lab/stats.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

namespace collapse::stats {
namespace {

TEST(Moments, SmallSample) {
  const std::vector<double> xs{1.0, 2.0, 3.0, 4.0};
  const Moments m = moments(xs);
  EXPECT_EQ(m.count, 4u);
  EXPECT_DOUBLE_EQ(m.mean, 2.5);
  EXPECT_DOUBLE_EQ(m.variance, 5.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.standard_error(), std::sqrt(5.0 / 3.0 / 4.0));
}

TEST(FitLine, ExactLine) {
  std::vector<double> x, y;
  for (int i = 0; i < 10; ++i) {
    x.push_back(i);
    y.push_back(2.0 - 0.5 * i);
  }
  const LineFit f = fit_line(x, y);
  EXPECT_NEAR(f.slope, -0.5, 1e-14);
  EXPECT_NEAR(f.intercept, 2.0, 1e-13);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-14);
  EXPECT_EQ(f.points, 10u);
}

TEST(FitProportional, ThroughOrigin) {
  const std::vector<double> x{0.09, 0.21, 0.25, 0.21, 0.09};
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 * v);
  const ProportionalFit f = fit_proportional(x, y);
  EXPECT_NEAR(f.slope, 3.0, 1e-14);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
}

TEST(BinomialHalfwidth, MatchesFormula) {
  EXPECT_NEAR(binomial_halfwidth(0.3, 10000), 3.0 * std::sqrt(0.21 / 10000), 1e-15);
  EXPECT_EQ(binomial_halfwidth(0.0, 10000), 0.0);
}

}  // namespace
}  // namespace collapse::stats
