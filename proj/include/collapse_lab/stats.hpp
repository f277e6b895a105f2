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

#ifndef COLLAPSE_LAB_STATS_HPP
#define COLLAPSE_LAB_STATS_HPP

#include <cstddef>
#include <span>

namespace collapse::stats {

struct Moments {
  std::size_t count = 0;
  double mean = 0.0;
  /// Unbiased sample variance.
  double variance = 0.0;

  double standard_error() const;
};

/// Two-pass mean and variance, summed in index order.
Moments moments(std::span<const double> xs);

/// Ordinary least squares y = intercept + slope * x.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double r_squared = 0.0;
  std::size_t points = 0;
};

LineFit fit_line(std::span<const double> xs, std::span<const double> ys);

/// Least squares through the origin, y = slope * x. The R^2 reported is the
/// centered one, 1 - SS_res / SS_tot with SS_tot about the mean of y.
struct ProportionalFit {
  double slope = 0.0;
  double r_squared = 0.0;
};

ProportionalFit fit_proportional(std::span<const double> xs, std::span<const double> ys);

/// 3-sigma binomial half-width around probability p for n trials.
double binomial_halfwidth(double p, std::size_t n, double sigmas = 3.0);

}  // namespace collapse::stats

#endif  // COLLAPSE_LAB_STATS_HPP
