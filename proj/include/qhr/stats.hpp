/*
 * Copyright 2026 The QHR Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace qhr {

// Streaming mean and variance (Welford), mergeable.
class RunningStats {
 public:
  void add(double x);
  void merge(const RunningStats& other);

  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const;  // unbiased
  double std_error() const;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

// Estimate with standard error.
struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

// Mean of x where consecutive blocks of group_size entries are dependent
// (antithetic pairs); the SE is taken over group averages.
Estimate grouped_mean(const std::vector<double>& x, std::size_t group_size);

// Sample covariance of (x, y) with an influence-function SE over groups.
Estimate grouped_cov(const std::vector<double>& x, const std::vector<double>& y,
                     std::size_t group_size);

// Two-sided one-sample Kolmogorov-Smirnov statistic.
double ks_statistic(std::vector<double> sample,
                    const std::function<double(double)>& cdf);

// Asymptotic p-value with the finite-n correction
// (sqrt(n) + 0.12 + 0.11 / sqrt(n)) D.
double ks_pvalue(double d, std::size_t n);

}  // namespace qhr
