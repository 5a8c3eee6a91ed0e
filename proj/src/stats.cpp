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

#include "qhr/stats.hpp"

#include <algorithm>
#include <cmath>

#include "qhr/errors.hpp"

namespace qhr {

void RunningStats::add(double x) {
  ++n_;
  const double d = x - mean_;
  mean_ += d / static_cast<double>(n_);
  m2_ += d * (x - mean_);
}

void RunningStats::merge(const RunningStats& o) {
  if (o.n_ == 0) return;
  if (n_ == 0) {
    *this = o;
    return;
  }
  const double n = static_cast<double>(n_ + o.n_);
  const double d = o.mean_ - mean_;
  mean_ += d * static_cast<double>(o.n_) / n;
  m2_ += o.m2_ + d * d * static_cast<double>(n_) * static_cast<double>(o.n_) / n;
  n_ += o.n_;
}

double RunningStats::variance() const {
  return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
}

double RunningStats::std_error() const {
  return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
}

Estimate grouped_mean(const std::vector<double>& x, std::size_t group_size) {
  if (group_size == 0 || x.size() % group_size != 0) {
    throw Error("grouped_mean: size is not a multiple of the group size");
  }
  RunningStats rs;
  for (std::size_t i = 0; i < x.size(); i += group_size) {
    double s = 0.0;
    for (std::size_t j = 0; j < group_size; ++j) s += x[i + j];
    rs.add(s / static_cast<double>(group_size));
  }
  return {rs.mean(), rs.std_error()};
}

Estimate grouped_cov(const std::vector<double>& x, const std::vector<double>& y,
                     std::size_t group_size) {
  if (x.size() != y.size()) throw Error("grouped_cov: size mismatch");
  if (group_size == 0 || x.size() % group_size != 0 || x.size() < 2) {
    throw Error("grouped_cov: size is not a multiple of the group size");
  }
  RunningStats sx, sy;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx.add(x[i]);
    sy.add(y[i]);
  }
  const double mx = sx.mean();
  const double my = sy.mean();
  RunningStats prod;
  for (std::size_t i = 0; i < x.size(); ++i) prod.add((x[i] - mx) * (y[i] - my));
  const double n = static_cast<double>(x.size());
  const double cov = prod.mean() * n / (n - 1.0);
  RunningStats infl;
  for (std::size_t i = 0; i < x.size(); i += group_size) {
    double s = 0.0;
    for (std::size_t j = 0; j < group_size; ++j) {
      s += (x[i + j] - mx) * (y[i + j] - my) - cov;
    }
    infl.add(s / static_cast<double>(group_size));
  }
  return {cov, infl.std_error()};
}

double ks_statistic(std::vector<double> sample,
                    const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max(d, std::max(f - static_cast<double>(i) / n,
                             static_cast<double>(i + 1) / n - f));
  }
  return d;
}

double ks_pvalue(double d, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double lam = (sn + 0.12 + 0.11 / sn) * d;
  if (lam < 1e-3) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 200; ++j) {
    const double term = std::exp(-2.0 * j * j * lam * lam);
    sum += sign * term;
    if (term < 1e-16 * std::abs(sum)) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace qhr
