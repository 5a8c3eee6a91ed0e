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

#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "qhr/model.hpp"

namespace qhr {

// dy = -lambda y dt + sigma dW, sigma^2 = alpha + 2 beta y + gamma y^2.
struct ScalarParams {
  double lambda = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;

  static ScalarParams from_model(const ModelParams& m);
  ModelParams to_model() const;
};

// Throws NotStationary unless gamma < 2 lambda / 3.
double scalar_kurtosis(const ScalarParams& sp);

std::pair<double, double> scalar_kurtosis_bounds(double lambda, double gamma);

struct ScalarMoments {
  double q_inf = 0.0;
  double m3_inf = 0.0;
  double m4_inf = 0.0;
};
ScalarMoments scalar_closed_moments(const ScalarParams& sp);

// Stationary law of the scalar offset: a Pearson type IV density
// C sigma^2(y)^(-lambda/gamma - 1) exp(nu atan((beta + gamma y)/sqrt(D))),
// with D = alpha gamma - beta^2. Falls back to the Gaussian OU law when
// gamma is negligible.
class PearsonIV {
 public:
  explicit PearsonIV(const ScalarParams& sp);

  double density(double y) const;
  double log_density(double y) const;
  // Exact CDF by quadrature.
  double cdf(double y) const;
  // Spline inversion polished with Newton steps on the exact CDF.
  double quantile(double u) const;
  // Spline-only inversion.
  double quantile_fast(double u) const;
  std::vector<double> sample(std::size_t n, std::uint64_t seed) const;
  // E[y^k] by quadrature; requires 2 lambda / gamma > k - 1.
  double moment(int k) const;

  bool gaussian() const { return gaussian_; }
  bool symmetric() const { return sp_.beta == 0.0; }
  double log_norm_const() const { return log_c_; }
  // Scale of the Student-t representation when beta = 0.
  double t_scale() const;
  double t_dof() const;

 private:
  double weight(double theta) const;          // cos^k(theta) exp(nu theta)
  double tail_mass(double theta, bool upper) const;
  double theta_of(double y) const;
  double y_of(double theta) const;
  double spline_theta(double u) const;

  ScalarParams sp_;
  bool gaussian_ = false;
  double center_ = 0.0;
  double scale_ = 1.0;
  double power_ = 0.0;  // 2 lambda / gamma
  double nu_ = 0.0;
  double log_z_ = 0.0;  // log of the total theta-mass
  double log_c_ = 0.0;
  std::vector<double> theta_grid_;
  std::vector<double> cdf_grid_;
  struct Spline;
  std::shared_ptr<const Spline> spline_;
};

}  // namespace qhr
