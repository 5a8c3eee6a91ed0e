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

#include <array>

#include "qhr/linalg.hpp"
#include "qhr/model.hpp"

namespace qhr {

// Conditional moments of y up to order four follow m' = a - A m with A lower
// block-triangular; blocks(k, j) holds A_{k+1, j+1} (empty when zero).
struct MomentSystem {
  int p = 0;
  double alpha = 0.0;
  KronOperatorSet ops;
  std::array<std::array<Matrix, 4>, 4> blocks;
  std::array<Index, 5> offsets{};  // block k spans [offsets[k], offsets[k+1])
  Matrix a_full;
  Vector source;
  Vector m_infty;
  Matrix a_tilde;  // top-left (p + p^2) system driving eta = (y; y (x) y)
  Vector g;        // (2 beta; vec Gamma)
  Vector eta_infty;
  double kappa = 0.0;
  double sigma2_infty = 0.0;
  std::array<CVector, 4> block_spectra;  // eigenvalues of A_11..A_44
  bool stable = false;                   // A_22..A_44 spectra in Re > 0

  Index eta_dim() const { return offsets[2]; }
  Vector m_block(int k) const;  // order k = 1..4 of m_infty
};

MomentSystem build_moment_system(const ModelParams& params,
                                 int cap = kDimensionCap);

struct StationarySummary {
  Vector q_infty;
  double kappa = 0.0;
  double kappa_tilde = 0.0;
  double sigma2_infty = 0.0;
  double e_sigma4 = 0.0;
  double kurt_infty = 0.0;
  bool stable = false;
};

// Throws NotStationary naming the offending eigenvalues.
StationarySummary stationary_summary(const MomentSystem& sys,
                                     const ModelParams& params);

struct StabilityCheck {
  double kappa_tilde = 0.0;
  bool passes = false;
  // Same test scaled by the largest rate instead of the smallest. For p > 1
  // the smallest-rate version admits unstable models; this one does not.
  double kappa_tilde_max = 0.0;
  bool passes_max = false;
};

// Cheap sufficient test: Gamma >= 0 entrywise and
// lambda_min * b' Lambda^-T Gamma Lambda^-1 b < 2/3, plus the
// largest-rate variant.
StabilityCheck check_stability_sufficient(const ModelParams& params);

// Stacked (y; y^(x)2; y^(x)3; y^(x)4) conditional expectations at time t.
Vector conditional_moments(const MomentSystem& sys, const Vector& y0, double t);

// Stacked Kronecker powers of y up to order four.
Vector kron_powers(const Vector& y);

struct EtaState {
  Vector y;
  Vector q;

  static EtaState from_y(const Vector& y);
  Vector stacked() const;
};

Vector conditional_eta(const MomentSystem& sys, const EtaState& eta, double s);

// Stationary covariance of eta; throws NotStationary.
Matrix omega(const MomentSystem& sys);

// psi(s) = exp(-A_tilde' s) g.
Vector psi(const MomentSystem& sys, double s);

// Cov(sigma^2_{t+s}, sigma^2_t) = psi(s)' Omega g.
double variance_autocov(const MomentSystem& sys, const Matrix& omega, double s);

// Cov of squared increments over windows of length r at lag h >= r, given
// Cov(eta_r, xi_r^2) from a stationary start. Throws WindowOrder if h < r.
double squared_increment_autocov(const MomentSystem& sys,
                                 const Vector& cov_eta_xi2, double r, double h);

// E[(xi_{t+r} - xi_t)^2] = r sigma_infty^2.
double squared_increment_mean(const MomentSystem& sys, double r);

// Cov(xi^(r)_t, xi^(r)_{t+h}) vanishes for h >= r.
double increment_autocov(const MomentSystem& sys, double r, double h);

}  // namespace qhr
