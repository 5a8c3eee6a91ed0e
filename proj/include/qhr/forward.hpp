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

#include <string>
#include <vector>

#include "qhr/moments.hpp"

namespace qhr {

// Loadings of the forward variance on eta: v_t(s) = sigma_infty^2 +
// psi(s)'(eta_t - eta_infty).
struct ForwardLoadings {
  const MomentSystem* sys = nullptr;

  explicit ForwardLoadings(const MomentSystem& s) : sys(&s) {}
  Vector psi(double s) const;
  Vector psi_y(double s) const;
  Matrix psi_q(double s) const;  // symmetrised p x p reshape
};

double forward_variance(const MomentSystem& sys, const EtaState& eta, double s);

struct ForwardEnvelope {
  double v0 = 0.0;     // forward variance from y = 0
  double v_min = 0.0;  // minimum over the current offset
  Vector y_star;       // minimising offset
};

// Throws NonConvexSlice when the quadratic in y is unbounded below.
ForwardEnvelope forward_min_envelope(const MomentSystem& sys, double s);

// Principal components of the forward variance curve. Computed on the
// reduced state (y; vech Q), which drops the duplicated products y_i y_j.
struct PcaDecomposition {
  Vector eigenvalues;  // descending
  int rank = 0;
  Matrix f_matrix;     // integral of psi psi' over [0, inf)
  Matrix r_factor;     // F = R R'
  Matrix r_pinv;
  Matrix v;            // eigenvectors of R' Omega R
  Matrix a_reduced;
  Vector g_reduced;
  Matrix omega_reduced;

  Vector psi_reduced(double t) const;
  Vector factor_curves(double t) const;  // u(t) = V' R^+ psi(t)
};

PcaDecomposition pca(const MomentSystem& sys, const Matrix& omega,
                     double tol = 1e-14);

// Rows (t, u_1(t) sqrt(D_1), ..., u_r(t) sqrt(D_r)).
struct CurveTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};
CurveTable pca_curves_table(const PcaDecomposition& dec,
                            const std::vector<double>& grid);

// Geometric grid of n points from t0 to t1.
std::vector<double> geometric_grid(double t0, double t1, int n);

}  // namespace qhr
