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

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qhr/linalg.hpp"

namespace qhr {

// Block structure of a Jordan-identified mean-reversion matrix: each entry is
// a rate with its multiplicity, rates strictly decreasing.
struct JordanSpec {
  std::vector<std::pair<double, int>> blocks;

  int dim() const;
  Matrix lambda() const;  // direct sum of rate * (I - subdiagonal shift)
  Vector b() const;       // e_1 in every block
};

// dy = -Lambda y dt + b sigma dW,  sigma^2 = alpha + 2 beta'y + y'Gamma y.
struct ModelParams {
  Matrix lambda;
  Vector b;
  double alpha = 0.0;
  Vector beta;
  Matrix gamma;
  // Rank-one form, kept alongside beta/gamma when the model was built that way.
  std::optional<Vector> w;
  std::optional<double> beta0;
  std::optional<double> gamma0;
  std::string label;

  int dim() const { return static_cast<int>(b.size()); }
};

// Each entry names the violated clause; empty means the model is admissible.
std::vector<std::string> validate(const ModelParams& params);

// Throws InvalidModel listing every violation.
void require_valid(const ModelParams& params);

struct CanonicalModel {
  ModelParams params;
  JordanSpec jordan;
  Matrix transform;  // y = M y_canonical
};

CanonicalModel canonicalize(const ModelParams& params);

double variance(const ModelParams& params, const Vector& y);

struct VarianceMin {
  Vector y_min;
  double sigma_min = 0.0;
};
VarianceMin variance_min(const ModelParams& params);

struct FilterValues {
  std::vector<double> values;
  bool unit_mass = false;  // w'b == 1
};

// phi(t) = w' Lambda exp(-Lambda t) b on each grid point.
FilterValues filter_phi(const ModelParams& params, const Vector& w,
                        const std::vector<double>& t_grid);

// Erlang kernel rate * exp(-rate t) (rate t)^(i-1) / (i-1)!.
double filter_psi(double rate, int i, double t);

// First weight of each Jordan block positive, weights non-increasing and
// nonnegative within each block, and w'b = 1.
bool weights_admissible(const JordanSpec& jordan, const Vector& w);

// Minimum of phi over n_points equally spaced points of [0, horizon_scale /
// smallest rate].
double filter_phi_min(const ModelParams& params, const Vector& w,
                      int n_points = 2000, double horizon_scale = 20.0);

ModelParams rank_one(const JordanSpec& jordan, const Vector& w, double alpha,
                     double beta0, double gamma0);
ModelParams rank_one_from(const Matrix& lambda, const Vector& b,
                          const Vector& w, double alpha, double beta0,
                          double gamma0);

struct MeasureChange {
  ModelParams params;  // in the shifted offsets y - shift
  Vector shift;
  bool lambda_admissible = true;  // eigenvalues of the new Lambda real, > 0
};

// Drift change W -> W + (mu0 + mu1'y) t: Lambda' = Lambda - b mu1', offsets
// shifted by mu0 Lambda'^-1 b, variance re-expressed in the new offsets.
MeasureChange change_of_measure(const ModelParams& params, double mu0,
                                const Vector& mu1);

struct Diagnostics {
  Vector y_min;
  double sigma_min = 0.0;
  double sigma_infty = 0.0;
  double kurt_infty = 0.0;
  double kappa = 0.0;
  double kappa_tilde = 0.0;
  double mu2 = 0.0;
  double mu3 = 0.0;
  double mu4 = 0.0;
};

// Throws NotStationary when the stationary moments do not exist.
Diagnostics diagnostics(const ModelParams& params);

// Smallest real part among the eigenvalues of Lambda.
double lambda_min(const ModelParams& params);

}  // namespace qhr
