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
#include <vector>

#include "qhr/model.hpp"
#include "qhr/stats.hpp"

namespace qhr {

enum class InitKind {
  kFixed,     // every path starts at y0
  kBurnIn,    // simulate from y = 0 for burn_in years first
  kExplicit,  // one supplied state per independent draw (pair if antithetic)
};

struct McConfig {
  int steps_per_year = 250;
  std::size_t n_paths = 10000;
  std::uint64_t seed = 1;
  bool antithetic = true;
  double horizon = 0.0;             // extended to the last probe time
  std::vector<double> probe_times;  // snapped to the time grid
  InitKind init = InitKind::kFixed;
  Vector y0;
  double burn_in = 0.0;  // <= 0 selects 10 / Re(lambda_min)
  std::vector<Vector> initial_states;
};

// Snapshots of every path at each probe time. Path i and i ^ 1 form an
// antithetic pair when antithetic is set.
struct PathBatch {
  int p = 0;
  std::size_t n_paths = 0;
  bool antithetic = false;
  int steps_per_year = 0;
  std::vector<double> times;  // snapped to the step grid
  Matrix y_init;                          // p x n_paths
  std::vector<Matrix> y;                  // per probe, p x n_paths
  std::vector<std::vector<double>> x;     // log-price
  std::vector<std::vector<double>> sigma2;
  std::vector<std::vector<double>> xi;    // integral of sigma dW
  std::uint64_t floored_steps = 0;

  std::size_t group_size() const { return antithetic ? 2 : 1; }
  // Index of the probe requested at t, after snapping to the step grid.
  std::size_t probe_index(double t) const;
};

// Throws ConfigInvalid on inconsistent settings.
void check_config(const McConfig& cfg, int p);

// Euler scheme with one Gaussian draw per step driving x, y and xi.
PathBatch simulate(const ModelParams& params, const McConfig& cfg);

// Worker count: QHR_THREADS if set, else hardware concurrency.
unsigned worker_count();

double default_burn_in(const ModelParams& params);

// Per-path offsets after a burn-in from y = 0.
std::vector<Vector> stationary_init(const ModelParams& params, double burn_in,
                                    const McConfig& cfg);

struct CovEtaXi2 {
  Vector value;  // Cov(eta_r, xi_r^2), eta = (y; y (x) y)
  Vector se;
  Matrix eta;    // per-path eta_r, (p + p^2) x n_paths
  std::vector<double> xi2;
  std::size_t group_size = 1;
};

// Stationary start: cfg.init is used when kExplicit, burn-in otherwise.
CovEtaXi2 estimate_cov_eta_xi2(const ModelParams& params, double r,
                               const McConfig& cfg);

// Sample Cov(xi_r^2, (xi_{h+r} - xi_h)^2) from a stationary start.
Estimate mc_squared_increment_autocov(const ModelParams& params, double r,
                                      double h, const McConfig& cfg);

}  // namespace qhr
