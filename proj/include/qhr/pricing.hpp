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

#include "qhr/mc.hpp"
#include "qhr/model.hpp"
#include "qhr/stats.hpp"

namespace qhr {

enum class Moneyness {
  kPlain,       // l = log(K / S0)
  kNormalized,  // l / sqrt(T)
};

struct OptionGrid {
  std::vector<double> maturities;  // absolute dates
  std::vector<double> moneyness;
  Moneyness kind = Moneyness::kPlain;
  double spot = 1.0;
  double valuation_time = 0.0;
  // Keep per-draw payoffs so finite differences across strikes get an SE.
  bool keep_samples = false;
};

enum class IvStatus {
  kOk,
  kOutOfBounds,
  kNoConvergence,
  kIllConditioned,  // time value below the rounding level of the price
};

struct ImpliedVol {
  IvStatus status = IvStatus::kOk;
  double vol = 0.0;
};

struct SmileNode {
  double maturity = 0.0;  // time to expiry
  double moneyness = 0.0;
  double log_moneyness = 0.0;
  double strike = 0.0;
  double call = 0.0;
  double call_se = 0.0;
  double put = 0.0;
  double put_se = 0.0;
  double parity_gap = 0.0;  // C - P - (S0 - K)
  double parity_se = 0.0;
  ImpliedVol iv;
  double iv_se = 0.0;
  std::vector<double> call_samples;  // per independent draw, S0 = 1 units
};

struct SmileSurface {
  double spot = 1.0;
  std::vector<SmileNode> nodes;
  std::vector<double> maturities;
  std::vector<Estimate> forward;  // E[exp(x_T)] per maturity, S0 = 1 units
  std::uint64_t floored_steps = 0;
};

// Black-Scholes call with unit spot and zero rates.
double bs_call(double strike, double maturity, double vol);
double bs_vega(double strike, double maturity, double vol);

// Time value: the out-of-the-money option of the same strike.
double bs_time_value(double strike, double maturity, double vol);

// Safeguarded Newton on the log time value with bisection fallback over
// [1e-6, 5]. kIllConditioned when one rounding unit of the price moves the
// volatility by more than 1e-10.
ImpliedVol implied_vol(double price, double strike, double maturity);

// Monte Carlo prices on one set of paths from y0 (common random numbers).
SmileSurface price_options(const ModelParams& params, const Vector& y0,
                           const OptionGrid& grid, const McConfig& cfg);

// Prices from an existing batch whose probes include every time to expiry.
SmileSurface price_from_batch(const PathBatch& batch, const OptionGrid& grid);

struct AtmPoint {
  double maturity = 0.0;
  double atm_vol = 0.0;
  double atm_vol_se = 0.0;
  double atm_skew = 0.0;
  double atm_skew_se = 0.0;
};

// Central differences on plain log-moneyness nodes {-eps, 0, eps}. Throws
// MissingNodes when a maturity lacks one of them.
std::vector<AtmPoint> atm_term_structures(const SmileSurface& surface,
                                          double eps = 0.01);

// Plain grid with nodes {-eps, 0, eps} per maturity, samples kept.
OptionGrid atm_grid(const std::vector<double>& maturities, double eps = 0.01);

}  // namespace qhr
