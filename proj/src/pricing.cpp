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

#include "qhr/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "qhr/errors.hpp"

namespace qhr {

namespace {

constexpr double kVolLo = 1e-6;
constexpr double kVolHi = 5.0;

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double norm_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

}  // namespace

double bs_time_value(double strike, double maturity, double vol) {
  const double sd = vol * std::sqrt(maturity);
  if (sd <= 0.0) return 0.0;
  const double d1 = -std::log(strike) / sd + 0.5 * sd;
  if (strike >= 1.0) return norm_cdf(d1) - strike * norm_cdf(d1 - sd);
  return strike * norm_cdf(sd - d1) - norm_cdf(-d1);
}

double bs_call(double strike, double maturity, double vol) {
  return std::max(1.0 - strike, 0.0) + bs_time_value(strike, maturity, vol);
}

double bs_vega(double strike, double maturity, double vol) {
  const double st = std::sqrt(maturity);
  const double sd = vol * st;
  if (sd <= 0.0) return 0.0;
  const double d1 = -std::log(strike) / sd + 0.5 * sd;
  return norm_pdf(d1) * st;
}

ImpliedVol implied_vol(double price, double strike, double maturity) {
  ImpliedVol out;
  const double lower = std::max(1.0 - strike, 0.0);
  if (!(maturity > 0.0) || !(strike > 0.0) || !(price > lower) ||
      !(price < 1.0)) {
    out.status = IvStatus::kOutOfBounds;
    return out;
  }
  const double target = price - lower;
  double lo = kVolLo;
  double hi = kVolHi;
  if (bs_time_value(strike, maturity, hi) < target ||
      bs_time_value(strike, maturity, lo) > target) {
    out.status = IvStatus::kNoConvergence;
    return out;
  }
  const double log_target = std::log(target);
  // Start at the inflection point of the price in vol.
  double v = std::clamp(std::sqrt(2.0 * std::abs(std::log(strike)) / maturity),
                        0.05, 1.0);
  bool converged = false;
  for (int it = 0; it < 300 && !converged; ++it) {
    const double tv = bs_time_value(strike, maturity, v);
    if (tv == target) break;
    if (tv > target) {
      hi = v;
    } else {
      lo = v;
    }
    double next = 0.5 * (lo + hi);
    if (tv > 0.0) {
      const double vega = bs_vega(strike, maturity, v);
      if (vega > 0.0) {
        const double newton = v - (std::log(tv) - log_target) * tv / vega;
        if (newton > lo && newton < hi) next = newton;
      }
    }
    converged = std::abs(next - v) <= 1e-15 * v || hi - lo <= 1e-15 * v;
    v = next;
  }
  out.vol = v;
  const double tv = bs_time_value(strike, maturity, v);
  if (!(std::abs(tv - target) <= 1e-10 * target)) {
    out.status = IvStatus::kNoConvergence;
    return out;
  }
  const double resolution =
      4.0 * std::numeric_limits<double>::epsilon() * price / bs_vega(strike, maturity, v);
  out.status = resolution <= 1e-10 ? IvStatus::kOk : IvStatus::kIllConditioned;
  return out;
}

SmileSurface price_options(const ModelParams& params, const Vector& y0,
                           const OptionGrid& grid, const McConfig& cfg) {
  if (grid.maturities.empty() || grid.moneyness.empty()) {
    throw ConfigInvalid("option grid must contain maturities and strikes");
  }
  McConfig c = cfg;
  c.init = InitKind::kFixed;
  c.y0 = y0;
  c.probe_times.clear();
  for (double t : grid.maturities) {
    const double tau = t - grid.valuation_time;
    if (!(tau > 0.0)) throw ConfigInvalid("maturities must follow valuation time");
    c.probe_times.push_back(tau);
  }
  return price_from_batch(simulate(params, c), grid);
}

SmileSurface price_from_batch(const PathBatch& batch, const OptionGrid& grid) {
  if (!(grid.spot > 0.0)) throw ConfigInvalid("spot must be positive");
  SmileSurface surf;
  surf.spot = grid.spot;
  surf.floored_steps = batch.floored_steps;
  const std::size_t n = batch.n_paths;
  const std::size_t gs = batch.group_size();
  std::vector<double> st(n), call(n), put(n), gap(n);
  for (double t : grid.maturities) {
    const double tau = t - grid.valuation_time;
    const std::size_t k = batch.probe_index(tau);
    const double tk = batch.times[k];
    for (std::size_t i = 0; i < n; ++i) st[i] = std::exp(batch.x[k][i]);
    surf.maturities.push_back(tk);
    surf.forward.push_back(grouped_mean(st, gs));
    for (double m : grid.moneyness) {
      SmileNode node;
      node.maturity = tk;
      node.moneyness = m;
      node.log_moneyness =
          grid.kind == Moneyness::kNormalized ? m * std::sqrt(tk) : m;
      const double kr = std::exp(node.log_moneyness);  // strike / spot
      node.strike = grid.spot * kr;
      for (std::size_t i = 0; i < n; ++i) {
        call[i] = std::max(st[i] - kr, 0.0);
        put[i] = std::max(kr - st[i], 0.0);
        gap[i] = call[i] - put[i] - (1.0 - kr);
      }
      const Estimate ce = grouped_mean(call, gs);
      const Estimate pe = grouped_mean(put, gs);
      const Estimate ge = grouped_mean(gap, gs);
      node.call = grid.spot * ce.value;
      node.call_se = grid.spot * ce.se;
      node.put = grid.spot * pe.value;
      node.put_se = grid.spot * pe.se;
      node.parity_gap = grid.spot * ge.value;
      node.parity_se = grid.spot * ge.se;
      node.iv = implied_vol(ce.value, kr, tk);
      if (node.iv.status == IvStatus::kOk) {
        node.iv_se = ce.se / bs_vega(kr, tk, node.iv.vol);
      }
      if (grid.keep_samples) {
        node.call_samples.resize(n / gs);
        for (std::size_t g = 0; g < n / gs; ++g) {
          double s = 0.0;
          for (std::size_t j = 0; j < gs; ++j) s += call[g * gs + j];
          node.call_samples[g] = s / static_cast<double>(gs);
        }
      }
      surf.nodes.push_back(std::move(node));
    }
  }
  return surf;
}

OptionGrid atm_grid(const std::vector<double>& maturities, double eps) {
  OptionGrid g;
  g.maturities = maturities;
  g.moneyness = {-eps, 0.0, eps};
  g.keep_samples = true;
  return g;
}

std::vector<AtmPoint> atm_term_structures(const SmileSurface& surface,
                                          double eps) {
  std::vector<AtmPoint> out;
  auto find = [&](double t, double l) -> const SmileNode& {
    for (const auto& nd : surface.nodes) {
      if (std::abs(nd.maturity - t) <= 1e-12 * std::max(1.0, t) &&
          std::abs(nd.log_moneyness - l) <= 1e-12) {
        return nd;
      }
    }
    throw MissingNodes("no node at T = " + std::to_string(t) +
                       ", log-moneyness = " + std::to_string(l));
  };
  for (double t : surface.maturities) {
    const SmileNode& dn = find(t, -eps);
    const SmileNode& at = find(t, 0.0);
    const SmileNode& up = find(t, eps);
    for (const SmileNode* nd : {&dn, &at, &up}) {
      if (nd->iv.status != IvStatus::kOk) {
        throw MissingNodes("implied vol undefined at T = " + std::to_string(t));
      }
    }
    AtmPoint pt;
    pt.maturity = t;
    pt.atm_vol = at.iv.vol;
    pt.atm_vol_se = at.iv_se;
    pt.atm_skew = (up.iv.vol - dn.iv.vol) / (2.0 * eps);
    if (!up.call_samples.empty() && up.call_samples.size() == dn.call_samples.size()) {
      const double vu = bs_vega(std::exp(eps), t, up.iv.vol);
      const double vd = bs_vega(std::exp(-eps), t, dn.iv.vol);
      RunningStats rs;
      for (std::size_t g = 0; g < up.call_samples.size(); ++g) {
        rs.add((up.call_samples[g] / vu - dn.call_samples[g] / vd) / (2.0 * eps));
      }
      pt.atm_skew_se = rs.std_error();
    } else {
      pt.atm_skew_se = std::hypot(up.iv_se, dn.iv_se) / (2.0 * eps);
    }
    out.push_back(pt);
  }
  return out;
}

}  // namespace qhr
