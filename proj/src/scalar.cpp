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

#include "qhr/scalar.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "qhr/errors.hpp"

namespace qhr {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;
constexpr int kSplineCells = 4096;
constexpr double kQuadTol = 1e-14;

using Pchip = boost::math::interpolators::pchip<std::vector<double>>;

void require_stationary(double lambda, double gamma) {
  if (!(lambda > 0.0) || !(gamma < 2.0 * lambda / 3.0)) {
    throw NotStationary("scalar model requires gamma < 2 lambda / 3");
  }
}

}  // namespace

struct PearsonIV::Spline {
  Pchip cdf;
};

ScalarParams ScalarParams::from_model(const ModelParams& m) {
  if (m.dim() != 1) throw Error("scalar model requires p = 1");
  if (m.b(0) != 1.0) throw Error("scalar model requires b = 1");
  return ScalarParams{m.lambda(0, 0), m.alpha, m.beta(0), m.gamma(0, 0)};
}

ModelParams ScalarParams::to_model() const {
  ModelParams m;
  m.lambda = Matrix::Constant(1, 1, lambda);
  m.b = Vector::Ones(1);
  m.alpha = alpha;
  m.beta = Vector::Constant(1, beta);
  m.gamma = Matrix::Constant(1, 1, gamma);
  return m;
}

double scalar_kurtosis(const ScalarParams& sp) {
  require_stationary(sp.lambda, sp.gamma);
  const double l = sp.lambda;
  const double g = sp.gamma;
  return (2 * l - g) / (2 * l - 3 * g) *
         ((l - g) / l +
          (2 * l - g) / (l - g) * sp.beta * sp.beta / (l * sp.alpha));
}

std::pair<double, double> scalar_kurtosis_bounds(double lambda, double gamma) {
  require_stationary(lambda, gamma);
  const double ratio = (2 * lambda - gamma) / (2 * lambda - 3 * gamma);
  return {ratio * (lambda - gamma) / lambda, ratio * lambda / (lambda - gamma)};
}

ScalarMoments scalar_closed_moments(const ScalarParams& sp) {
  require_stationary(sp.lambda, sp.gamma);
  const double l = sp.lambda;
  const double g = sp.gamma;
  const double kappa = g / (2 * l);
  ScalarMoments m;
  m.q_inf = sp.alpha / (2 * l * (1 - kappa));
  m.m3_inf = 2 * sp.beta / (l - g) * m.q_inf;
  m.m4_inf = 3 * (2 * l - g) / (2 * l - 3 * g) *
             (1 + 4 * sp.beta * sp.beta / (sp.alpha * (l - g))) * m.q_inf *
             m.q_inf;
  return m;
}

PearsonIV::PearsonIV(const ScalarParams& sp) : sp_(sp) {
  if (!(sp.lambda > 0.0) || !(sp.alpha > 0.0)) {
    throw InvalidModel("stationary density requires lambda > 0 and alpha > 0");
  }
  if (sp.gamma < 1e-12 * sp.lambda) {
    gaussian_ = true;
    scale_ = std::sqrt(sp.alpha / (2 * sp.lambda));
    log_c_ = -std::log(scale_) - 0.5 * std::log(2 * std::numbers::pi);
    return;
  }
  const double delta = sp.alpha * sp.gamma - sp.beta * sp.beta;
  if (!(delta > 0.0)) {
    throw InvalidModel("stationary density requires alpha gamma > beta^2");
  }
  center_ = -sp.beta / sp.gamma;
  scale_ = std::sqrt(delta) / sp.gamma;
  power_ = 2 * sp.lambda / sp.gamma;
  nu_ = 2 * sp.lambda * sp.beta / (sp.gamma * std::sqrt(delta));

  // Normalise the theta weight by its mode to keep exponents bounded.
  const double mode = std::atan(nu_ / power_);
  log_z_ = 0.0;
  log_z_ = power_ * std::log(std::cos(mode)) + nu_ * mode;
  const double mass = tail_mass(0.0, false) + tail_mass(0.0, true);
  log_z_ += std::log(mass);
  log_c_ = (sp.lambda / sp.gamma + 1) * std::log(delta / sp.gamma) -
           std::log(scale_) - log_z_;

  theta_grid_.resize(kSplineCells + 1);
  cdf_grid_.resize(kSplineCells + 1);
  for (int i = 0; i <= kSplineCells; ++i) {
    theta_grid_[i] = -kHalfPi + std::numbers::pi * i / kSplineCells;
  }
  theta_grid_.front() = -kHalfPi;
  theta_grid_.back() = kHalfPi;
  // Accumulate cell masses inward from both ends so each tail keeps full
  // relative accuracy.
  boost::math::quadrature::tanh_sinh<double> ts;
  auto cell = [&](double a, double b) {
    return ts.integrate([&](double t) { return weight(t); }, a, b, kQuadTol);
  };
  const int mid = kSplineCells / 2;
  cdf_grid_[0] = 0.0;
  for (int i = 1; i <= mid; ++i) {
    cdf_grid_[i] = cdf_grid_[i - 1] + cell(theta_grid_[i - 1], theta_grid_[i]);
  }
  std::vector<double> upper(kSplineCells + 1, 0.0);
  for (int i = kSplineCells - 1; i >= mid; --i) {
    upper[i] = upper[i + 1] + cell(theta_grid_[i], theta_grid_[i + 1]);
  }
  const double total = cdf_grid_[mid] + upper[mid];
  for (int i = 0; i <= mid; ++i) cdf_grid_[i] /= total;
  for (int i = mid + 1; i <= kSplineCells; ++i) {
    cdf_grid_[i] = 1.0 - upper[i] / total;
  }
  cdf_grid_.back() = 1.0;
  spline_ = std::make_shared<const Spline>(Spline{
      Pchip(std::vector<double>(theta_grid_), std::vector<double>(cdf_grid_))});
}

double PearsonIV::t_dof() const { return power_ + 1.0; }

double PearsonIV::t_scale() const {
  return std::sqrt(sp_.alpha / (2 * sp_.lambda + sp_.gamma));
}

double PearsonIV::weight(double theta) const {
  const double c = std::cos(theta);
  if (c <= 0.0) return 0.0;
  return std::exp(power_ * std::log(c) + nu_ * theta - log_z_);
}

// Mass of the theta weight below (upper = false) or above theta, integrated
// in the distance to the nearest endpoint so cos is evaluated as sin(delta).
double PearsonIV::tail_mass(double theta, bool upper) const {
  boost::math::quadrature::tanh_sinh<double> ts;
  const double len = upper ? kHalfPi - theta : theta + kHalfPi;
  if (len <= 0.0) return 0.0;
  auto f = [&](double d) {
    const double s = std::sin(d);
    if (s <= 0.0) return 0.0;
    const double th = upper ? kHalfPi - d : -kHalfPi + d;
    return std::exp(power_ * std::log(s) + nu_ * th - log_z_);
  };
  return ts.integrate(f, 0.0, len, kQuadTol);
}

double PearsonIV::theta_of(double y) const {
  return std::atan((y - center_) / scale_);
}

double PearsonIV::y_of(double theta) const {
  return center_ + scale_ * std::tan(theta);
}

double PearsonIV::log_density(double y) const {
  if (gaussian_) return log_c_ - 0.5 * (y / scale_) * (y / scale_);
  const double s2 = sp_.alpha + 2 * sp_.beta * y + sp_.gamma * y * y;
  const double delta = sp_.alpha * sp_.gamma - sp_.beta * sp_.beta;
  return log_c_ - (sp_.lambda / sp_.gamma + 1) * std::log(s2) +
         nu_ * std::atan((sp_.beta + sp_.gamma * y) / std::sqrt(delta));
}

double PearsonIV::density(double y) const { return std::exp(log_density(y)); }

double PearsonIV::cdf(double y) const {
  if (gaussian_) {
    return boost::math::cdf(boost::math::normal(0.0, scale_), y);
  }
  const double th = theta_of(y);
  if (th <= 0.0) return tail_mass(th, false);
  return 1.0 - tail_mass(th, true);
}

double PearsonIV::spline_theta(double u) const {
  auto it = std::upper_bound(cdf_grid_.begin(), cdf_grid_.end(), u);
  std::size_t hi = std::min<std::size_t>(it - cdf_grid_.begin(), kSplineCells);
  std::size_t lo = hi == 0 ? 0 : hi - 1;
  double a = theta_grid_[lo];
  double b = theta_grid_[hi];
  for (int i = 0; i < 60 && b - a > 1e-15; ++i) {
    const double m = 0.5 * (a + b);
    if (spline_->cdf(m) < u) {
      a = m;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

double PearsonIV::quantile_fast(double u) const {
  if (!(u > 0.0 && u < 1.0)) throw Error("quantile: u must lie in (0, 1)");
  if (gaussian_) {
    return boost::math::quantile(boost::math::normal(0.0, scale_), u);
  }
  if (symmetric()) {
    return t_scale() *
           boost::math::quantile(boost::math::students_t(t_dof()), u);
  }
  return y_of(spline_theta(u));
}

double PearsonIV::quantile(double u) const {
  if (gaussian_ || symmetric()) return quantile_fast(u);
  if (!(u > 0.0 && u < 1.0)) throw Error("quantile: u must lie in (0, 1)");
  double th = spline_theta(u);
  for (int i = 0; i < 4; ++i) {
    const double f = th <= 0.0 ? tail_mass(th, false) - u
                               : (1.0 - u) - tail_mass(th, true);
    const double d = weight(th);
    if (!(d > 0.0)) break;
    const double step = th <= 0.0 ? f / d : -f / d;
    th = std::clamp(th - step, -kHalfPi, kHalfPi);
    if (std::abs(step) < 1e-15) break;
  }
  return y_of(th);
}

std::vector<double> PearsonIV::sample(std::size_t n, std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> out(n);
  for (auto& v : out) {
    double u = 0.0;
    while (u <= 0.0) u = unif(rng);
    v = quantile_fast(u);
  }
  return out;
}

double PearsonIV::moment(int k) const {
  if (k < 0) throw Error("moment: order must be nonnegative");
  if (gaussian_) {
    if (k % 2 == 1) return 0.0;
    double m = 1.0;
    for (int j = k - 1; j > 0; j -= 2) m *= j;
    return m * std::pow(scale_, k);
  }
  if (!(power_ > k - 1)) {
    throw NotStationary("moment of order " + std::to_string(k) +
                        " does not exist");
  }
  boost::math::quadrature::tanh_sinh<double> ts;
  // (c + s tan theta)^k cos^power(theta) written as
  // (c sin d -+ s cos d)^k sin^(power - k)(d) in the endpoint distance d.
  auto half = [&](bool upper) {
    auto f = [&](double d) {
      const double sn = std::sin(d);
      if (sn <= 0.0) return 0.0;
      const double th = upper ? kHalfPi - d : -kHalfPi + d;
      const double base = upper ? center_ * sn + scale_ * std::cos(d)
                                : center_ * sn - scale_ * std::cos(d);
      return std::pow(base, k) *
             std::exp((power_ - k) * std::log(sn) + nu_ * th - log_z_);
    };
    return ts.integrate(f, 0.0, kHalfPi, kQuadTol);
  };
  return half(false) + half(true);
}

}  // namespace qhr
