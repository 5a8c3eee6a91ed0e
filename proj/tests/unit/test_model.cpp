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

#include <doctest.h>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "qhr/errors.hpp"
#include "qhr/model.hpp"

using namespace qhr;

namespace {

bool has_violation(const std::vector<std::string>& v, const std::string& what) {
  for (const auto& s : v)
    if (s.find(what) != std::string::npos) return true;
  return false;
}

ModelParams scalar(double lam, double alpha, double beta, double gamma) {
  ModelParams m;
  m.lambda = Matrix::Constant(1, 1, lam);
  m.b = Vector::Ones(1);
  m.alpha = alpha;
  m.beta = Vector::Constant(1, beta);
  m.gamma = Matrix::Constant(1, 1, gamma);
  return m;
}

}  // namespace

TEST_CASE("validate accepts the scalar and multi-factor fixtures") {
  for (const std::string name : {"m1", "m2", "m3", "m4", "mm1", "mm2", "mm3", "mm4",
                           "mm5", "mm1_jordan", "mm5_jordan"}) {
    CAPTURE(name);
    CHECK(validate(oracle::fixture(name)).empty());
  }
}

TEST_CASE("validate names each failed clause") {
  CHECK(has_violation(validate(scalar(6, 0.0, 0, 3.6334)), "alpha must be positive"));
  CHECK(has_violation(validate(scalar(6, 0.01, 0.2, 3.0)), "bordered matrix not psd"));
  CHECK(has_violation(validate(scalar(-1, 0.01, 0, 1)), "lambda eigenvalues must be positive"));
  ModelParams m = oracle::fixture("mm1");
  m.gamma(0, 1) += 0.1;
  CHECK(has_violation(validate(m), "gamma must be symmetric"));
  m = oracle::fixture("mm1");
  m.lambda << 0, 1, -1, 0;
  CHECK(has_violation(validate(m), "lambda eigenvalues must be real"));
  CHECK_THROWS_AS(require_valid(scalar(6, 0.0, 0, 1)), InvalidModel);
}

TEST_CASE("bordered psd matches the 2x2 determinant test") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int rep = 0; rep < 200; ++rep) {
    const double alpha = 0.01 + 0.05 * std::abs(u(rng));
    const double gamma = 3.0 * std::abs(u(rng)) + 0.01;
    const double beta = u(rng) * 1.5 * std::sqrt(alpha * gamma);
    if (std::abs(beta * beta - alpha * gamma) < 1e-6 * alpha * gamma) continue;
    const bool psd = beta * beta <= alpha * gamma;
    CHECK(has_violation(validate(scalar(6, alpha, beta, gamma)),
                        "bordered matrix not psd") == !psd);
  }
}

TEST_CASE("canonicalize leaves canonical inputs alone") {
  for (const std::string name : {"m1", "mm1_jordan", "mm5_jordan"}) {
    const ModelParams m = oracle::fixture(name);
    const CanonicalModel c = canonicalize(m);
    CHECK(c.transform == Matrix::Identity(m.dim(), m.dim()));
    CHECK(c.params.lambda == m.lambda);
    CHECK(c.params.gamma == m.gamma);
  }
}

TEST_CASE("canonicalize the two-rate cascade to distinct diagonal rates") {
  const ModelParams m = oracle::fixture("mm1");
  const CanonicalModel c = canonicalize(m);
  Matrix lam(2, 2);
  lam << 6, 0, 0, 1;
  CHECK((c.params.lambda - lam).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((c.params.b - Vector::Ones(2)).cwiseAbs().maxCoeff() < 1e-12);
  REQUIRE(c.jordan.blocks.size() == 2);
  CHECK(c.jordan.blocks[0].first == doctest::Approx(6.0));
  CHECK(c.jordan.blocks[1].first == doctest::Approx(1.0));
  // Similarity relations.
  const Matrix& t = c.transform;
  CHECK((m.lambda * t - t * c.params.lambda).norm() < 1e-12);
  CHECK((t * c.params.b - m.b).norm() < 1e-12);
  // Idempotence.
  const CanonicalModel again = canonicalize(c.params);
  CHECK(again.transform == Matrix::Identity(2, 2));
}

TEST_CASE("canonicalize produces a Jordan block for a repeated rate") {
  const ModelParams m = oracle::fixture("mm5");
  const CanonicalModel c = canonicalize(m);
  REQUIRE(c.jordan.blocks.size() == 1);
  CHECK(c.jordan.blocks[0].second == 2);
  CHECK((c.params.lambda - c.jordan.lambda()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((c.params.b - c.jordan.b()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("canonicalize preserves the variance function") {
  std::mt19937_64 rng(32);
  for (const std::string name : {"mm3", "mm4", "mm5"}) {
    const ModelParams m = oracle::fixture(name);
    const CanonicalModel c = canonicalize(m);
    const Matrix t_inv = c.transform.inverse();
    for (int rep = 0; rep < 100; ++rep) {
      const Vector y = oracle::random_matrix(rng, 2, 1, 0.1);
      CHECK(std::abs(variance(m, y) - variance(c.params, t_inv * y)) <
            1e-12 * std::max(1.0, variance(m, y)));
    }
  }
}

TEST_CASE("canonicalize rejects a repeated rate split across blocks") {
  ModelParams m = oracle::fixture("mm1_jordan");
  m.lambda << 3, 0, 0, 3;
  CHECK_THROWS_AS(canonicalize(m), RepeatedEigenvalueAcrossBlocks);
}

TEST_CASE("canonicalize rejects complex rates") {
  ModelParams m = oracle::fixture("mm1_jordan");
  m.lambda << 3, 1, -1, 3;
  CHECK_THROWS_AS(canonicalize(m), ComplexEigenvalues);
}

TEST_CASE("variance at the origin and at the minimiser") {
  const ModelParams m3 = oracle::fixture("m3");
  CHECK(variance(m3, Vector::Zero(1)) == m3.alpha);
  CHECK(variance(m3, Vector::Constant(1, 0.06)) == doctest::Approx(0.0025).epsilon(1e-9));
  const ModelParams mm3 = oracle::fixture("mm3");
  Vector y(2);
  y << 0.0192, 0.0767;
  CHECK(std::sqrt(variance(mm3, y)) == doctest::Approx(0.05).epsilon(1e-3));
}

TEST_CASE("variance minimum") {
  const VarianceMin m4 = variance_min(oracle::fixture("m4"));
  CHECK(m4.y_min(0) == doctest::Approx(0.06));
  CHECK(m4.sigma_min == doctest::Approx(0.05).epsilon(1e-3));
  const VarianceMin m1 = variance_min(oracle::fixture("m1"));
  CHECK(m1.y_min(0) == 0.0);
  CHECK(m1.sigma_min == doctest::Approx(0.08));
  const VarianceMin mm4 = variance_min(oracle::fixture("mm4"));
  CHECK(std::abs(mm4.y_min(0) - 0.0148) < 5e-5);
  CHECK(std::abs(mm4.y_min(1) - 0.0592) < 5e-5);
  CHECK(mm4.sigma_min == doctest::Approx(0.05).epsilon(1e-3));
}

TEST_CASE("variance never drops below its minimum") {
  std::mt19937_64 rng(33);
  for (const std::string name : {"m3", "m4", "mm3", "mm5", "mm4_jordan"}) {
    const ModelParams m = oracle::fixture(name);
    const VarianceMin vm = variance_min(m);
    for (int rep = 0; rep < 200; ++rep) {
      const Vector y = oracle::random_matrix(rng, m.dim(), 1, 0.2);
      CHECK(variance(m, y) >= vm.sigma_min * vm.sigma_min - 1e-15);
    }
    CHECK(vm.sigma_min >= 0.0);
  }
}

TEST_CASE("scalar filter is the exponential kernel") {
  const ModelParams m = oracle::fixture("m1");
  const std::vector<double> grid{0.0, 0.1, 0.5, 2.0};
  const FilterValues f = filter_phi(m, Vector::Ones(1), grid);
  CHECK(f.unit_mass);
  for (std::size_t i = 0; i < grid.size(); ++i)
    CHECK(f.values[i] == doctest::Approx(6.0 * std::exp(-6.0 * grid[i])).epsilon(1e-14));
}

TEST_CASE("single-rate filter decomposes into Erlang kernels") {
  JordanSpec j{{{4.0, 4}}};
  ModelParams m;
  m.lambda = j.lambda();
  m.b = j.b();
  Vector w(4);
  w << 1, 0.8, 0.6, 0.4;
  CHECK(weights_admissible(j, w));
  std::vector<double> grid;
  for (int i = 0; i <= 50; ++i) grid.push_back(0.05 * i);
  const FilterValues f = filter_phi(m, w, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double t = grid[i];
    const double expect = 0.2 * filter_psi(4, 1, t) + 0.2 * filter_psi(4, 2, t) +
                          0.2 * filter_psi(4, 3, t) + 0.4 * filter_psi(4, 4, t);
    CHECK(f.values[i] == doctest::Approx(expect).epsilon(1e-12));
  }
  CHECK(filter_phi_min(m, w) >= 0.0);
}

TEST_CASE("admissible filter integrates to one") {
  const ModelParams m = oracle::fixture("mm3_jordan");
  const Vector w = *m.w;
  CHECK(weights_admissible(canonicalize(m).jordan, w));
  boost::math::quadrature::exp_sinh<double> q;
  const double mass = q.integrate([&](double t) {
    return filter_phi(m, w, {t}).values[0];
  });
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(filter_phi_min(m, w) >= 0.0);
}

TEST_CASE("Erlang kernels") {
  CHECK(filter_psi(4, 1, 0.0) == 4.0);
  boost::math::quadrature::exp_sinh<double> q;
  CHECK(q.integrate([](double t) { return filter_psi(4, 3, t); }) ==
        doctest::Approx(1.0).epsilon(1e-8));
  const double peak = filter_psi(4, 2, 0.25);
  CHECK(filter_psi(4, 2, 0.24) < peak);
  CHECK(filter_psi(4, 2, 0.26) < peak);
}

TEST_CASE("rank-one builder") {
  const ModelParams mm2 = oracle::fixture("mm2");
  Vector w(2);
  w << 0.2, 0.8;
  const ModelParams m = rank_one_from(mm2.lambda, mm2.b, w, 0.01, 0.0, 2.8);
  CHECK((m.gamma - 2.8 * w * w.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(m.beta.isZero());
  CHECK(validate(m).empty());
  const ModelParams flat = rank_one_from(mm2.lambda, mm2.b, w, 0.01, 0.0, 0.0);
  CHECK(flat.gamma.isZero());
  CHECK(flat.beta.isZero());
  CHECK_THROWS_AS(rank_one_from(mm2.lambda, mm2.b, w, 0.01, 0.1, 0.0), ConstraintViolation);
  CHECK_THROWS_AS(rank_one_from(mm2.lambda, mm2.b, w, 0.01, 0.3, 2.0), ConstraintViolation);
  CHECK_THROWS_AS(rank_one_from(mm2.lambda, mm2.b, w, 0.0, 0.0, 2.0), ConstraintViolation);
}

TEST_CASE("rank-one output with a negative skew term is admissible") {
  const ModelParams mm5 = oracle::fixture("mm5");
  const ModelParams m = rank_one_from(mm5.lambda, mm5.b, *mm5.w, mm5.alpha,
                                      *mm5.beta0, *mm5.gamma0);
  Matrix bordered(3, 3);
  bordered(0, 0) = m.alpha;
  bordered.block(0, 1, 1, 2) = m.beta.transpose();
  bordered.block(1, 0, 2, 1) = m.beta;
  bordered.block(1, 1, 2, 2) = m.gamma;
  CHECK(symmetric_eigen(bordered).values(2) >= -1e-14);
  CHECK(validate(m).empty());
}

TEST_CASE("rank-one builder passes validation on random admissible inputs") {
  std::mt19937_64 rng(34);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 100; ++rep) {
    JordanSpec j{{{2.0 + 8.0 * u(rng), 2}, {0.5 + u(rng), 1}}};
    Vector w(3);
    w << 1.0, u(rng), 1.0;
    const double alpha = 0.005 + 0.02 * u(rng);
    const double gamma0 = 5.0 * u(rng);
    const double beta0 = -(u(rng)) * std::sqrt(alpha * gamma0);
    CHECK(validate(rank_one(j, w, alpha, beta0, gamma0)).empty());
  }
}

TEST_CASE("change of measure") {
  const ModelParams m1 = oracle::fixture("m1");
  const MeasureChange id = change_of_measure(m1, 0.0, Vector::Zero(1));
  CHECK(id.params.lambda == m1.lambda);
  CHECK(id.shift.isZero());
  CHECK(id.params.alpha == m1.alpha);

  const MeasureChange shifted = change_of_measure(m1, 0.0, Vector::Constant(1, 2.0));
  CHECK(shifted.params.lambda(0, 0) == doctest::Approx(4.0));
  CHECK(shifted.lambda_admissible);

  CHECK_THROWS_AS(change_of_measure(m1, 0.0, Vector::Constant(1, 6.0)), SingularTransform);
}

TEST_CASE("change of measure keeps the variance at every original offset") {
  const ModelParams m = oracle::fixture("m3");
  const MeasureChange mc = change_of_measure(m, 0.3, Vector::Constant(1, 1.5));
  // New offset y - shift is the stationary point of the new drift.
  CHECK(mc.shift(0) == doctest::Approx(0.3 / 4.5));
  for (double y : {-0.1, 0.0, 0.05, 0.2}) {
    CHECK(variance(mc.params, Vector::Constant(1, y - mc.shift(0))) ==
          doctest::Approx(variance(m, Vector::Constant(1, y))).epsilon(1e-13));
  }
}

TEST_CASE("change of measure flags complex new rates") {
  const ModelParams m = oracle::fixture("mm1_jordan");
  Vector mu1(2);
  mu1 << -10.0, 10.0;
  const MeasureChange mc = change_of_measure(m, 0.0, mu1);
  CHECK_FALSE(mc.lambda_admissible);
}

TEST_CASE("diagnostics on the scalar and multi-factor fixtures") {
  const Diagnostics m2 = diagnostics(oracle::fixture("m2"));
  CHECK(std::abs(m2.sigma_infty - 0.0924) < 5e-5);
  CHECK(std::abs(m2.kurt_infty - 1.50) < 5e-3);

  const Diagnostics mm1 = diagnostics(oracle::fixture("mm1"));
  CHECK(std::abs(mm1.kappa - 0.10) < 5e-3);
  CHECK(std::abs(mm1.sigma_infty - 0.1055) < 5e-5);
  CHECK(std::abs(mm1.kurt_infty - 1.03) < 5e-3);
  CHECK(std::abs(mm1.mu2 - 1.75) < 5e-3);

  const Diagnostics mm4 = diagnostics(oracle::fixture("mm4"));
  CHECK(mm4.mu2 > 0.0);
  CHECK(mm4.mu3 > 0.0);
  CHECK(mm4.mu4 > 0.0);
}

TEST_CASE("stationary variance equals alpha over one minus kappa") {
  for (const std::string name : {"m1", "m3", "mm1", "mm3", "mm5"}) {
    const ModelParams m = oracle::fixture(name);
    const Diagnostics d = diagnostics(m);
    CHECK(d.sigma_infty * d.sigma_infty ==
          doctest::Approx(m.alpha / (1.0 - d.kappa)).epsilon(1e-14));
    CHECK(d.sigma_min <= d.sigma_infty);
  }
}

TEST_CASE("diagnostics rejects non-stationary models") {
  CHECK_THROWS_AS(diagnostics(scalar(6, 0.01, 0, 4.5)), NotStationary);
}
