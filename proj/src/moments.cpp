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

#include "qhr/moments.hpp"

#include <cmath>
#include <sstream>

#include "qhr/errors.hpp"

namespace qhr {

namespace {

Vector solve_block(const Matrix& a, const Vector& rhs, int k) {
  Eigen::PartialPivLU<Matrix> lu(a);
  if (!(lu.rcond() > 1e-14)) {
    throw SingularA("moment block A" + std::to_string(k) +
                    std::to_string(k) + " is singular");
  }
  return lu.solve(rhs);
}

}  // namespace

Vector MomentSystem::m_block(int k) const {
  return m_infty.segment(offsets[k - 1], offsets[k] - offsets[k - 1]);
}

MomentSystem build_moment_system(const ModelParams& params, int cap) {
  MomentSystem sys;
  sys.ops = build_kron_operators(params.lambda, params.b, cap);
  const int p = sys.ops.p;
  sys.p = p;
  sys.alpha = params.alpha;
  const Vector gvec = vec(params.gamma);
  const Matrix gamma_row = gvec.transpose();
  const Matrix beta_row = params.beta.transpose();

  Index size = 1;
  sys.offsets[0] = 0;
  for (int k = 0; k < 4; ++k) {
    size *= p;
    sys.offsets[k + 1] = sys.offsets[k] + size;
  }
  const Index n = sys.offsets[4];
  sys.a_full = Matrix::Zero(n, n);
  for (int k = 0; k < 4; ++k) {
    const auto& bk = sys.ops.b_k[k];
    Matrix diag = sys.ops.lambda_k[k];
    if (k > 0) {
      diag -= kron(bk, gamma_row);
      sys.blocks[k][k - 1] = -2.0 * kron(bk, beta_row);
    }
    if (k > 1) sys.blocks[k][k - 2] = -params.alpha * bk;
    sys.blocks[k][k] = diag;
    for (int j = std::max(k - 2, 0); j <= k; ++j) {
      sys.a_full.block(sys.offsets[k], sys.offsets[j], sys.blocks[k][j].rows(),
                       sys.blocks[k][j].cols()) = sys.blocks[k][j];
    }
  }
  sys.source = Vector::Zero(n);
  const Vector bbar = sys.ops.b_k[1];
  sys.source.segment(sys.offsets[1], p * p) = params.alpha * bbar;

  std::array<Vector, 4> m;
  m[0] = solve_block(sys.blocks[0][0], Vector::Zero(p), 1);
  m[1] = solve_block(sys.blocks[1][1],
                     params.alpha * bbar - sys.blocks[1][0] * m[0], 2);
  m[2] = solve_block(sys.blocks[2][2],
                     -sys.blocks[2][1] * m[1] - sys.blocks[2][0] * m[0], 3);
  m[3] = solve_block(sys.blocks[3][3],
                     -sys.blocks[3][2] * m[2] - sys.blocks[3][1] * m[1], 4);
  sys.m_infty.resize(n);
  for (int k = 0; k < 4; ++k) {
    sys.m_infty.segment(sys.offsets[k], m[k].size()) = m[k];
  }

  const Index ne = sys.offsets[2];
  sys.a_tilde = sys.a_full.topLeftCorner(ne, ne);
  sys.g.resize(ne);
  sys.g << 2.0 * params.beta, gvec;
  sys.eta_infty = Vector::Zero(ne);
  sys.eta_infty.tail(p * p) = m[1];
  const Vector lbar_inv_bbar = solve_block(sys.ops.lambda_k[1], bbar, 2);
  sys.kappa = gvec.dot(lbar_inv_bbar);
  sys.sigma2_infty = params.alpha / (1.0 - sys.kappa);

  sys.stable = sys.kappa < 1.0;
  for (int k = 0; k < 4; ++k) {
    sys.block_spectra[k] = eigenvalues(sys.blocks[k][k]);
    if (k > 0 && !(sys.block_spectra[k](0).real() > 0.0)) sys.stable = false;
  }
  return sys;
}

StabilityCheck check_stability_sufficient(const ModelParams& params) {
  StabilityCheck out;
  const Vector x = params.lambda.partialPivLu().solve(params.b);
  const double quad = x.dot(params.gamma * x);
  const CVector ev = eigenvalues(params.lambda);
  const double lam_max = ev(ev.size() - 1).real();
  const bool nonneg = (params.gamma.array() >= -1e-14).all();
  out.kappa_tilde = lambda_min(params) * quad;
  out.passes = nonneg && out.kappa_tilde < 2.0 / 3.0;
  out.kappa_tilde_max = lam_max * quad;
  out.passes_max = nonneg && out.kappa_tilde_max < 2.0 / 3.0;
  return out;
}

StationarySummary stationary_summary(const MomentSystem& sys,
                                     const ModelParams& params) {
  if (!sys.stable) {
    std::ostringstream os;
    os << "model is not weakly stationary:";
    if (!(sys.kappa < 1.0)) os << " kappa = " << sys.kappa << ";";
    for (int k = 1; k < 4; ++k) {
      const auto& ev = sys.block_spectra[k];
      if (!(ev(0).real() > 0.0)) {
        os << " A" << k + 1 << k + 1 << " eigenvalue " << ev(0).real();
        if (ev(0).imag() != 0.0) os << (ev(0).imag() > 0 ? "+" : "") << ev(0).imag() << "j";
        os << ";";
      }
    }
    throw NotStationary(os.str());
  }
  StationarySummary st;
  st.q_infty = sys.m_block(2);
  st.kappa = sys.kappa;
  st.kappa_tilde = check_stability_sufficient(params).kappa_tilde;
  st.sigma2_infty = sys.sigma2_infty;
  const Matrix om = omega(sys);
  st.e_sigma4 = st.sigma2_infty * st.sigma2_infty + sys.g.dot(om * sys.g);
  st.kurt_infty = st.e_sigma4 / (st.sigma2_infty * st.sigma2_infty);
  st.stable = true;
  return st;
}

Vector kron_powers(const Vector& y) {
  const Index p = y.size();
  Vector out(p + p * p + p * p * p + p * p * p * p);
  Vector cur = y;
  Index at = 0;
  for (int k = 0; k < 4; ++k) {
    out.segment(at, cur.size()) = cur;
    at += cur.size();
    if (k < 3) cur = kron(y, cur);
  }
  return out;
}

Vector conditional_moments(const MomentSystem& sys, const Vector& y0,
                           double t) {
  if (t < 0.0) throw Error("conditional_moments: t must be nonnegative");
  const Vector m0 = kron_powers(y0);
  return sys.m_infty + expm(-sys.a_full * t) * (m0 - sys.m_infty);
}

EtaState EtaState::from_y(const Vector& y) {
  return EtaState{y, kron(y, y)};
}

Vector EtaState::stacked() const {
  Vector out(y.size() + q.size());
  out << y, q;
  return out;
}

Vector conditional_eta(const MomentSystem& sys, const EtaState& eta, double s) {
  if (s < 0.0) throw Error("conditional_eta: s must be nonnegative");
  return sys.eta_infty + expm(-sys.a_tilde * s) * (eta.stacked() - sys.eta_infty);
}

Matrix omega(const MomentSystem& sys) {
  if (!sys.stable) throw NotStationary("omega: model is not weakly stationary");
  const Index p = sys.p;
  const Index p2 = p * p;
  const Vector q = sys.m_block(2);
  Matrix om(p + p2, p + p2);
  om.topLeftCorner(p, p) = unvec(q, p, p);
  const Matrix m3 = unvec(sys.m_block(3), p, p2);
  om.topRightCorner(p, p2) = m3;
  om.bottomLeftCorner(p2, p) = m3.transpose();
  om.bottomRightCorner(p2, p2) = unvec(sys.m_block(4), p2, p2) - q * q.transpose();
  return 0.5 * (om + om.transpose());
}

Vector psi(const MomentSystem& sys, double s) {
  return expm(-sys.a_tilde.transpose() * s) * sys.g;
}

double variance_autocov(const MomentSystem& sys, const Matrix& om, double s) {
  if (!sys.stable) {
    throw NotStationary("variance_autocov: model is not weakly stationary");
  }
  if (s < 0.0) throw Error("variance_autocov: lag must be nonnegative");
  return psi(sys, s).dot(om * sys.g);
}

double squared_increment_autocov(const MomentSystem& sys,
                                 const Vector& cov_eta_xi2, double r,
                                 double h) {
  if (r < 0.0 || h < r) {
    throw WindowOrder("squared_increment_autocov: need h >= r >= 0");
  }
  const Index n = sys.a_tilde.rows();
  const Matrix grow = expm(sys.a_tilde * r) - Matrix::Identity(n, n);
  const Vector hr = sys.a_tilde.partialPivLu().solve(grow * cov_eta_xi2);
  return sys.g.dot(expm(-sys.a_tilde * h) * hr);
}

double squared_increment_mean(const MomentSystem& sys, double r) {
  if (!sys.stable) throw NotStationary("model is not weakly stationary");
  return r * sys.sigma2_infty;
}

double increment_autocov(const MomentSystem& sys, double r, double h) {
  if (r < 0.0 || h < r) throw WindowOrder("increment_autocov: need h >= r >= 0");
  (void)sys;
  return 0.0;
}

}  // namespace qhr
