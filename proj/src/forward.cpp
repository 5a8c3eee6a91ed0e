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

#include "qhr/forward.hpp"

#include <cmath>

#include "qhr/errors.hpp"

namespace qhr {

Vector ForwardLoadings::psi(double s) const { return qhr::psi(*sys, s); }

Vector ForwardLoadings::psi_y(double s) const { return psi(s).head(sys->p); }

Matrix ForwardLoadings::psi_q(double s) const {
  const Index p = sys->p;
  const Matrix m = unvec(psi(s).tail(p * p), p, p);
  return 0.5 * (m + m.transpose());
}

double forward_variance(const MomentSystem& sys, const EtaState& eta,
                        double s) {
  if (!sys.stable) throw NotStationary("forward_variance: not stationary");
  if (s < 0.0) throw Error("forward_variance: s must be nonnegative");
  return sys.sigma2_infty + psi(sys, s).dot(eta.stacked() - sys.eta_infty);
}

ForwardEnvelope forward_min_envelope(const MomentSystem& sys, double s) {
  if (!sys.stable) throw NotStationary("forward_min_envelope: not stationary");
  const ForwardLoadings ld(sys);
  const Vector ps = ld.psi(s);
  const Index p = sys.p;
  const Vector py = ps.head(p);
  Matrix pq = unvec(ps.tail(p * p), p, p);
  pq = (0.5 * (pq + pq.transpose())).eval();
  ForwardEnvelope out;
  out.v0 = sys.sigma2_infty - ps.dot(sys.eta_infty);
  const Vector ev = symmetric_eigen(pq).values;
  const double scale = std::max(pq.cwiseAbs().maxCoeff(), 1e-300);
  if (ev(ev.size() - 1) < -1e-10 * scale) {
    throw NonConvexSlice("forward_min_envelope: quadratic term at s = " +
                         std::to_string(s) + " has eigenvalue " +
                         std::to_string(ev(ev.size() - 1)));
  }
  out.y_star = -0.5 * pinv(pq) * py;
  out.v_min = out.v0 + py.dot(out.y_star) + out.y_star.dot(pq * out.y_star);
  return out;
}

Vector PcaDecomposition::psi_reduced(double t) const {
  return expm(-a_reduced.transpose() * t) * g_reduced;
}

Vector PcaDecomposition::factor_curves(double t) const {
  return v.transpose() * (r_pinv * psi_reduced(t));
}

PcaDecomposition pca(const MomentSystem& sys, const Matrix& om, double tol) {
  const int p = sys.p;
  const int h = p * (p + 1) / 2;
  const Matrix dup = duplication_matrix(p);
  const Matrix elim = elimination_matrix(p);
  const Matrix dup_pinv = (dup.transpose() * dup).inverse() * dup.transpose();
  Matrix left = Matrix::Zero(p + h, p + p * p);
  Matrix right = Matrix::Zero(p + p * p, p + h);
  left.topLeftCorner(p, p).setIdentity();
  right.topLeftCorner(p, p).setIdentity();
  left.bottomRightCorner(h, p * p) = dup_pinv;
  right.bottomRightCorner(p * p, h) = dup;
  Matrix lsel = Matrix::Zero(p + h, p + p * p);
  lsel.topLeftCorner(p, p).setIdentity();
  lsel.bottomRightCorner(h, p * p) = elim;

  PcaDecomposition dec;
  dec.a_reduced = left * sys.a_tilde * right;
  dec.g_reduced = right.transpose() * sys.g;
  dec.omega_reduced = lsel * om * lsel.transpose();
  dec.omega_reduced = (0.5 * (dec.omega_reduced + dec.omega_reduced.transpose())).eval();
  dec.f_matrix = solve_lyapunov(dec.a_reduced, dec.g_reduced);
  const PivotedCholesky pc = pivoted_cholesky(dec.f_matrix, tol);
  dec.rank = pc.rank;
  dec.r_factor = pc.r;
  dec.r_pinv = pc.r_pinv;
  const Matrix inner = pc.r.transpose() * dec.omega_reduced * pc.r;
  const SymmetricEigen se = symmetric_eigen(inner);
  dec.eigenvalues = se.values;
  dec.v = se.vectors;
  return dec;
}

CurveTable pca_curves_table(const PcaDecomposition& dec,
                            const std::vector<double>& grid) {
  CurveTable tab;
  tab.header.push_back("t");
  for (int i = 0; i < dec.rank; ++i) {
    tab.header.push_back("pc" + std::to_string(i + 1));
  }
  for (double t : grid) {
    const Vector u = dec.factor_curves(t);
    std::vector<double> row{t};
    for (int i = 0; i < dec.rank; ++i) {
      row.push_back(u(i) * std::sqrt(std::max(dec.eigenvalues(i), 0.0)));
    }
    tab.rows.push_back(std::move(row));
  }
  return tab;
}

std::vector<double> geometric_grid(double t0, double t1, int n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = t0;
    return out;
  }
  const double r = std::log(t1 / t0) / (n - 1);
  for (int i = 0; i < n; ++i) out[i] = t0 * std::exp(r * i);
  out[n - 1] = t1;
  return out;
}

}  // namespace qhr
