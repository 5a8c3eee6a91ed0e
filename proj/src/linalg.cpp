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

#include "qhr/linalg.hpp"

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "qhr/errors.hpp"

namespace qhr {

Matrix kron(const Matrix& a, const Matrix& b) {
  return Eigen::kroneckerProduct(a, b).eval();
}

Vector vec(const Matrix& a) {
  return Eigen::Map<const Vector>(a.data(), a.size());
}

Matrix unvec(const Vector& v, Index rows, Index cols) {
  if (rows * cols != v.size()) {
    throw Error("unvec: size " + std::to_string(v.size()) + " is not " +
                std::to_string(rows) + "x" + std::to_string(cols));
  }
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

KronOperatorSet build_kron_operators(const Matrix& lambda, const Vector& b,
                                     int cap) {
  const Index p = lambda.rows();
  if (lambda.cols() != p || b.size() != p || p == 0) {
    throw Error("build_kron_operators: lambda must be square and match b");
  }
  if (p > cap) {
    throw DimensionCap("latent dimension " + std::to_string(p) +
                       " exceeds cap " + std::to_string(cap));
  }
  KronOperatorSet ops;
  ops.p = static_cast<int>(p);
  const Matrix ip = Matrix::Identity(p, p);
  ops.lambda_k[0] = lambda;
  ops.b_k[0] = Matrix::Zero(p, 0);
  ops.c_k[0] = b;
  Index pk = p;
  for (int k = 1; k < 4; ++k) {
    const Matrix ipk = Matrix::Identity(pk, pk);
    ops.lambda_k[k] = kron(ip, ops.lambda_k[k - 1]) + kron(lambda, ipk);
    if (k == 1) {
      ops.b_k[k] = kron(b, b);
    } else {
      ops.b_k[k] = kron(ip, ops.b_k[k - 1]) + kron(b, ops.c_k[k - 1]);
    }
    ops.c_k[k] = kron(ip, ops.c_k[k - 1]) + kron(b, ipk);
    pk *= p;
  }
  return ops;
}

Matrix expm(const Matrix& a) {
  if (a.rows() != a.cols()) throw Error("expm: matrix must be square");
  if (!a.allFinite()) throw Overflow("expm: non-finite input");
  Matrix out = a.exp();
  if (!out.allFinite()) throw Overflow("expm: result overflows");
  return out;
}

CVector eigenvalues(const Matrix& a) {
  if (a.rows() != a.cols()) throw Error("eigenvalues: matrix must be square");
  if (a.size() == 0) return CVector();
  Eigen::EigenSolver<Matrix> es(a, false);
  if (es.info() != Eigen::Success) {
    throw NoConvergence("eigenvalues: QR iteration did not converge");
  }
  CVector ev = es.eigenvalues();
  std::sort(ev.data(), ev.data() + ev.size(),
            [](const std::complex<double>& x, const std::complex<double>& y) {
              if (x.real() != y.real()) return x.real() < y.real();
              return x.imag() < y.imag();
            });
  return ev;
}

SymmetricEigen symmetric_eigen(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (a + a.transpose()));
  if (es.info() != Eigen::Success) {
    throw NoConvergence("symmetric_eigen: did not converge");
  }
  SymmetricEigen out;
  out.values = es.eigenvalues().reverse();
  out.vectors = es.eigenvectors().rowwise().reverse();
  return out;
}

Matrix solve_lyapunov(const Matrix& a_tilde, const Vector& g) {
  const Index n = a_tilde.rows();
  if (a_tilde.cols() != n || g.size() != n) {
    throw Error("solve_lyapunov: dimension mismatch");
  }
  const CVector ev = eigenvalues(a_tilde);
  if (n > 0 && ev(0).real() <= 0.0) {
    throw Unstable("solve_lyapunov: eigenvalue with real part " +
                   std::to_string(ev(0).real()));
  }
  const Matrix id = Matrix::Identity(n, n);
  const Matrix k = (kron(a_tilde, id) + kron(id, a_tilde)).transpose();
  const Vector rhs = kron(g, g);
  Eigen::PartialPivLU<Matrix> lu(k);
  Vector x = lu.solve(rhs);
  x += lu.solve(rhs - k * x);
  Matrix f = unvec(x, n, n);
  f = (0.5 * (f + f.transpose())).eval();
  const Matrix ggt = g * g.transpose();
  const double res =
      (a_tilde.transpose() * f + f * a_tilde - ggt).norm();
  if (res > 1e-9 * std::max(ggt.norm(), 1e-300)) {
    throw NoConvergence("solve_lyapunov: residual " + std::to_string(res));
  }
  return f;
}

PivotedCholesky pivoted_cholesky(const Matrix& f, double tol) {
  const Index n = f.rows();
  if (f.cols() != n) throw Error("pivoted_cholesky: matrix must be square");
  PivotedCholesky out;
  if (n == 0) return out;
  const double maxd = f.diagonal().maxCoeff();
  const double thr = tol * std::max(maxd, 0.0);
  Matrix l = Matrix::Zero(n, n);
  Vector d = f.diagonal();
  std::vector<Index> rest(n);
  std::iota(rest.begin(), rest.end(), Index{0});
  int rank = 0;
  while (!rest.empty()) {
    auto it = std::max_element(rest.begin(), rest.end(),
                               [&](Index i, Index j) { return d(i) < d(j); });
    const Index piv = *it;
    if (d(piv) <= thr || d(piv) <= 0.0) break;
    rest.erase(it);
    const double lkk = std::sqrt(d(piv));
    l(piv, rank) = lkk;
    for (Index i : rest) {
      double s = f(i, piv);
      for (int j = 0; j < rank; ++j) s -= l(i, j) * l(piv, j);
      l(i, rank) = s / lkk;
      d(i) -= l(i, rank) * l(i, rank);
    }
    ++rank;
  }
  for (Index i : rest) {
    if (d(i) < -thr) {
      throw NotPsd("pivoted_cholesky: residual pivot " +
                   std::to_string(d(i)) + " below tolerance");
    }
  }
  out.rank = rank;
  out.r = l.leftCols(rank);
  const Matrix rtr = out.r.transpose() * out.r;
  out.r_pinv = rtr.ldlt().solve(out.r.transpose());
  return out;
}

Matrix pinv(const Matrix& a, double rcond) {
  if (a.size() == 0) return Matrix::Zero(a.cols(), a.rows());
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const double cut = rcond * s(0);
  Vector sinv(s.size());
  for (Index i = 0; i < s.size(); ++i) {
    sinv(i) = s(i) > cut && s(i) > 0.0 ? 1.0 / s(i) : 0.0;
  }
  return svd.matrixV() * sinv.asDiagonal() * svd.matrixU().transpose();
}

Matrix duplication_matrix(int p) {
  const int h = p * (p + 1) / 2;
  Matrix d = Matrix::Zero(p * p, h);
  int col = 0;
  for (int j = 0; j < p; ++j) {
    for (int i = j; i < p; ++i) {
      d(i + j * p, col) = 1.0;
      d(j + i * p, col) = 1.0;
      ++col;
    }
  }
  return d;
}

Matrix elimination_matrix(int p) {
  const int h = p * (p + 1) / 2;
  Matrix l = Matrix::Zero(h, p * p);
  int row = 0;
  for (int j = 0; j < p; ++j) {
    for (int i = j; i < p; ++i) {
      l(row, i + j * p) = 1.0;
      ++row;
    }
  }
  return l;
}

}  // namespace qhr
