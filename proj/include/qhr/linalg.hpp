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

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <vector>

namespace qhr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CVector = Eigen::VectorXcd;
using Index = Eigen::Index;

// Largest latent dimension accepted by the operator builder. At p = 6 the
// full moment matrix is 1554 x 1554.
inline constexpr int kDimensionCap = 6;

Matrix kron(const Matrix& a, const Matrix& b);

// Column-stacking vectorisation and its inverse.
Vector vec(const Matrix& a);
Matrix unvec(const Vector& v, Index rows, Index cols);

// Kronecker-power operators for orders k = 1..4, stored at index k-1.
//   lambda_k[k] = I_p (x) lambda_k[k-1] + Lambda (x) I_{p^k}
//   b_k[k]      = I_p (x) b_k[k-1]      + b (x) c_k[k-1]
//   c_k[k]      = I_p (x) c_k[k-1]      + b (x) I_{p^k}
// b_k[0] is the empty p x 0 matrix.
struct KronOperatorSet {
  int p = 0;
  std::array<Matrix, 4> lambda_k;
  std::array<Matrix, 4> b_k;
  std::array<Matrix, 4> c_k;
};

KronOperatorSet build_kron_operators(const Matrix& lambda, const Vector& b,
                                     int cap = kDimensionCap);

// Matrix exponential. Throws Overflow when the result is not finite.
Matrix expm(const Matrix& a);

// Solves A^T F + F A = g g^T through the Kronecker system. Throws Unstable
// unless every eigenvalue of A has positive real part.
Matrix solve_lyapunov(const Matrix& a_tilde, const Vector& g);

// Eigenvalues with multiplicity, sorted by real part then imaginary part.
CVector eigenvalues(const Matrix& a);

// Eigen-decomposition of a symmetric matrix, eigenvalues descending.
struct SymmetricEigen {
  Vector values;
  Matrix vectors;
};
SymmetricEigen symmetric_eigen(const Matrix& a);

struct PivotedCholesky {
  Matrix r;       // n x rank, F = R R^T
  int rank = 0;
  Matrix r_pinv;  // rank x n, (R^T R)^-1 R^T
};

// Diagonal pivoting stops once the largest remaining pivot falls below
// tol * max(diag F). Throws NotPsd on a pivot below -tol * max(diag F).
PivotedCholesky pivoted_cholesky(const Matrix& f, double tol = 1e-10);

// Moore-Penrose pseudo-inverse; singular values below rcond * s_max are
// treated as zero.
Matrix pinv(const Matrix& a, double rcond = 1e-10);

// vec(S) = D vech(S) for symmetric S, and vech(S) = L vec(S).
Matrix duplication_matrix(int p);
Matrix elimination_matrix(int p);

}  // namespace qhr
