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

#include "qhr/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qhr/errors.hpp"
#include "qhr/moments.hpp"

namespace qhr {

namespace {

constexpr double kImagTol = 1e-6;

bool all_finite(const ModelParams& m) {
  return m.lambda.allFinite() && m.b.allFinite() && std::isfinite(m.alpha) &&
         m.beta.allFinite() && m.gamma.allFinite();
}

// Groups the real parts of nearly equal eigenvalues; returns (rate, count)
// sorted by decreasing rate.
std::vector<std::pair<double, int>> cluster_rates(const CVector& ev) {
  double scale = 0.0;
  for (Index i = 0; i < ev.size(); ++i) scale = std::max(scale, std::abs(ev(i)));
  const double tol = 1e-5 * std::max(scale, 1.0);
  std::vector<double> re(ev.size());
  for (Index i = 0; i < ev.size(); ++i) re[i] = ev(i).real();
  std::sort(re.begin(), re.end(), std::greater<>());
  std::vector<std::pair<double, int>> out;
  std::vector<double> sum;
  for (double r : re) {
    if (!out.empty() && std::abs(out.back().first - r) <= tol) {
      sum.back() += r;
      ++out.back().second;
      out.back().first = sum.back() / out.back().second;
    } else {
      out.emplace_back(r, 1);
      sum.push_back(r);
    }
  }
  return out;
}

// True when (lambda, b) already has the identified block structure.
bool is_canonical(const Matrix& lambda, const Vector& b, JordanSpec* spec) {
  const Index p = lambda.rows();
  JordanSpec js;
  Index start = 0;
  while (start < p) {
    const double rate = lambda(start, start);
    Index end = start + 1;
    while (end < p && lambda(end, end) == rate && lambda(end, end - 1) == -rate) {
      ++end;
    }
    js.blocks.emplace_back(rate, static_cast<int>(end - start));
    start = end;
  }
  for (std::size_t i = 0; i < js.blocks.size(); ++i) {
    if (!(js.blocks[i].first > 0.0)) return false;
    if (i > 0 && !(js.blocks[i - 1].first > js.blocks[i].first)) return false;
  }
  if (lambda != js.lambda() || b != js.b()) return false;
  if (spec) *spec = js;
  return true;
}

Matrix bordered(const ModelParams& m) {
  const Index p = m.b.size();
  Matrix out(p + 1, p + 1);
  out(0, 0) = m.alpha;
  out.block(1, 0, p, 1) = m.beta;
  out.block(0, 1, 1, p) = m.beta.transpose();
  out.block(1, 1, p, p) = m.gamma;
  return out;
}

}  // namespace

int JordanSpec::dim() const {
  int n = 0;
  for (const auto& blk : blocks) n += blk.second;
  return n;
}

Matrix JordanSpec::lambda() const {
  const int p = dim();
  Matrix out = Matrix::Zero(p, p);
  int at = 0;
  for (const auto& [rate, n] : blocks) {
    for (int i = 0; i < n; ++i) {
      out(at + i, at + i) = rate;
      if (i > 0) out(at + i, at + i - 1) = -rate;
    }
    at += n;
  }
  return out;
}

Vector JordanSpec::b() const {
  Vector out = Vector::Zero(dim());
  int at = 0;
  for (const auto& blk : blocks) {
    out(at) = 1.0;
    at += blk.second;
  }
  return out;
}

std::vector<std::string> validate(const ModelParams& m) {
  std::vector<std::string> v;
  const Index p = m.b.size();
  if (p == 0) v.emplace_back("b must be non-empty");
  if (m.lambda.rows() != p || m.lambda.cols() != p) {
    v.emplace_back("lambda must be square and match the length of b");
  }
  if (m.beta.size() != p) v.emplace_back("beta must match the length of b");
  if (m.gamma.rows() != p || m.gamma.cols() != p) {
    v.emplace_back("gamma must be square and match the length of b");
  }
  if (!v.empty()) return v;
  if (!all_finite(m)) {
    v.emplace_back("all entries must be finite");
    return v;
  }
  if (!(m.alpha > 0.0)) v.emplace_back("alpha must be positive");
  const double gscale = std::max(m.gamma.cwiseAbs().maxCoeff(), 1e-300);
  if ((m.gamma - m.gamma.transpose()).cwiseAbs().maxCoeff() > 1e-12 * gscale) {
    v.emplace_back("gamma must be symmetric");
  }
  const CVector ev = eigenvalues(m.lambda);
  double scale = 0.0;
  for (Index i = 0; i < ev.size(); ++i) scale = std::max(scale, std::abs(ev(i)));
  bool real = true;
  bool positive = true;
  for (Index i = 0; i < ev.size(); ++i) {
    if (std::abs(ev(i).imag()) > kImagTol * std::max(scale, 1.0)) real = false;
    if (!(ev(i).real() > 0.0)) positive = false;
  }
  if (!real) v.emplace_back("lambda eigenvalues must be real");
  if (!positive) v.emplace_back("lambda eigenvalues must be positive");
  const Matrix bm = bordered(m);
  const Vector bev = symmetric_eigen(bm).values;
  const double bscale = std::max(bm.cwiseAbs().maxCoeff(), 1e-300);
  if (bev(bev.size() - 1) < -1e-12 * bscale) {
    v.emplace_back("bordered matrix not psd");
  }
  return v;
}

void require_valid(const ModelParams& params) {
  const auto v = validate(params);
  if (v.empty()) return;
  std::ostringstream os;
  os << "invalid model";
  if (!params.label.empty()) os << " '" << params.label << "'";
  os << ":";
  for (const auto& s : v) os << " " << s << ";";
  throw InvalidModel(os.str());
}

CanonicalModel canonicalize(const ModelParams& params) {
  if (params.lambda.rows() == params.lambda.cols() &&
      params.lambda.allFinite()) {
    const CVector ev = eigenvalues(params.lambda);
    const double scale = ev.cwiseAbs().maxCoeff();
    for (Index i = 0; i < ev.size(); ++i) {
      if (std::abs(ev(i).imag()) > kImagTol * std::max(scale, 1.0)) {
        throw ComplexEigenvalues("canonicalize: lambda has complex eigenvalues");
      }
    }
  }
  require_valid(params);
  const Index p = params.dim();
  CanonicalModel out;
  if (is_canonical(params.lambda, params.b, &out.jordan)) {
    out.params = params;
    out.transform = Matrix::Identity(p, p);
    return out;
  }
  const CVector ev = eigenvalues(params.lambda);
  const auto rates = cluster_rates(ev);
  const Matrix id = Matrix::Identity(p, p);
  // Generalised eigenspace bases and the components of b inside each.
  Matrix basis(p, p);
  std::vector<Index> offset;
  Index at = 0;
  for (const auto& [rate, n] : rates) {
    Matrix shifted = params.lambda - rate * id;
    Matrix power = id;
    for (int i = 0; i < n; ++i) power = power * shifted;
    Eigen::FullPivLU<Matrix> lu(power);
    lu.setThreshold(1e-8);
    const Matrix ker = lu.kernel();
    if (ker.cols() != n) {
      throw ComplexEigenvalues("canonicalize: generalised eigenspace of rate " +
                               std::to_string(rate) + " has dimension " +
                               std::to_string(ker.cols()) + ", expected " +
                               std::to_string(n));
    }
    offset.push_back(at);
    basis.middleCols(at, n) = ker;
    at += n;
  }
  const Vector coef = basis.fullPivLu().solve(params.b);
  Matrix m(p, p);
  at = 0;
  std::size_t blk = 0;
  for (const auto& [rate, n] : rates) {
    Vector v = basis.middleCols(offset[blk], n) * coef.segment(offset[blk], n);
    const Matrix step = id - params.lambda / rate;
    for (int j = 0; j < n; ++j) {
      m.col(at + j) = v;
      v = step * v;
    }
    at += n;
    ++blk;
  }
  Eigen::FullPivLU<Matrix> mlu(m);
  if (!mlu.isInvertible() || mlu.rcond() < 1e-12) {
    throw RepeatedEigenvalueAcrossBlocks(
        "canonicalize: b does not generate a single Jordan chain per rate; "
        "aggregate repeated blocks first");
  }
  out.jordan.blocks = rates;
  out.transform = m;
  out.params = params;
  out.params.lambda = out.jordan.lambda();
  out.params.b = out.jordan.b();
  out.params.beta = m.transpose() * params.beta;
  out.params.gamma = m.transpose() * params.gamma * m;
  out.params.gamma = (0.5 * (out.params.gamma + out.params.gamma.transpose())).eval();
  if (params.w) out.params.w = m.transpose() * *params.w;
  return out;
}

double variance(const ModelParams& params, const Vector& y) {
  return params.alpha + 2.0 * params.beta.dot(y) + y.dot(params.gamma * y);
}

VarianceMin variance_min(const ModelParams& params) {
  VarianceMin out;
  out.y_min = -pinv(params.gamma) * params.beta;
  const double v = variance(params, out.y_min);
  out.sigma_min = std::sqrt(std::max(v, 0.0));
  return out;
}

FilterValues filter_phi(const ModelParams& params, const Vector& w,
                        const std::vector<double>& t_grid) {
  FilterValues out;
  out.unit_mass = std::abs(w.dot(params.b) - 1.0) <= 1e-12;
  const Vector lw = params.lambda.transpose() * w;
  out.values.reserve(t_grid.size());
  for (double t : t_grid) {
    out.values.push_back(lw.dot(expm(-params.lambda * t) * params.b));
  }
  return out;
}

double filter_psi(double rate, int i, double t) {
  if (t < 0.0) return 0.0;
  if (i == 1) return rate * std::exp(-rate * t);
  if (t == 0.0) return 0.0;
  const double lt = rate * t;
  return rate * std::exp(-lt + (i - 1) * std::log(lt) - std::lgamma(i));
}

bool weights_admissible(const JordanSpec& jordan, const Vector& w) {
  if (w.size() != jordan.dim()) return false;
  double mass = 0.0;
  int at = 0;
  for (const auto& blk : jordan.blocks) {
    if (!(w(at) > 0.0)) return false;
    mass += w(at);
    for (int i = 1; i < blk.second; ++i) {
      if (w(at + i) < 0.0 || w(at + i) > w(at + i - 1)) return false;
    }
    at += blk.second;
  }
  return std::abs(mass - 1.0) <= 1e-12;
}

double filter_phi_min(const ModelParams& params, const Vector& w, int n_points,
                      double horizon_scale) {
  const double t_max = horizon_scale / lambda_min(params);
  std::vector<double> grid(n_points);
  for (int i = 0; i < n_points; ++i) {
    grid[i] = t_max * i / std::max(n_points - 1, 1);
  }
  const auto f = filter_phi(params, w, grid);
  return *std::min_element(f.values.begin(), f.values.end());
}

ModelParams rank_one_from(const Matrix& lambda, const Vector& b,
                          const Vector& w, double alpha, double beta0,
                          double gamma0) {
  if (!(alpha > 0.0)) throw ConstraintViolation("alpha must be positive");
  if (gamma0 < 0.0) throw ConstraintViolation("gamma0 must be nonnegative");
  if (beta0 * beta0 > alpha * gamma0 * (1.0 + 1e-12)) {
    throw ConstraintViolation("beta0^2 must not exceed alpha * gamma0");
  }
  if ((w.array() < 0.0).any()) {
    throw ConstraintViolation("weights must be nonnegative");
  }
  ModelParams m;
  m.lambda = lambda;
  m.b = b;
  m.alpha = alpha;
  m.w = w;
  m.beta0 = gamma0 == 0.0 ? 0.0 : beta0;
  m.gamma0 = gamma0;
  m.beta = *m.beta0 * w;
  m.gamma = gamma0 * w * w.transpose();
  return m;
}

ModelParams rank_one(const JordanSpec& jordan, const Vector& w, double alpha,
                     double beta0, double gamma0) {
  if (w.size() != jordan.dim()) {
    throw ConstraintViolation("weights must match the Jordan dimension");
  }
  return rank_one_from(jordan.lambda(), jordan.b(), w, alpha, beta0, gamma0);
}

MeasureChange change_of_measure(const ModelParams& params, double mu0,
                                const Vector& mu1) {
  const Index p = params.dim();
  if (mu1.size() != p) throw Error("change_of_measure: mu1 length mismatch");
  Eigen::PartialPivLU<Matrix> lu(params.lambda);
  const double denom = 1.0 - mu1.dot(lu.solve(params.b));
  if (std::abs(denom) <= 1e-12) {
    throw SingularTransform("change_of_measure: mu1' Lambda^-1 b equals 1");
  }
  MeasureChange out;
  out.params = params;
  out.params.lambda = params.lambda - params.b * mu1.transpose();
  out.shift = mu0 * out.params.lambda.partialPivLu().solve(params.b);
  out.params.alpha = variance(params, out.shift);
  out.params.beta = params.beta + params.gamma * out.shift;
  out.params.w.reset();
  out.params.beta0.reset();
  out.params.gamma0.reset();
  const CVector ev = eigenvalues(out.params.lambda);
  double scale = 1.0;
  for (Index i = 0; i < ev.size(); ++i) scale = std::max(scale, std::abs(ev(i)));
  for (Index i = 0; i < ev.size(); ++i) {
    if (std::abs(ev(i).imag()) > kImagTol * scale || !(ev(i).real() > 0.0)) {
      out.lambda_admissible = false;
    }
  }
  return out;
}

double lambda_min(const ModelParams& params) {
  return eigenvalues(params.lambda)(0).real();
}

Diagnostics diagnostics(const ModelParams& params) {
  require_valid(params);
  const MomentSystem sys = build_moment_system(params);
  const StationarySummary st = stationary_summary(sys, params);
  const auto vm = variance_min(params);
  Diagnostics d;
  d.y_min = vm.y_min;
  d.sigma_min = vm.sigma_min;
  d.sigma_infty = std::sqrt(st.sigma2_infty);
  d.kurt_infty = st.kurt_infty;
  d.kappa = st.kappa;
  d.kappa_tilde = st.kappa_tilde;
  d.mu2 = sys.block_spectra[1](0).real();
  d.mu3 = sys.block_spectra[2](0).real();
  d.mu4 = sys.block_spectra[3](0).real();
  return d;
}

}  // namespace qhr
