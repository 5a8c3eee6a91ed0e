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

#include "qhr/mc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <random>
#include <string>
#include <thread>

#include "qhr/errors.hpp"

namespace qhr {

namespace {

constexpr std::size_t kChunk = 256;

struct Dynamics {
  int p;
  std::vector<double> lambda;  // row-major
  std::vector<double> b;
  double alpha;
  std::vector<double> beta;
  std::vector<double> gamma;  // row-major

  explicit Dynamics(const ModelParams& m)
      : p(m.dim()),
        lambda(p * p),
        b(m.b.data(), m.b.data() + p),
        alpha(m.alpha),
        beta(m.beta.data(), m.beta.data() + p),
        gamma(p * p) {
    for (int i = 0; i < p; ++i) {
      for (int j = 0; j < p; ++j) {
        lambda[i * p + j] = m.lambda(i, j);
        gamma[i * p + j] = m.gamma(i, j);
      }
    }
  }

  double var(const double* y) const {
    double v = alpha;
    for (int i = 0; i < p; ++i) {
      double gy = 0.0;
      for (int j = 0; j < p; ++j) gy += gamma[i * p + j] * y[j];
      v += y[i] * (2.0 * beta[i] + gy);
    }
    return v;
  }
};

struct PathState {
  std::vector<double> y;
  std::vector<double> drift;
  double x = 0.0;
  double xi = 0.0;
};

inline void euler_step(const Dynamics& d, PathState& s, double z, double dt,
                       double sqdt, std::uint64_t& floored) {
  double v = d.var(s.y.data());
  if (v < 0.0) {
    v = 0.0;
    ++floored;
  }
  const double vol = std::sqrt(v);
  const double dw = sqdt * z;
  const int p = d.p;
  for (int i = 0; i < p; ++i) {
    double a = 0.0;
    for (int j = 0; j < p; ++j) a += d.lambda[i * p + j] * s.y[j];
    s.drift[i] = a;
  }
  for (int i = 0; i < p; ++i) {
    s.y[i] += -s.drift[i] * dt + d.b[i] * vol * dw;
  }
  s.x += -0.5 * v * dt + vol * dw;
  s.xi += vol * dw;
}

std::mt19937_64 unit_engine(std::uint64_t seed, std::uint64_t unit) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(unit),
                    static_cast<std::uint32_t>(unit >> 32)};
  return std::mt19937_64(seq);
}

std::size_t snap(double t, int spy) {
  return static_cast<std::size_t>(std::llround(t * spy));
}

}  // namespace

std::size_t PathBatch::probe_index(double t) const {
  if (steps_per_year > 0 && std::isfinite(t) && t >= 0.0) {
    t = static_cast<double>(snap(t, steps_per_year)) / steps_per_year;
  }
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (std::abs(times[k] - t) <= 1e-9 * std::max(1.0, std::abs(t))) return k;
  }
  throw Error("no probe at t = " + std::to_string(t));
}

unsigned worker_count() {
  if (const char* env = std::getenv("QHR_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n >= 1) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

double default_burn_in(const ModelParams& params) {
  return 10.0 / lambda_min(params);
}

void check_config(const McConfig& cfg, int p) {
  if (cfg.steps_per_year < 1) throw ConfigInvalid("steps_per_year must be >= 1");
  if (cfg.n_paths == 0) throw ConfigInvalid("n_paths must be positive");
  if (cfg.antithetic && cfg.n_paths % 2 != 0) {
    throw ConfigInvalid("n_paths must be even with antithetic variates");
  }
  for (double t : cfg.probe_times) {
    if (!(t >= 0.0) || !std::isfinite(t)) {
      throw ConfigInvalid("probe times must be finite and nonnegative");
    }
  }
  if (!(cfg.horizon >= 0.0)) throw ConfigInvalid("horizon must be nonnegative");
  const std::size_t units = cfg.antithetic ? cfg.n_paths / 2 : cfg.n_paths;
  switch (cfg.init) {
    case InitKind::kFixed:
      if (cfg.y0.size() != p) throw ConfigInvalid("y0 must have length p");
      if (!cfg.y0.allFinite()) throw ConfigInvalid("y0 must be finite");
      break;
    case InitKind::kBurnIn:
      break;
    case InitKind::kExplicit:
      if (cfg.initial_states.size() != units) {
        throw ConfigInvalid("need one initial state per independent draw (" +
                            std::to_string(units) + ")");
      }
      for (const auto& s : cfg.initial_states) {
        if (s.size() != p) throw ConfigInvalid("initial state length != p");
      }
      break;
  }
}

PathBatch simulate(const ModelParams& params, const McConfig& cfg) {
  require_valid(params);
  const int p = params.dim();
  check_config(cfg, p);
  const Dynamics dyn(params);
  const int spy = cfg.steps_per_year;
  const double dt = 1.0 / spy;
  const double sqdt = std::sqrt(dt);

  PathBatch batch;
  batch.p = p;
  batch.n_paths = cfg.n_paths;
  batch.antithetic = cfg.antithetic;
  batch.steps_per_year = spy;
  std::vector<std::size_t> probe_step;
  for (double t : cfg.probe_times) {
    probe_step.push_back(snap(t, spy));
    batch.times.push_back(static_cast<double>(probe_step.back()) / spy);
  }
  std::size_t n_steps = snap(cfg.horizon, spy);
  for (std::size_t s : probe_step) n_steps = std::max(n_steps, s);
  const double burn_in =
      cfg.burn_in > 0.0 ? cfg.burn_in : default_burn_in(params);
  const std::size_t burn_steps =
      cfg.init == InitKind::kBurnIn ? snap(burn_in, spy) : 0;

  const std::size_t np = cfg.n_paths;
  const std::size_t nprobe = probe_step.size();
  batch.y_init.resize(p, np);
  batch.y.assign(nprobe, Matrix(p, np));
  batch.x.assign(nprobe, std::vector<double>(np));
  batch.sigma2.assign(nprobe, std::vector<double>(np));
  batch.xi.assign(nprobe, std::vector<double>(np));

  // Probe slots ordered by step so each path is scanned once.
  std::vector<std::size_t> order(nprobe);
  for (std::size_t k = 0; k < nprobe; ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return probe_step[a] < probe_step[b];
  });

  const std::size_t width = cfg.antithetic ? 2 : 1;
  const std::size_t units = np / width;
  const std::size_t n_chunks = (units + kChunk - 1) / kChunk;
  std::vector<std::uint64_t> floored(n_chunks, 0);
  std::atomic<std::size_t> next{0};

  auto record = [&](std::size_t k, std::size_t path, const PathState& s) {
    for (int i = 0; i < p; ++i) batch.y[k](i, path) = s.y[i];
    batch.x[k][path] = s.x;
    batch.sigma2[k][path] = std::max(dyn.var(s.y.data()), 0.0);
    batch.xi[k][path] = s.xi;
  };

  auto worker = [&]() {
    PathState st[2];
    for (auto& s : st) {
      s.y.assign(p, 0.0);
      s.drift.assign(p, 0.0);
    }
    for (;;) {
      const std::size_t chunk = next.fetch_add(1);
      if (chunk >= n_chunks) break;
      std::uint64_t fl = 0;
      const std::size_t u_end = std::min(units, (chunk + 1) * kChunk);
      for (std::size_t u = chunk * kChunk; u < u_end; ++u) {
        auto eng = unit_engine(cfg.seed, u);
        std::normal_distribution<double> normal;
        for (std::size_t w = 0; w < width; ++w) {
          auto& s = st[w];
          s.x = 0.0;
          s.xi = 0.0;
          if (cfg.init == InitKind::kFixed) {
            for (int i = 0; i < p; ++i) s.y[i] = cfg.y0(i);
          } else if (cfg.init == InitKind::kExplicit) {
            for (int i = 0; i < p; ++i) s.y[i] = cfg.initial_states[u](i);
          } else {
            std::fill(s.y.begin(), s.y.end(), 0.0);
          }
        }
        for (std::size_t n = 0; n < burn_steps; ++n) {
          const double z = normal(eng);
          euler_step(dyn, st[0], z, dt, sqdt, fl);
          if (width == 2) euler_step(dyn, st[1], -z, dt, sqdt, fl);
        }
        for (std::size_t w = 0; w < width; ++w) {
          st[w].x = 0.0;
          st[w].xi = 0.0;
          for (int i = 0; i < p; ++i) batch.y_init(i, u * width + w) = st[w].y[i];
        }
        std::size_t next_probe = 0;
        for (std::size_t n = 0;; ++n) {
          while (next_probe < nprobe && probe_step[order[next_probe]] == n) {
            for (std::size_t w = 0; w < width; ++w) {
              record(order[next_probe], u * width + w, st[w]);
            }
            ++next_probe;
          }
          if (n == n_steps) break;
          const double z = normal(eng);
          euler_step(dyn, st[0], z, dt, sqdt, fl);
          if (width == 2) euler_step(dyn, st[1], -z, dt, sqdt, fl);
        }
      }
      floored[chunk] = fl;
    }
  };

  const unsigned nw =
      static_cast<unsigned>(std::min<std::size_t>(worker_count(), n_chunks));
  if (nw <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < nw; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto f : floored) batch.floored_steps += f;
  return batch;
}

std::vector<Vector> stationary_init(const ModelParams& params, double burn_in,
                                    const McConfig& cfg) {
  McConfig c = cfg;
  c.init = InitKind::kBurnIn;
  c.burn_in = burn_in;
  c.horizon = 0.0;
  c.probe_times = {0.0};
  const PathBatch b = simulate(params, c);
  std::vector<Vector> out(b.n_paths);
  for (std::size_t i = 0; i < b.n_paths; ++i) out[i] = b.y_init.col(i);
  return out;
}

namespace {

McConfig stationary_config(const McConfig& cfg, std::vector<double> probes) {
  McConfig c = cfg;
  if (c.init != InitKind::kExplicit) c.init = InitKind::kBurnIn;
  c.probe_times = std::move(probes);
  return c;
}

}  // namespace

CovEtaXi2 estimate_cov_eta_xi2(const ModelParams& params, double r,
                               const McConfig& cfg) {
  const PathBatch b = simulate(params, stationary_config(cfg, {r}));
  const int p = b.p;
  const std::size_t n = b.n_paths;
  CovEtaXi2 out;
  out.group_size = b.group_size();
  out.eta.resize(p + p * p, n);
  out.xi2.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vector y = b.y[0].col(i);
    out.eta.col(i).head(p) = y;
    out.eta.col(i).tail(p * p) = kron(y, y);
    out.xi2[i] = b.xi[0][i] * b.xi[0][i];
  }
  out.value.resize(p + p * p);
  out.se.resize(p + p * p);
  for (int j = 0; j < p + p * p; ++j) {
    std::vector<double> comp(n);
    for (std::size_t i = 0; i < n; ++i) comp[i] = out.eta(j, i);
    const Estimate e = grouped_cov(comp, out.xi2, out.group_size);
    out.value(j) = e.value;
    out.se(j) = e.se;
  }
  return out;
}

Estimate mc_squared_increment_autocov(const ModelParams& params, double r,
                                      double h, const McConfig& cfg) {
  if (r < 0.0 || h < r) throw WindowOrder("need h >= r >= 0");
  const PathBatch b = simulate(params, stationary_config(cfg, {r, h, h + r}));
  const std::size_t kr = 0;
  const std::size_t kh = 1;
  const std::size_t khr = 2;
  std::vector<double> first(b.n_paths), second(b.n_paths);
  for (std::size_t i = 0; i < b.n_paths; ++i) {
    first[i] = b.xi[kr][i] * b.xi[kr][i];
    const double inc = b.xi[khr][i] - b.xi[kh][i];
    second[i] = inc * inc;
  }
  return grouped_cov(first, second, b.group_size());
}

}  // namespace qhr
