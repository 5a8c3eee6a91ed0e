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

#include "qhr/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qhr/csv.hpp"
#include "qhr/errors.hpp"
#include "qhr/forward.hpp"
#include "qhr/mc.hpp"
#include "qhr/model.hpp"
#include "qhr/model_io.hpp"
#include "qhr/moments.hpp"
#include "qhr/pricing.hpp"
#include "qhr/scalar.hpp"

namespace qhr {

namespace {

struct UsageError : Error {
  using Error::Error;
};

struct Options {
  std::vector<std::string> models;
  std::string out;
  std::uint64_t seed = 20240601;
  std::size_t paths = 100000;
  int steps_per_year = 250;
  std::vector<std::string> y0s;
  std::string grid;
  std::string maturities;
  std::string format;
  bool normalized = false;
  bool spectrum = false;
  bool stationary = false;
  double eps = 0.01;
};

std::vector<double> parse_numbers(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      throw UsageError("not a number: '" + tok + "'");
    }
    if (used != tok.size()) throw UsageError("not a number: '" + tok + "'");
    out.push_back(v);
  }
  return out;
}

// "a:b:n" expands to n points (geometric or linear), otherwise a comma list.
std::vector<double> parse_grid(const std::string& s, bool geometric) {
  if (s.find(':') == std::string::npos) {
    auto v = parse_numbers(s);
    if (v.empty()) throw UsageError("empty grid");
    return v;
  }
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ':')) parts.push_back(tok);
  if (parts.size() != 3) throw UsageError("grid must be 'start:stop:count'");
  const double a = parse_numbers(parts[0]).at(0);
  const double b = parse_numbers(parts[1]).at(0);
  const double nd = parse_numbers(parts[2]).at(0);
  const int n = static_cast<int>(nd);
  if (n < 1 || nd != n) throw UsageError("grid count must be a positive integer");
  if (geometric) {
    if (!(a > 0.0) || !(b > a)) throw UsageError("geometric grid needs 0 < start < stop");
    return geometric_grid(a, b, n);
  }
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = n == 1 ? a : a + (b - a) * i / (n - 1);
  return out;
}

Vector parse_y0(const std::string& s, int p) {
  const auto v = parse_numbers(s);
  if (static_cast<int>(v.size()) != p) {
    throw UsageError("initial offset '" + s + "' must have " + std::to_string(p) +
                     " components");
  }
  return Eigen::Map<const Vector>(v.data(), p);
}

std::string y0_label(const std::string& s) {
  std::string out = s;
  for (auto& c : out) {
    if (c == ',') c = ';';
  }
  return out;
}

ModelParams single_model(const Options& o) {
  if (o.models.size() != 1) throw UsageError("exactly one --model is required");
  return load_model(o.models[0]);
}

std::vector<Vector> initial_offsets(const Options& o, int p) {
  std::vector<Vector> out;
  if (o.y0s.empty()) {
    out.push_back(Vector::Zero(p));
  } else {
    for (const auto& s : o.y0s) out.push_back(parse_y0(s, p));
  }
  return out;
}

// Writes to --out when given, else to the CLI's stdout.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : os_(&fallback) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw UsageError("cannot write '" + path + "'");
      os_ = file_.get();
    }
  }
  std::ostream& get() { return *os_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* os_;
};

std::string pct(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << 100.0 * v << "%";
  return os.str();
}

std::string fix(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

std::string complex_str(std::complex<double> z) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << z.real();
  if (std::abs(z.imag()) >= 0.005) {
    os << "+-" << std::abs(z.imag()) << "j";
  }
  return os.str();
}

McConfig mc_config(const Options& o) {
  McConfig c;
  c.steps_per_year = o.steps_per_year;
  c.n_paths = o.paths;
  c.seed = o.seed;
  c.antithetic = true;
  return c;
}

int cmd_validate(const Options& o, std::ostream& out, std::ostream&) {
  const ModelParams m = single_model(o);
  const auto violations = validate(m);
  out << "model " << m.label << "\n";
  out << "  admissible parameters: " << (violations.empty() ? "PASS" : "FAIL")
      << "\n";
  for (const auto& v : violations) out << "    - " << v << "\n";
  if (!violations.empty()) return 1;
  const MomentSystem sys = build_moment_system(m);
  const StabilityCheck sc = check_stability_sufficient(m);
  out << "  kappa = " << fix(sys.kappa, 4) << " (must be < 1): "
      << (sys.kappa < 1.0 ? "PASS" : "FAIL") << "\n";
  for (int k = 1; k < 4; ++k) {
    const auto& ev = sys.block_spectra[k];
    out << "  min Re eig A" << k + 1 << k + 1 << " = " << fix(ev(0).real(), 4)
        << ": " << (ev(0).real() > 0.0 ? "PASS" : "FAIL") << "\n";
  }
  out << "  sufficient condition (Gamma >= 0, kappa_tilde = "
      << fix(sc.kappa_tilde, 4) << " < 2/3): " << (sc.passes ? "PASS" : "FAIL")
      << "\n";
  out << "  weakly stationary: " << (sys.stable ? "PASS" : "FAIL") << "\n";
  return sys.stable ? 0 : 1;
}

int cmd_diagnostics(const Options& o, std::ostream& out, std::ostream&) {
  if (o.models.empty()) throw UsageError("at least one --model is required");
  const bool csv = o.format == "csv";
  int status = 0;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> head = {"model", "2l-g", "mu2", "mu3", "mu4", "kappa",
                                   "kappa_tilde", "y_min", "sigma_min",
                                   "sigma_inf", "kurt_inf"};
  if (o.spectrum) head.push_back("eig_A22");
  for (const auto& path : o.models) {
    std::vector<std::string> row;
    ModelParams m;
    try {
      m = load_model(path);
      const Diagnostics d = diagnostics(m);
      auto num = [&](double v, int digits) {
        return csv ? format_number(v) : fix(v, digits);
      };
      auto vol = [&](double v) { return csv ? format_number(v) : pct(v); };
      std::string ymin;
      for (Index i = 0; i < d.y_min.size(); ++i) {
        ymin += (i ? ";" : "") + num(d.y_min(i) == 0.0 ? 0.0 : d.y_min(i), 4);
      }
      const std::string two_l_g =
          m.dim() == 1 ? num(2 * m.lambda(0, 0) - m.gamma(0, 0), 2) : "";
      row = {m.label,        two_l_g,           num(d.mu2, 2),
             num(d.mu3, 2),  num(d.mu4, 2),     num(d.kappa, 2),
             num(d.kappa_tilde, 2), ymin,        vol(d.sigma_min),
             vol(d.sigma_infty), num(d.kurt_infty, 2)};
      if (o.spectrum) {
        const MomentSystem sys = build_moment_system(m);
        std::string s;
        const auto& ev = sys.block_spectra[1];
        for (Index i = 0; i < ev.size(); ++i) {
          if (ev(i).imag() < -0.005) continue;  // conjugate printed once
          s += (s.empty() ? "" : ";") + complex_str(ev(i));
        }
        row.push_back(s);
      }
    } catch (const ModelError& e) {
      row = {m.label.empty() ? path : m.label, std::string("error: ") + e.what()};
      status = 1;
    }
    rows.push_back(row);
  }
  if (csv) {
    CsvWriter w(out, o.models.size() == 1 ? model_hash(load_model(o.models[0]))
                                          : std::string("multiple"),
                0, false);
    w.header(head);
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
      out << "\n";
    }
    return status;
  }
  std::vector<std::size_t> width(head.size());
  for (std::size_t i = 0; i < head.size(); ++i) width[i] = head[i].size();
  for (const auto& r : rows) {
    if (r.size() != head.size()) continue;
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  }
  auto line = [&](const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      out << (i ? "  " : "") << std::setw(static_cast<int>(width[i])) << r[i];
    }
    out << "\n";
  };
  line(head);
  for (const auto& r : rows) {
    if (r.size() == head.size()) {
      line(r);
    } else {
      out << r[0] << "  " << r[1] << "\n";
    }
  }
  return status;
}

int cmd_curves(const Options& o, std::ostream& out, std::ostream& err) {
  const ModelParams m = single_model(o);
  require_valid(m);
  const MomentSystem sys = build_moment_system(m);
  stationary_summary(sys, m);
  const auto grid = parse_grid(o.grid.empty() ? "0.001:5:200" : o.grid, true);
  const auto y0s = initial_offsets(o, m.dim());
  Sink sink(o.out, out);
  CsvWriter w(sink.get(), model_hash(m), 0, false);
  std::vector<std::string> head{"T"};
  const std::vector<std::string> names =
      o.y0s.empty() ? std::vector<std::string>{"0"} : o.y0s;
  for (const auto& n : names) head.push_back("fwd_vol[y0=" + y0_label(n) + "]");
  head.push_back("fwd_vol_y0_zero");
  head.push_back("fwd_vol_min");
  w.header(head);
  std::vector<EtaState> etas;
  for (const auto& y : y0s) etas.push_back(EtaState::from_y(y));
  for (double t : grid) {
    std::vector<double> row{t};
    const Vector ps = psi(sys, t);
    for (const auto& e : etas) {
      const double v = sys.sigma2_infty + ps.dot(e.stacked() - sys.eta_infty);
      row.push_back(std::sqrt(std::max(v, 0.0)));
    }
    try {
      const ForwardEnvelope env = forward_min_envelope(sys, t);
      row.push_back(std::sqrt(std::max(env.v0, 0.0)));
      row.push_back(std::sqrt(std::max(env.v_min, 0.0)));
    } catch (const NonConvexSlice& e) {
      err << "warning: " << e.what() << "\n";
      row.push_back(std::sqrt(std::max(sys.sigma2_infty - ps.dot(sys.eta_infty), 0.0)));
      row.push_back(std::nan(""));
    }
    w.row(row);
  }
  return 0;
}

int cmd_pca(const Options& o, std::ostream& out, std::ostream&) {
  const ModelParams m = single_model(o);
  require_valid(m);
  const MomentSystem sys = build_moment_system(m);
  stationary_summary(sys, m);
  const PcaDecomposition dec = pca(sys, omega(sys));
  const auto grid = parse_grid(o.grid.empty() ? "0.001:5:200" : o.grid, true);
  const CurveTable tab = pca_curves_table(dec, grid);
  Sink sink(o.out, out);
  {
    CsvWriter w(sink.get(), model_hash(m), 0, false);
    w.header(tab.header);
    for (const auto& r : tab.rows) w.row(r);
  }
  std::unique_ptr<std::ofstream> eig_file;
  std::ostream* eig = &sink.get();
  if (!o.out.empty()) {
    std::filesystem::path p(o.out);
    const auto eig_path =
        p.parent_path() / (p.stem().string() + "_eigenvalues" + p.extension().string());
    eig_file = std::make_unique<std::ofstream>(eig_path);
    if (!*eig_file) throw UsageError("cannot write '" + eig_path.string() + "'");
    eig = eig_file.get();
  } else {
    out << "\n";
  }
  CsvWriter w(*eig, model_hash(m), 0, false);
  w.header({"component", "variance", "share"});
  const double total = dec.eigenvalues.head(dec.rank).sum();
  for (int i = 0; i < dec.rank; ++i) {
    w.row({static_cast<double>(i + 1), dec.eigenvalues(i), dec.eigenvalues(i) / total});
  }
  return 0;
}

int cmd_density(const Options& o, std::ostream& out, std::ostream&) {
  const ModelParams m = single_model(o);
  require_valid(m);
  if (m.dim() != 1) throw UsageError("density requires a scalar model");
  const ScalarParams sp = ScalarParams::from_model(m);
  const PearsonIV pd(sp);
  const ScalarMoments mom = scalar_closed_moments(sp);
  std::vector<double> grid;
  if (o.grid.empty()) {
    const double half = 6.0 * std::sqrt(mom.q_inf);
    grid = parse_grid(fix(-half, 17) + ":" + fix(half, 17) + ":201", false);
  } else {
    grid = parse_grid(o.grid, false);
  }
  const bool reference = sp.beta == 0.0 && !pd.gaussian();
  Sink sink(o.out, out);
  CsvWriter w(sink.get(), model_hash(m), 0, false);
  std::vector<std::string> head{"y", "density", "cdf"};
  if (reference) head.push_back("student_t_density");
  w.header(head);
  for (double y : grid) {
    std::vector<double> row{y, pd.density(y), pd.cdf(y)};
    if (reference) {
      const double s = pd.t_scale();
      const double nu = pd.t_dof();
      const double z = y / s;
      const double logt = std::lgamma(0.5 * (nu + 1)) - std::lgamma(0.5 * nu) -
                          0.5 * std::log(nu * std::numbers::pi) -
                          0.5 * (nu + 1) * std::log1p(z * z / nu);
      row.push_back(std::exp(logt) / s);
    }
    w.row(row);
  }
  return 0;
}

std::vector<double> maturities(const Options& o) {
  return parse_grid(o.maturities.empty() ? "0.1,0.25,0.5,1,2" : o.maturities,
                    false);
}

int cmd_smile(const Options& o, std::ostream& out, std::ostream&) {
  const ModelParams m = single_model(o);
  require_valid(m);
  const auto y0s = initial_offsets(o, m.dim());
  OptionGrid grid;
  grid.maturities = maturities(o);
  grid.moneyness = parse_grid(o.grid.empty() ? "-0.5:0.5:21" : o.grid, false);
  grid.kind = o.normalized ? Moneyness::kNormalized : Moneyness::kPlain;
  Sink sink(o.out, out);
  CsvWriter w(sink.get(), model_hash(m), o.seed, true);
  w.header({"y0", "T", o.normalized ? "l_over_sqrt_T" : "l", "strike", "price",
            "se", "ivol", "ivol_se"});
  const McConfig cfg = mc_config(o);
  for (std::size_t k = 0; k < y0s.size(); ++k) {
    const SmileSurface s = price_options(m, y0s[k], grid, cfg);
    const std::string lab = o.y0s.empty() ? "0" : y0_label(o.y0s[k]);
    for (const auto& n : s.nodes) {
      const bool ok = n.iv.status == IvStatus::kOk;
      w.row({lab}, {n.maturity, n.moneyness, n.strike, n.call, n.call_se,
                    ok ? n.iv.vol : std::nan(""), ok ? n.iv_se : std::nan("")});
    }
  }
  return 0;
}

int cmd_atm(const Options& o, std::ostream& out, std::ostream&) {
  const ModelParams m = single_model(o);
  require_valid(m);
  const auto y0s = initial_offsets(o, m.dim());
  const OptionGrid grid = atm_grid(maturities(o), o.eps);
  Sink sink(o.out, out);
  CsvWriter w(sink.get(), model_hash(m), o.seed, true);
  w.header({"y0", "T", "atm_vol", "atm_vol_se", "atm_skew", "atm_skew_se"});
  const McConfig cfg = mc_config(o);
  for (std::size_t k = 0; k < y0s.size(); ++k) {
    const SmileSurface s = price_options(m, y0s[k], grid, cfg);
    const std::string lab = o.y0s.empty() ? "0" : y0_label(o.y0s[k]);
    for (const auto& pt : atm_term_structures(s, o.eps)) {
      w.row({lab}, {pt.maturity, pt.atm_vol, pt.atm_vol_se, pt.atm_skew,
                    pt.atm_skew_se});
    }
  }
  return 0;
}

int cmd_simulate(const Options& o, std::ostream& out, std::ostream& err) {
  const ModelParams m = single_model(o);
  require_valid(m);
  McConfig cfg = mc_config(o);
  cfg.probe_times = maturities(o);
  if (o.stationary) {
    build_moment_system(m);
    cfg.init = InitKind::kBurnIn;
  } else {
    const auto y0s = initial_offsets(o, m.dim());
    if (y0s.size() != 1) throw UsageError("simulate takes a single --y0");
    cfg.y0 = y0s[0];
  }
  const PathBatch b = simulate(m, cfg);
  Sink sink(o.out, out);
  CsvWriter w(sink.get(), model_hash(m), o.seed, true);
  std::vector<std::string> head{"t", "mean_exp_x", "se_exp_x", "mean_sigma2",
                                "se_sigma2"};
  for (int i = 0; i < b.p; ++i) {
    head.push_back("mean_y" + std::to_string(i + 1));
    head.push_back("se_y" + std::to_string(i + 1));
  }
  w.header(head);
  std::vector<double> col(b.n_paths);
  for (std::size_t k = 0; k < b.times.size(); ++k) {
    std::vector<double> row{b.times[k]};
    for (std::size_t i = 0; i < b.n_paths; ++i) col[i] = std::exp(b.x[k][i]);
    Estimate e = grouped_mean(col, b.group_size());
    row.insert(row.end(), {e.value, e.se});
    e = grouped_mean(b.sigma2[k], b.group_size());
    row.insert(row.end(), {e.value, e.se});
    for (int j = 0; j < b.p; ++j) {
      for (std::size_t i = 0; i < b.n_paths; ++i) col[i] = b.y[k](j, i);
      e = grouped_mean(col, b.group_size());
      row.insert(row.end(), {e.value, e.se});
    }
    w.row(row);
  }
  if (b.floored_steps > 0) {
    err << "warning: variance floored at zero on " << b.floored_steps
        << " steps\n";
  }
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Quadratic Hobson-Rogers model toolkit", "qhr"};
  app.set_version_flag("--version", std::string(version_string()));
  app.require_subcommand(1);
  Options o;

  auto add_model = [&](CLI::App* c, bool many) {
    auto* opt = c->add_option("--model", o.models, "model JSON file")->required();
    if (!many) opt->expected(1);
  };
  auto add_out = [&](CLI::App* c) {
    c->add_option("--out", o.out, "output file (default stdout)");
  };
  auto add_mc = [&](CLI::App* c) {
    c->add_option("--seed", o.seed, "random seed");
    c->add_option("--paths", o.paths, "number of paths")->check(CLI::PositiveNumber);
    c->add_option("--steps-per-year", o.steps_per_year, "Euler steps per year")
        ->check(CLI::PositiveNumber);
  };
  auto add_y0 = [&](CLI::App* c) {
    c->add_option("--y0", o.y0s,
                  "initial offset, comma-separated for p > 1 (repeatable)")
        ->allow_extra_args(false);
  };

  std::map<std::string, std::function<int(const Options&, std::ostream&, std::ostream&)>> cmds;
  auto* v = app.add_subcommand("validate", "check model assumptions");
  add_model(v, false);
  cmds["validate"] = cmd_validate;

  auto* d = app.add_subcommand("diagnostics", "stationary diagnostics table");
  add_model(d, true);
  d->add_option("--format", o.format, "table or csv")
      ->check(CLI::IsMember({"table", "csv"}));
  d->add_flag("--spectrum", o.spectrum, "list eigenvalues of the second-order block");
  cmds["diagnostics"] = cmd_diagnostics;

  auto* c = app.add_subcommand("curves", "forward volatility curves");
  add_model(c, false);
  add_out(c);
  add_y0(c);
  c->add_option("--grid", o.grid, "maturities, 'start:stop:count' (geometric) or list");
  cmds["curves"] = cmd_curves;

  auto* pc = app.add_subcommand("pca", "principal components of the forward curve");
  add_model(pc, false);
  add_out(pc);
  pc->add_option("--grid", o.grid, "maturities, 'start:stop:count' (geometric) or list");
  cmds["pca"] = cmd_pca;

  auto* de = app.add_subcommand("density", "stationary density of a scalar model");
  add_model(de, false);
  add_out(de);
  de->add_option("--grid", o.grid, "offsets, 'start:stop:count' or list");
  cmds["density"] = cmd_density;

  auto* sm = app.add_subcommand("smile", "Monte Carlo implied volatility smiles");
  add_model(sm, false);
  add_out(sm);
  add_mc(sm);
  add_y0(sm);
  sm->add_option("--grid", o.grid, "log-moneyness, 'start:stop:count' or list");
  sm->add_option("--maturities", o.maturities, "maturities, list or 'start:stop:count'");
  sm->add_flag("--normalized", o.normalized, "grid is log-moneyness / sqrt(T)");
  cmds["smile"] = cmd_smile;

  auto* at = app.add_subcommand("atm", "ATM volatility and skew term structures");
  add_model(at, false);
  add_out(at);
  add_mc(at);
  add_y0(at);
  at->add_option("--maturities", o.maturities, "maturities, list or 'start:stop:count'");
  at->add_option("--eps", o.eps, "log-moneyness step")->check(CLI::PositiveNumber);
  cmds["atm"] = cmd_atm;

  auto* si = app.add_subcommand("simulate", "Monte Carlo path statistics");
  add_model(si, false);
  add_out(si);
  add_mc(si);
  add_y0(si);
  si->add_option("--maturities", o.maturities, "probe times");
  si->add_flag("--stationary", o.stationary, "start from a burn-in instead of y0");
  cmds["simulate"] = cmd_simulate;

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }
  const std::string name = app.get_subcommands().front()->get_name();
  try {
    return cmds.at(name)(o, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigInvalid& e) {
    err << "invalid configuration: " << e.what() << "\n";
    return 2;
  } catch (const MissingNodes& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const ModelError& e) {
    err << "model error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace qhr
