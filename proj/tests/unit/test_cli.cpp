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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "qhr/cli.hpp"
#include "qhr/csv.hpp"
#include "qhr/model_io.hpp"

using namespace qhr;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "qhr");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string model_path(const std::string& name) {
  return std::string(QHR_MODEL_DIR) + "/" + name + ".json";
}

class ThreadsEnv {
 public:
  explicit ThreadsEnv(const char* n) { setenv("QHR_THREADS", n, 1); }
  ~ThreadsEnv() { unsetenv("QHR_THREADS"); }
};

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  for (std::string l; std::getline(is, l);) out.push_back(l);
  return out;
}

std::vector<std::string> cells(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  for (std::string c; std::getline(is, c, ',');) out.push_back(c);
  return out;
}

// Text cells must match exactly, numbers to a relative tolerance that
// absorbs libm differences between platforms.
void check_golden(const std::string& name, const std::string& text) {
  const std::filesystem::path path = std::filesystem::path(QHR_GOLDEN_DIR) / name;
  if (std::getenv("QHR_UPDATE_GOLDEN")) {
    std::ofstream(path) << text;
    return;
  }
  std::ifstream in(path);
  REQUIRE_MESSAGE(in.good(), "missing golden file " << path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const auto want = lines(ss.str()), got = lines(text);
  REQUIRE(want.size() == got.size());
  for (std::size_t i = 0; i < want.size(); ++i) {
    if (want[i].starts_with("#") || i == 1 || want[i].empty()) {
      CHECK(want[i] == got[i]);
      continue;
    }
    const auto a = cells(want[i]), b = cells(got[i]);
    REQUIRE(a.size() == b.size());
    for (std::size_t j = 0; j < a.size(); ++j) {
      char* end_a = nullptr;
      char* end_b = nullptr;
      const double x = std::strtod(a[j].c_str(), &end_a);
      const double y = std::strtod(b[j].c_str(), &end_b);
      if (*end_a != '\0' || a[j].empty() || a[j] == "nan") {
        CHECK(a[j] == b[j]);
      } else {
        CAPTURE(i);
        CAPTURE(j);
        REQUIRE(*end_b == '\0');
        CHECK(std::abs(x - y) <= 1e-9 * std::max(std::abs(x), 1e-12));
      }
    }
  }
}

}  // namespace

TEST_CASE("exit codes") {
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"validate"}).code == 2);
  CHECK(run({"validate", "--model", "/nonexistent.json"}).code == 2);
  CHECK(run({"validate", "--model", model_path("mm4")}).code == 0);
  CHECK(run({"--version"}).code == 0);
  CHECK(run({"smile", "--model", model_path("m1"), "--grid", ","}).code == 2);
  CHECK(run({"atm", "--model", model_path("m1"), "--maturities", ","}).code == 2);
  CHECK(run({"smile", "--model", model_path("m1"), "--y0", "0,0"}).code == 2);
  CHECK(run({"density", "--model", model_path("mm1")}).code == 2);
}

TEST_CASE("non-stationary and invalid models exit with status one") {
  const auto dir = std::filesystem::temp_directory_path();
  const auto unstable = (dir / "qhr_cli_unstable.json").string();
  std::ofstream(unstable) << R"({"lambda": 1, "b": 1, "alpha": 0.01, "beta": 0, "gamma": 0.7})";
  const Result r = run({"validate", "--model", unstable});
  CHECK(r.code == 1);
  CHECK(r.out.find("weakly stationary: FAIL") != std::string::npos);
  CHECK(run({"curves", "--model", unstable}).code == 1);

  const auto invalid = (dir / "qhr_cli_invalid.json").string();
  std::ofstream(invalid) << R"({"lambda": 1, "b": 1, "alpha": 0, "beta": 0, "gamma": 0.1})";
  const Result v = run({"validate", "--model", invalid});
  CHECK(v.code == 1);
  CHECK(v.out.find("alpha must be positive") != std::string::npos);

  const auto broken = (dir / "qhr_cli_broken.json").string();
  std::ofstream(broken) << R"({"lambda": [1, 2, )";
  CHECK(run({"validate", "--model", broken}).code == 2);
  std::filesystem::remove(unstable);
  std::filesystem::remove(invalid);
  std::filesystem::remove(broken);
}

TEST_CASE("validate reports every check") {
  const Result r = run({"validate", "--model", model_path("mm4")});
  REQUIRE(r.code == 0);
  for (const char* key : {"admissible parameters: PASS", "kappa =", "min Re eig A22",
                          "min Re eig A44", "weakly stationary: PASS"}) {
    CHECK(r.out.find(key) != std::string::npos);
  }
}

TEST_CASE("diagnostics table lists the scalar models") {
  const Result r = run({"diagnostics", "--model", model_path("m1"), "--model",
                        model_path("m4"), "--spectrum"});
  REQUIRE(r.code == 0);
  const auto ls = lines(r.out);
  REQUIRE(ls.size() == 3);
  CHECK(ls[0].find("kurt_inf") != std::string::npos);
  CHECK(ls[1].find("3.00") != std::string::npos);
  CHECK(ls[2].find("32.29") != std::string::npos);
  CHECK(ls[2].find("8.20") != std::string::npos);
}

TEST_CASE("CSV output starts with a provenance line") {
  const ModelParams m = oracle::fixture("m3");
  const Result r = run({"curves", "--model", model_path("m3"), "--grid", "0.1,1"});
  REQUIRE(r.code == 0);
  const auto ls = lines(r.out);
  CHECK(ls[0] == std::string("# qhr ") + version_string() + " model=" + model_hash(m));
  const Result s = run({"simulate", "--model", model_path("m3"), "--paths", "10",
                        "--seed", "42", "--maturities", "0.1"});
  REQUIRE(s.code == 0);
  CHECK(lines(s.out)[0] ==
        std::string("# qhr ") + version_string() + " model=" + model_hash(m) + " seed=42");
}

TEST_CASE("--out writes to a file") {
  const auto path = (std::filesystem::temp_directory_path() / "qhr_cli_pca.csv").string();
  const Result r = run({"pca", "--model", model_path("mm1"), "--grid", "0.01:2:5", "--out", path});
  REQUIRE(r.code == 0);
  CHECK(r.out.empty());
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(lines(ss.str()).size() == 7);
  const auto eig = std::filesystem::temp_directory_path() / "qhr_cli_pca_eigenvalues.csv";
  CHECK(std::filesystem::exists(eig));
  std::filesystem::remove(path);
  std::filesystem::remove(eig);
}

TEST_CASE("model JSON round trip") {
  for (const std::string name : {"m3", "mm2", "mm4", "mm5_jordan"}) {
    CAPTURE(name);
    const ModelParams m = oracle::fixture(name);
    const ModelParams back = model_from_json(model_to_json(m));
    CHECK(back.lambda == m.lambda);
    CHECK(back.b == m.b);
    CHECK(back.alpha == m.alpha);
    CHECK(back.beta == m.beta);
    CHECK(back.gamma == m.gamma);
    CHECK(model_hash(back) == model_hash(m));
  }
}

TEST_CASE("golden outputs") {
  const std::vector<std::pair<std::string, std::vector<std::string>>> cases{
      {"diagnostics_scalar.csv",
       {"diagnostics", "--format", "csv", "--model", model_path("m1"), "--model",
        model_path("m2"), "--model", model_path("m3"), "--model", model_path("m4")}},
      {"curves_mm3.csv",
       {"curves", "--model", model_path("mm3"), "--grid", "0.01:5:12", "--y0", "0,0",
        "--y0", "0.03,0.01"}},
      {"pca_mm5.csv", {"pca", "--model", model_path("mm5"), "--grid", "0.01:5:12"}},
      {"density_m2.csv", {"density", "--model", model_path("m2"), "--grid", "-0.3:0.3:13"}},
      {"smile_m3.csv",
       {"smile", "--model", model_path("m3"), "--paths", "2000", "--seed", "7",
        "--maturities", "0.25,1", "--grid", "-0.2:0.2:5", "--y0", "-0.1", "--y0", "0.1"}},
      {"atm_mm3.csv",
       {"atm", "--model", model_path("mm3"), "--paths", "2000", "--seed", "7",
        "--maturities", "0.1,0.5,1"}},
      {"simulate_mm5.csv",
       {"simulate", "--model", model_path("mm5"), "--paths", "1000", "--seed", "3",
        "--maturities", "0.5,1", "--y0", "0.02,-0.01"}},
  };
  for (const auto& [file, args] : cases) {
    CAPTURE(file);
    const Result one = [&] {
      ThreadsEnv env("1");
      return run(args);
    }();
    const Result three = [&] {
      ThreadsEnv env("3");
      return run(args);
    }();
    REQUIRE(one.code == 0);
    CHECK(one.out == three.out);
    check_golden(file, one.out);
  }
}
