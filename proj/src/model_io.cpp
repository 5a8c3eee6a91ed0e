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

#include "qhr/model_io.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "qhr/errors.hpp"

namespace qhr {

using nlohmann::json;

namespace {

double number(const json& j, const char* key) {
  if (!j.is_number()) {
    throw ParseError(std::string("field '") + key + "' must be a number");
  }
  return j.get<double>();
}

Vector vector_field(const json& j, const char* key) {
  if (j.is_number()) return Vector::Constant(1, j.get<double>());
  if (!j.is_array()) {
    throw ParseError(std::string("field '") + key + "' must be an array");
  }
  Vector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(i) = number(j[i], key);
  return v;
}

Matrix matrix_field(const json& j, const char* key) {
  if (j.is_number()) return Matrix::Constant(1, 1, j.get<double>());
  if (!j.is_array() || j.empty()) {
    throw ParseError(std::string("field '") + key + "' must be a matrix");
  }
  const std::size_t rows = j.size();
  if (!j[0].is_array()) {
    throw ParseError(std::string("field '") + key +
                     "' must be a row-major nested array");
  }
  const std::size_t cols = j[0].size();
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols) {
      throw ParseError(std::string("field '") + key + "' has ragged rows");
    }
    for (std::size_t c = 0; c < cols; ++c) m(i, c) = number(j[i][c], key);
  }
  return m;
}

const json& require(const json& doc, const char* key) {
  if (!doc.contains(key)) {
    throw ParseError(std::string("missing field '") + key + "'");
  }
  return doc.at(key);
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(i, c));
    rows.push_back(row);
  }
  return rows;
}

json vector_json(const Vector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

}  // namespace

ModelParams model_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed model document: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("model document must be an object");
  ModelParams m;
  m.lambda = matrix_field(require(doc, "lambda"), "lambda");
  m.b = vector_field(require(doc, "b"), "b");
  m.alpha = number(require(doc, "alpha"), "alpha");
  if (doc.contains("label")) {
    if (!doc["label"].is_string()) throw ParseError("field 'label' must be a string");
    m.label = doc["label"].get<std::string>();
  }
  if (doc.contains("w")) m.w = vector_field(doc["w"], "w");
  const bool rank_one_form = doc.contains("beta0") || doc.contains("gamma0");
  if (rank_one_form) {
    if (doc.contains("beta") || doc.contains("gamma")) {
      throw ParseError("give either beta/gamma or beta0/gamma0, not both");
    }
    if (!m.w) throw ParseError("beta0/gamma0 require weights 'w'");
    const double beta0 = number(require(doc, "beta0"), "beta0");
    const double gamma0 = number(require(doc, "gamma0"), "gamma0");
    m.beta0 = beta0;
    m.gamma0 = gamma0;
    m.beta = beta0 * *m.w;
    m.gamma = gamma0 * *m.w * m.w->transpose();
  } else {
    m.beta = vector_field(require(doc, "beta"), "beta");
    m.gamma = matrix_field(require(doc, "gamma"), "gamma");
  }
  return m;
}

ModelParams load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open model file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  ModelParams m = model_from_json(ss.str());
  if (m.label.empty()) m.label = path;
  return m;
}

std::string model_to_json(const ModelParams& m) {
  json doc;
  doc["label"] = m.label;
  doc["lambda"] = matrix_json(m.lambda);
  doc["b"] = vector_json(m.b);
  doc["alpha"] = m.alpha;
  if (m.w) doc["w"] = vector_json(*m.w);
  if (m.beta0 && m.gamma0 && m.w) {
    doc["beta0"] = *m.beta0;
    doc["gamma0"] = *m.gamma0;
  } else {
    doc["beta"] = vector_json(m.beta);
    doc["gamma"] = matrix_json(m.gamma);
  }
  return doc.dump(2);
}

void save_model(const ModelParams& params, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write model file '" + path + "'");
  out << model_to_json(params) << "\n";
}

std::string model_hash(const ModelParams& params) {
  const std::string s = model_to_json(params);
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace qhr
