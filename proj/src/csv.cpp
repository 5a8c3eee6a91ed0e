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

#include "qhr/csv.hpp"

#include <cmath>
#include <cstdio>

#ifndef QHR_VERSION
#define QHR_VERSION "0.0.0"
#endif

namespace qhr {

const char* version_string() { return QHR_VERSION; }

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(std::ostream& out, const std::string& model_hash,
                     std::uint64_t seed, bool has_seed)
    : out_(out) {
  out_ << "# qhr " << version_string() << " model=" << model_hash;
  if (has_seed) out_ << " seed=" << seed;
  out_ << "\n";
}

void CsvWriter::header(const std::vector<std::string>& cols) {
  for (std::size_t i = 0; i < cols.size(); ++i) {
    out_ << (i ? "," : "") << cols[i];
  }
  out_ << "\n";
}

void CsvWriter::row(const std::vector<double>& values) { row({}, values); }

void CsvWriter::row(const std::vector<std::string>& text,
                    const std::vector<double>& values) {
  bool first = true;
  for (const auto& t : text) {
    out_ << (first ? "" : ",") << t;
    first = false;
  }
  for (double v : values) {
    out_ << (first ? "" : ",") << format_number(v);
    first = false;
  }
  out_ << "\n";
}

}  // namespace qhr
