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

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace qhr {

const char* version_string();

// Comma-separated table with a leading '#' provenance comment. Numbers are
// written with 17 significant digits.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, const std::string& model_hash,
            std::uint64_t seed, bool has_seed);

  void header(const std::vector<std::string>& cols);
  void row(const std::vector<double>& values);
  // Leading text cells followed by numbers.
  void row(const std::vector<std::string>& text, const std::vector<double>& values);

 private:
  std::ostream& out_;
};

std::string format_number(double v);

}  // namespace qhr
