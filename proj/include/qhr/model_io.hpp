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

#include <string>

#include "qhr/model.hpp"

namespace qhr {

// Model documents are JSON objects with keys
//   lambda  number or row-major nested array
//   b       number or array
//   w       optional array (rank-one weights)
//   alpha   number
//   beta    number or array      | beta0  number (needs w)
//   gamma   number or matrix     | gamma0 number (needs w)
//   label   optional string
// Throws ParseError on malformed input.
ModelParams model_from_json(const std::string& text);
ModelParams load_model(const std::string& path);

std::string model_to_json(const ModelParams& params);
void save_model(const ModelParams& params, const std::string& path);

// FNV-1a hash of the canonical JSON form, as 16 hex digits.
std::string model_hash(const ModelParams& params);

}  // namespace qhr
