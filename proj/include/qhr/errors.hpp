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

#include <stdexcept>
#include <string>

namespace qhr {

// Every failure raised by the engine derives from Error. The CLI maps
// ModelError to exit code 1 and everything else (usage, parse) to 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The model itself is unusable for the requested computation.
class ModelError : public Error {
 public:
  using Error::Error;
};

class DimensionCap : public Error {
 public:
  using Error::Error;
};

class Overflow : public Error {
 public:
  using Error::Error;
};

class Unstable : public ModelError {
 public:
  using ModelError::ModelError;
};

class NoConvergence : public Error {
 public:
  using Error::Error;
};

class NotPsd : public Error {
 public:
  using Error::Error;
};

class InvalidModel : public ModelError {
 public:
  using ModelError::ModelError;
};

class RepeatedEigenvalueAcrossBlocks : public ModelError {
 public:
  using ModelError::ModelError;
};

class ComplexEigenvalues : public ModelError {
 public:
  using ModelError::ModelError;
};

class ConstraintViolation : public ModelError {
 public:
  using ModelError::ModelError;
};

class SingularTransform : public ModelError {
 public:
  using ModelError::ModelError;
};

class SingularA : public ModelError {
 public:
  using ModelError::ModelError;
};

class NotStationary : public ModelError {
 public:
  using ModelError::ModelError;
};

class WindowOrder : public Error {
 public:
  using Error::Error;
};

class NonConvexSlice : public ModelError {
 public:
  using ModelError::ModelError;
};

class ConfigInvalid : public Error {
 public:
  using Error::Error;
};

class MissingNodes : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace qhr
