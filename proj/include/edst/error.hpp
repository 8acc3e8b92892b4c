// Copyright 2026 The EDST Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef EDST_ERROR_HPP_
#define EDST_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace edst {

// Base of every error the library raises. The CLI maps the subclasses onto
// exit codes, so keep the hierarchy flat.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file (bad JSON, wrong schema, inconsistent dimensions).
class FormatError : public Error {
 public:
  using Error::Error;
};

// Well-formed input that names slots or values outside the ontology.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Input lacks what an operation needs (e.g. gold labels for evaluation).
class DataError : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

// A StateAssignment that violates the slot/value labelling constraint.
class InconsistentAssignment : public Error {
 public:
  using Error::Error;
};

class SamplingError : public Error {
 public:
  using Error::Error;
};

}  // namespace edst

#endif  // EDST_ERROR_HPP_
