// Copyright 2026 The rgcnn Authors
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

#ifndef RGCNN_ERRORS_HPP_
#define RGCNN_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rgcnn {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A documented precondition was violated by the caller.
class ContractError : public Error {
 public:
  using Error::Error;
};

// Operand shapes are incompatible.
class ShapeError : public ContractError {
 public:
  using ContractError::ContractError;
};

// Input geometry cannot be processed (e.g. all points coincident).
class DegenerateInputError : public ContractError {
 public:
  using ContractError::ContractError;
};

// Non-finite values, non-convergence and similar numerical failures.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Filesystem failures.
class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed text input. Carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// A file with no data lines.
class EmptyInputError : public ParseError {
 public:
  using ParseError::ParseError;
};

// Binary checkpoint is not a checkpoint (bad magic) or is cut short.
class FormatError : public Error {
 public:
  using Error::Error;
};

class TruncatedFileError : public FormatError {
 public:
  using FormatError::FormatError;
};

class VersionError : public FormatError {
 public:
  using FormatError::FormatError;
};

}  // namespace rgcnn

#endif  // RGCNN_ERRORS_HPP_
