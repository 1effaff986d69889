// snrd/errors.hpp

// Copyright 2026   snrd authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef SNRD_ERRORS_HPP_
#define SNRD_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace snrd {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor extents do not satisfy an op's contract.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Misuse of the autograd tape (second backward, non-scalar loss, ...).
class GraphError : public Error {
 public:
  using Error::Error;
};

/// Invalid user configuration. The CLI maps this to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed or unsupported input file. The CLI maps this to exit code 3.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf during training, or an input with no usable energy.
class NumericError : public Error {
 public:
  using Error::Error;
};

class DegenerateInputError : public NumericError {
 public:
  using NumericError::NumericError;
};

class CheckpointError : public FormatError {
 public:
  enum class Kind { kIo, kBadMagic, kVersion, kChecksum, kShape, kTruncated };
  CheckpointError(Kind kind, const std::string &what)
      : FormatError(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

}  // namespace snrd

#endif  // SNRD_ERRORS_HPP_
