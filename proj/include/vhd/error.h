// Copyright 2026 The vhd Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef VHD_ERROR_H_
#define VHD_ERROR_H_

#include <stdexcept>
#include <string>

namespace vhd {

// Base class for every error raised by the toolkit. Callers that only need
// to distinguish "bad input" from "numerical failure" can catch the two
// intermediate classes below.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shapes that do not line up.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Values outside an operation's documented domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Inconsistent or unknown configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf produced during training or a gradient check.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Failures while reading one of the binary or text formats. The kind lets
// callers and tests tell the failure modes apart without parsing messages.
class FormatError : public Error {
 public:
  enum class Kind {
    kIo,
    kBadMagic,
    kBadVersion,
    kTruncated,
    kDimensionOverflow,
    kShapeMismatch,
    kMalformed,
  };

  FormatError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

}  // namespace vhd

#endif  // VHD_ERROR_H_
