// Copyright 2026 The dxr Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <stdexcept>
#include <string>

namespace dxr {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller passed an argument outside the documented domain.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Reading or writing a file failed.
class IoError : public Error {
 public:
  using Error::Error;
};

/// A file was readable but its contents do not follow the expected format.
/// `kind()` distinguishes the failure mode for callers that care.
class FormatError : public Error {
 public:
  enum class Kind { kMalformedHeader, kUnsupported, kTruncated, kVersion, kCorrupt, kMissing };

  FormatError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// A tensor operation received incompatible shapes.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// NaN or Inf showed up in an activation, a loss, or a parameter.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

/// An object was used out of order, e.g. backward() with a forward cache
/// that is missing or was produced before the parameters changed.
class StateError : public Error {
 public:
  using Error::Error;
};

}  // namespace dxr
