// dsu/errors.hpp

// Copyright 2026  The DSU Toolkit Authors

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

#pragma once

#include <stdexcept>
#include <string>

namespace dsu {

/// Base class for all toolkit errors. Subcommands map these to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unrecognized magic, version, or otherwise malformed file structure.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Structurally valid file whose contents violate a declared invariant
/// (shape/payload mismatch, out-of-range decoded value).
class CorruptError : public Error {
 public:
  using Error::Error;
};

/// Argument or data value outside an operation's domain.
class ValueError : public Error {
 public:
  using Error::Error;
};

/// Invalid or inconsistent configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Underlying read/write failure.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Sequence presented at the wrong pipeline stage.
class StageError : public Error {
 public:
  using Error::Error;
};

}  // namespace dsu
