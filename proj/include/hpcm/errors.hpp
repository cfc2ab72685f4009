// Copyright 2026 The hpcm Authors.
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

namespace hpcm {

// Error taxonomy. The CLI maps these to stable exit codes:
// ConfigError/ShapeError/DomainError -> 1, stream errors -> 2, IoError -> 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Non-finite or otherwise out-of-domain numeric input.
class DomainError : public Error {
 public:
  using Error::Error;
};

// API misuse (double finalize, step index past the schedule, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

// Payload cannot be decoded: truncated segment, bad magic, garbage bytes.
class CorruptBitstreamError : public Error {
 public:
  using Error::Error;
};

// Well-formed stream that does not match the decoder configuration.
class IncompatibleBitstreamError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace hpcm
