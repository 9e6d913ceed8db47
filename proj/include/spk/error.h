// Copyright (c) 2026 speakerkit Authors. All Rights Reserved.
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

namespace spk {

// Base of every error raised by the toolkit. The CLI maps UsageError to exit
// code 1 and everything else to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad arguments or configuration supplied by the caller.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Filesystem failures: missing files, unwritable outputs, short reads.
class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed on-disk data (tar, WAV, RTTM, WSTN, text tables).
class FormatError : public Error {
 public:
  using Error::Error;
};

// Data that is well formed but numerically unusable.
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace spk
