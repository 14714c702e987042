// Copyright 2026 The ctn Authors. All Rights Reserved.
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

#ifndef CTN_ERRORS_H_
#define CTN_ERRORS_H_

#include <stdexcept>
#include <string>

namespace ctn {

// Base class for every error raised by the library. The CLI maps the
// subclasses onto its exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor shapes or operation arguments do not fit together.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Invalid model, training or run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Unreadable, malformed or inconsistent input data (audio, manifests,
// checkpoints).
class DataError : public Error {
 public:
  using Error::Error;
};

// A NaN or infinity appeared where finite values are required.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Operation called in a state that does not allow it (reused tape, push
// after flush, ...).
class StateError : public Error {
 public:
  using Error::Error;
};

}  // namespace ctn

#endif  // CTN_ERRORS_H_
