// Copyright 2026 The tovd authors
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

#ifndef TOVD_ERRORS_HPP
#define TOVD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace tovd {

// Error taxonomy maps 1:1 onto CLI exit codes (see cli.cpp):
//   InputError -> 2, TrainingError -> 3, ContractError -> 4,
//   VerificationError -> 5.

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InputError : Error {
  using Error::Error;
};

struct SchemaError : InputError {
  using InputError::InputError;
};

struct LabelError : InputError {
  using InputError::InputError;
};

struct EmptyDatasetError : InputError {
  using InputError::InputError;
};

struct TrainingError : Error {
  using Error::Error;
};

struct ContractError : Error {
  using Error::Error;
};

struct VerificationError : Error {
  using Error::Error;
};

}  // namespace tovd

#endif  // TOVD_ERRORS_HPP
