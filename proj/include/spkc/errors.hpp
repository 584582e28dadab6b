// Copyright 2026 The SpikCommander Engine Authors
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

namespace spkc {

// Shape or axis mismatch between operands.
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Invalid configuration value or combination of values.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// API misuse (e.g. backward on a non-scalar node, reused tape).
struct ContractError : std::logic_error {
  using std::logic_error::logic_error;
};

// Malformed on-disk data (bad magic, bad version, checksum mismatch).
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Missing or truncated file.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad user-provided input value (label out of range, ...).
struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// NaN/Inf encountered during training.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace spkc
