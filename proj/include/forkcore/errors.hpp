// Copyright 2026 The forkcore Authors
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

namespace forkcore {

/// Base class for all forkcore errors.
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid inputs: malformed orders, bad profiles, wrong arity, out-of-range ids.
struct validation_error : error {
  using error::error;
};

/// An elicitation oracle answered outside the legal range for a query.
struct protocol_error : validation_error {
  using validation_error::validation_error;
};

/// An enumeration or search would exceed its configured size cap.
struct cap_error : error {
  using error::error;
};

/// A self-check failed; indicates a bug in this library, not in the input.
struct internal_error : error {
  using error::error;
};

}  // namespace forkcore
