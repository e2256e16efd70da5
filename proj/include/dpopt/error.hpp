// Copyright 2026 The dp-optim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DPOPT_ERROR_HPP_
#define DPOPT_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace dpopt {

// Bad user-supplied configuration (ranges, unknown keys, illegal combos).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Incompatible tensor shapes between model and data.
class ShapeError : public std::runtime_error {
 public:
  explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite or otherwise invalid numeric input.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// Mathematical precondition violated (e.g. RDP order <= 1).
class DomainError : public std::runtime_error {
 public:
  explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

// A privacy target that cannot be met by any parameter in range.
class InfeasibleError : public std::runtime_error {
 public:
  explicit InfeasibleError(const std::string& msg) : std::runtime_error(msg) {}
};

// Training run aborted (NaN loss); diagnostics were dumped before throwing.
class RunAborted : public std::runtime_error {
 public:
  explicit RunAborted(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace dpopt

#endif  // DPOPT_ERROR_HPP_
