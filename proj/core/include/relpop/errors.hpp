// core/include/relpop/errors.hpp

// Copyright 2026 The relpop Authors

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

#ifndef RELPOP_ERRORS_HPP_
#define RELPOP_ERRORS_HPP_

#include <stdexcept>
#include <string>
#include <utility>

namespace relpop {

/// Invalid inputs: malformed files, broken invariants, contract violations.
/// `path()` names the offending field for file-shaped inputs ("" otherwise).
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::string message)
      : std::runtime_error(std::move(message)) {}

  ValidationError(std::string path, const std::string& message)
      : std::runtime_error(path.empty() ? message : path + ": " + message),
        path_(std::move(path)) {}

  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

/// Numeric failure at run time (zero posterior mass, failed factorization).
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& message)
      : std::runtime_error(message) {}
};

}  // namespace relpop

#endif  // RELPOP_ERRORS_HPP_
