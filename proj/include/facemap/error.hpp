// Copyright 2026 The FaceMap Authors.
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

#ifndef FACEMAP_ERROR_HPP_
#define FACEMAP_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace facemap {

// Failure classes map one-to-one onto the CLI exit codes.
enum class ErrorKind {
  kUsage = 1,      // bad arguments, violated preconditions
  kData = 2,       // malformed or inconsistent input files
  kNumerical = 3,  // solver failed to converge
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error UsageError(const std::string& what) {
  return Error(ErrorKind::kUsage, what);
}
inline Error DataError(const std::string& what) {
  return Error(ErrorKind::kData, what);
}
inline Error NumericalError(const std::string& what) {
  return Error(ErrorKind::kNumerical, what);
}

}  // namespace facemap

#endif  // FACEMAP_ERROR_HPP_
