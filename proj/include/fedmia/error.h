// Copyright 2026 The fedmia Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FEDMIA_ERROR_H_
#define FEDMIA_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace fedmia {

enum class ErrorKind {
  kInputShape,   // tensor shape does not match what a layer expects
  kNumeric,      // non-finite value produced or consumed
  kState,        // call order violated (e.g. backward without forward)
  kSpec,         // invalid network specification
  kParse,        // malformed input file
  kValidation,   // well-formed but out-of-range value
  kCapacity,     // not enough samples to satisfy a request
  kFormat,       // corrupt or truncated binary container
  kConfig,       // experiment configuration rejected
  kCapability,   // adversary lacks the knowledge an operation needs
  kDependency,   // an upstream pipeline artifact is missing
  kIo,           // filesystem failure
};

std::string_view ToString(ErrorKind kind);

// All library failures are reported as fedmia::Error. The kind drives the
// CLI exit code; the message is meant for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void Fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline void Require(bool condition, ErrorKind kind,
                    const std::string& message) {
  if (!condition) throw Error(kind, message);
}

}  // namespace fedmia

#endif  // FEDMIA_ERROR_H_
