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

#include "fedmia/error.h"

namespace fedmia {

std::string_view ToString(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInputShape: return "input-shape error";
    case ErrorKind::kNumeric: return "numeric error";
    case ErrorKind::kState: return "state error";
    case ErrorKind::kSpec: return "spec error";
    case ErrorKind::kParse: return "parse error";
    case ErrorKind::kValidation: return "validation error";
    case ErrorKind::kCapacity: return "capacity error";
    case ErrorKind::kFormat: return "format error";
    case ErrorKind::kConfig: return "config error";
    case ErrorKind::kCapability: return "capability error";
    case ErrorKind::kDependency: return "stage-dependency error";
    case ErrorKind::kIo: return "io error";
  }
  return "error";
}

}  // namespace fedmia
