// Copyright 2026 The tplvm Authors.
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

#include "tplvm/errors.hpp"

namespace tplvm {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Input: return "input";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Numerical: return "numerical";
    case ErrorKind::State: return "state";
    case ErrorKind::Io: return "io";
    case ErrorKind::Config: return "config";
  }
  return "unknown";
}

}  // namespace tplvm
