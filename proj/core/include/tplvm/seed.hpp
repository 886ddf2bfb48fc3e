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

#pragma once

#include <cstdint>

namespace tplvm {

/// Counter-based seed derivation: a single global seed expands into
/// independent per-stage streams (restart r, rebalance index t, ...).
/// Pure function of its arguments.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index = 0) noexcept;

/// Well-known stream identifiers so that sub-runs can be reproduced alone.
namespace seed_stream {
inline constexpr std::uint64_t kRestart = 1;
inline constexpr std::uint64_t kRebalance = 2;
inline constexpr std::uint64_t kVariational = 3;
inline constexpr std::uint64_t kSynthetic = 4;
inline constexpr std::uint64_t kElboReport = 5;
}  // namespace seed_stream

}  // namespace tplvm
