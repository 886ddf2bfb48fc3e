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

#include <filesystem>
#include <string>

#include "tplvm/backtest.hpp"

namespace tplvm {

/// Machine-readable report: JSON with a fixed key order and shortest
/// round-trip number formatting, so equal reports serialize to equal bytes.
std::string report_to_json(const BacktestReport& report);
BacktestReport report_from_json(const std::string& text);

void save_report_json(const std::filesystem::path& path, const BacktestReport& report);
BacktestReport load_report_json(const std::filesystem::path& path);

}  // namespace tplvm
