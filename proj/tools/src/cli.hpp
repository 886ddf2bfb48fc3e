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
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tplvm/backtest.hpp"
#include "tplvm/data_io.hpp"

namespace tplvm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitNumerical = 4;

/// Everything a command may need. Config-file values are applied first,
/// command-line flags override them.
struct RunConfig {
  std::optional<std::filesystem::path> data;
  PanelKind kind = PanelKind::Returns;
  std::optional<std::filesystem::path> out;
  std::uint64_t seed = 0;
  /// Rows used by `fit`: the trailing window when set, else the whole panel.
  std::optional<Eigen::Index> fit_window;
  BacktestConfig backtest;
  SyntheticSpec synthetic;
};

/// Applies one `key = value` setting. Throws ConfigError for unknown keys
/// and malformed values.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

/// Parses a flat config document: `key = value` lines, '#' comments,
/// `split` may repeat. Throws ConfigError with the line number.
void apply_config_text(RunConfig& config, std::istream& in);

/// Keys accepted by apply_setting, sorted.
std::vector<std::string> known_keys();

/// Runs the command line (without the program name) and returns the exit
/// status. Errors are reported on `err` as one line:
///   tplvm: error kind=<kind> exit=<status>: <message>
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Table-1 style per-asset summary statistics.
std::string format_stats_table(const ReturnsPanel& panel, int periods_per_year);

}  // namespace tplvm::cli
