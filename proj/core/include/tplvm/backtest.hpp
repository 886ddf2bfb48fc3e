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
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "tplvm/data_io.hpp"
#include "tplvm/dates.hpp"
#include "tplvm/folio.hpp"
#include "tplvm/lvm.hpp"

namespace tplvm {

enum class BacktestModel { GPLVM, TPLVM, SampleCov };

const char* to_string(BacktestModel model) noexcept;
/// "gplvm" | "tplvm" | "samplecov"; throws ConfigError.
BacktestModel parse_backtest_model(const std::string& name);

/// Inclusive range of realized-return dates reported as one section.
struct PeriodSplit {
  std::string label;
  Date start;
  Date end;
};

struct BacktestConfig {
  Eigen::Index window = 120;
  int rebalance_every = 1;
  BacktestModel model = BacktestModel::TPLVM;
  LvmConfig lvm;
  bool long_only = false;
  /// Empty means the realized period is halved into "Anterior half" and
  /// "Posterior half".
  std::vector<PeriodSplit> splits;
  int periods_per_year = 12;
  CovarianceMode covariance_mode = CovarianceMode::Prior;
  std::uint64_t seed = 0;
  /// Worker threads for the per-date fits; 0 picks the hardware count.
  /// Results do not depend on this value.
  int threads = 0;

  /// Throws ConfigError.
  void validate(const ReturnsPanel& panel) const;
};

struct RebalanceDiagnostics {
  bool refit = true;
  bool fallback = false;
  std::string error;
  std::optional<double> objective;
  std::optional<double> nu;
  std::optional<double> condition_number;
  bool converged = true;
};

struct Rebalance {
  Eigen::Index index = 0;  // row of the realized return
  Date as_of;              // last date used for estimation
  Date realized_date;
  Eigen::VectorXd weights;
  double realized_return = 0.0;
  RebalanceDiagnostics diagnostics;
};

struct SplitMetrics {
  std::string label;
  Date start;
  Date end;
  std::size_t count = 0;
  PortfolioMetrics metrics;
};

struct BacktestReport {
  std::string model;
  Eigen::Index window = 0;
  bool long_only = false;
  int periods_per_year = 12;
  std::vector<std::string> assets;
  std::vector<Rebalance> rebalances;
  std::vector<SplitMetrics> per_split;
  SplitMetrics whole;
};

/// Splits the realized range [window, T) into two halves.
std::vector<PeriodSplit> default_splits(const ReturnsPanel& panel, Eigen::Index window);

/// Rolling-window backtest. For each row t >= window the model is fitted on
/// rows [t - window, t), the weights are applied to row t. A failed fit falls
/// back to the previous weights (equal weights at the first date) and is
/// flagged in the diagnostics.
BacktestReport run_backtest(const ReturnsPanel& panel, const BacktestConfig& config);

/// Weights the backtest would use for the window ending just before row t.
/// Throws on fit failure instead of falling back.
Eigen::VectorXd rebalance_weights(const ReturnsPanel& panel, const BacktestConfig& config, Eigen::Index t);

std::vector<double> realized_returns(const BacktestReport& report);

/// Recomputes split and whole-period metrics from the rebalance records.
void recompute_metrics(BacktestReport& report, const std::vector<PeriodSplit>& splits);

struct ComparisonRow {
  std::string label;
  Date start;
  Date end;
  PortfolioMetrics a;
  PortfolioMetrics b;
};

/// Table with one row per split followed by the whole period. Differences
/// are b - a.
struct ComparisonTable {
  std::string name_a;
  std::string name_b;
  std::vector<ComparisonRow> rows;
};

/// Throws InputError unless both reports have the same realized dates.
ComparisonTable compare_reports(const BacktestReport& a, const BacktestReport& b);

/// Column heading used for a model in text tables (Port_G, Port_t, Port_S).
std::string portfolio_heading(const std::string& model);

/// Fixed-width text: "Return/Risk/R/R" per section with a Difference column.
std::string format_comparison(const ComparisonTable& table);

/// Same layout for a single report.
std::string format_report_table(const BacktestReport& report);

}  // namespace tplvm
