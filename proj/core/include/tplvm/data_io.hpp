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
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "tplvm/dates.hpp"

namespace tplvm {

/// Date-indexed simple periodic returns: values(t, a) is the return of asset
/// `a` over the period ending at dates[t].
struct ReturnsPanel {
  std::vector<Date> dates;
  std::vector<std::string> assets;
  Eigen::MatrixXd values;  // T x D_assets

  Eigen::Index periods() const noexcept { return values.rows(); }
  Eigen::Index asset_count() const noexcept { return values.cols(); }

  /// Throws InputError unless dates are strictly increasing, labels match the
  /// columns, there is at least one asset and every value is finite.
  void validate() const;

  /// Rows [begin, end).
  ReturnsPanel slice(Eigen::Index begin, Eigen::Index end) const;
};

enum class PanelKind { Prices, Returns };

/// Reads "date,ASSET1,ASSET2,..." comma-delimited text. Prices are turned
/// into simple returns p_t / p_{t-1} - 1 and lose their first row. Problems
/// are reported as ParseError with the 1-based row/column.
ReturnsPanel read_panel(std::istream& in, PanelKind kind);
ReturnsPanel load_panel(const std::filesystem::path& path, PanelKind kind);

/// Shortest round-trip decimal formatting, so read(write(panel)) is exact.
void write_panel(std::ostream& out, const ReturnsPanel& panel);
void save_panel(const std::filesystem::path& path, const ReturnsPanel& panel);

/// Square labelled matrix: header "asset,L1,L2,..." then one row per label.
void write_labelled_matrix(std::ostream& out, const std::vector<std::string>& labels, const Eigen::MatrixXd& m);

/// Price path p_0 * prod(1 + r) with one more row than `returns`.
Eigen::MatrixXd cumulate_prices(const Eigen::RowVectorXd& initial, const Eigen::MatrixXd& returns);

enum class SyntheticGenerator { GaussianFactor, TFactor };

struct SyntheticSpec {
  int n_assets = 16;
  int n_periods = 240;
  SyntheticGenerator generator = SyntheticGenerator::TFactor;
  double nu = 5.0;
  int q_true = 1;
  std::uint64_t seed = 0;
  /// Kernel used to build the ground-truth covariance over the loadings.
  double theta1 = 0.0025;
  double theta2 = 1.0;
  double noise_var = 0.0005;
  double drift = 0.005;
  Date start = Date{std::chrono::year{1998}, std::chrono::June, std::chrono::day{30}};

  /// Throws InputError.
  void validate() const;
};

struct SyntheticPanel {
  ReturnsPanel panel;
  Eigen::MatrixXd loadings;    // n_assets x q_true
  Eigen::MatrixXd true_cov;    // n_assets x n_assets
  Eigen::VectorXd true_mean;
};

/// Loadings ~ N(0, I), covariance = exponential kernel over the loadings
/// plus noise_var * I, returns drawn i.i.d. per period from the Gaussian or
/// Student's t with that covariance. Monthly month-end dates from `start`.
SyntheticPanel make_synthetic(const SyntheticSpec& spec);

}  // namespace tplvm
