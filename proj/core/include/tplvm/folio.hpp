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

#include <optional>
#include <span>

#include <Eigen/Core>

#include "tplvm/dates.hpp"
#include "tplvm/lvm.hpp"

namespace tplvm {

enum class CovarianceSource { GPLVM, TPLVM, Sample };

/// Prior: the fitted kernel covariance K(X) + noise_var I.
/// Predictive: for TPLVM, the prior scaled by (nu + beta - 2) / (nu + n - 2)
/// where the whole fitted window (n = N * D entries, beta = total quadratic
/// form) is treated as the conditioning set. Identical to Prior for GPLVM.
/// The scale factor does not change minimum-variance weights.
enum class CovarianceMode { Prior, Predictive };

const char* to_string(CovarianceSource source) noexcept;

struct EstimationWindow {
  Date start;
  Date end;
};

struct CovarianceDiagnostics {
  std::optional<double> objective;
  std::optional<double> nu;
  double condition_number = 1.0;
  double jitter = 0.0;
};

struct CovarianceEstimate {
  Eigen::MatrixXd sigma;  // assets x assets, SPD
  CovarianceSource source = CovarianceSource::Sample;
  std::optional<EstimationWindow> window;
  CovarianceDiagnostics diagnostics;
};

/// Throws StateError for an unfitted model.
CovarianceEstimate covariance_from_lvm(const FittedLVM& model, CovarianceMode mode = CovarianceMode::Prior);

/// Unbiased sample covariance of a T x D returns matrix (T >= 2), made SPD
/// with the kernel jitter ladder if needed.
CovarianceEstimate sample_covariance(const Eigen::MatrixXd& returns, double jitter = 0.0);

struct PortfolioWeights {
  Eigen::VectorXd weights;
  bool long_only = false;
  std::optional<Date> as_of;
};

/// Fully invested minimum-variance weights. Unconstrained signs use the
/// closed form Sigma^{-1} 1 / (1' Sigma^{-1} 1); long_only runs a primal
/// active-set method. The returned weights sum to exactly 1.
PortfolioWeights min_variance_weights(const CovarianceEstimate& cov, bool long_only);
Eigen::VectorXd min_variance_weights(const Eigen::MatrixXd& sigma, bool long_only);

/// Rescales to sum 1 and then nudges the largest entry until the
/// left-to-right floating-point sum is exactly 1.
void normalize_exact(Eigen::VectorXd& w);

struct PortfolioMetrics {
  double ret = 0.0;
  double risk = 0.0;
  std::optional<double> rr;  // empty when risk is zero
};

/// ret = (P/T) sum R_t, risk = sqrt(P/(T-1) sum (R_t - mean)^2), rr = ret/risk,
/// with P periods per year. Requires T >= 2.
PortfolioMetrics portfolio_metrics(std::span<const double> returns, int periods_per_year = 12);

struct SummaryStats {
  double mean_ann = 0.0;
  double std_ann = 0.0;
  double rr = 0.0;
  double skew = 0.0;
  double kurtosis = 0.0;  // non-excess
};

/// Annualized mean and sample std, standardized third and fourth central
/// moments. Requires T >= 4 and non-zero variance (InputError otherwise).
SummaryStats summary_stats(std::span<const double> returns, int periods_per_year = 12);

}  // namespace tplvm
