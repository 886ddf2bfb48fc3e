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

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace tplvm {

/// Multivariate normal with a cached Cholesky factor of its covariance.
class MvGaussian {
 public:
  /// Throws InputError on shape mismatch, NumericalError if cov is not SPD.
  MvGaussian(Eigen::VectorXd mean, Eigen::MatrixXd cov);

  const Eigen::VectorXd& mean() const noexcept { return mean_; }
  const Eigen::MatrixXd& cov() const noexcept { return cov_; }
  const Eigen::LLT<Eigen::MatrixXd>& chol() const noexcept { return chol_; }
  double log_det() const noexcept { return log_det_; }
  Eigen::Index dim() const noexcept { return mean_.size(); }

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
  Eigen::LLT<Eigen::MatrixXd> chol_;
  double log_det_;
};

/// Multivariate Student's t in the (nu - 2) parameterization: `scale` is the
/// covariance of the distribution, which requires nu > 2.
class MvStudentT {
 public:
  /// Throws DomainError if dof <= 2, otherwise as MvGaussian.
  MvStudentT(Eigen::VectorXd mean, Eigen::MatrixXd scale, double dof);

  const Eigen::VectorXd& mean() const noexcept { return mean_; }
  const Eigen::MatrixXd& scale() const noexcept { return scale_; }
  const Eigen::LLT<Eigen::MatrixXd>& chol() const noexcept { return chol_; }
  double log_det() const noexcept { return log_det_; }
  double dof() const noexcept { return dof_; }
  Eigen::Index dim() const noexcept { return mean_.size(); }

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd scale_;
  Eigen::LLT<Eigen::MatrixXd> chol_;
  double log_det_;
  double dof_;
};

double gauss_logpdf(const MvGaussian& dist, const Eigen::VectorXd& y);

/// log Gamma((nu+N)/2) - (N/2) log((nu-2) pi) - log Gamma(nu/2) - (1/2) log|K|
///   - ((nu+N)/2) log(1 + (y-m)' K^{-1} (y-m) / (nu-2))
double t_logpdf(const MvStudentT& dist, const Eigen::VectorXd& y);

/// Joint prior over observed points X and prediction points X*, given by
/// its blocks. Only cov_obs must be positive definite; the joint may be
/// singular (e.g. X* = X).
struct PartitionedPrior {
  Eigen::VectorXd mean_obs;
  Eigen::VectorXd mean_pred;
  Eigen::MatrixXd cov_obs;    // K_{X,X}
  Eigen::MatrixXd cov_cross;  // K_{X*,X}
  Eigen::MatrixXd cov_pred;   // K_{X*,X*}

  /// Splits a joint (mean, cov) whose first `n_observed` coordinates are observed.
  static PartitionedPrior split(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, Eigen::Index n_observed);
};

struct ConditionalUpdate {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  double beta = 0.0;          // (y - m_X)' K_{X,X}^{-1} (y - m_X)
  std::optional<double> dof;  // t only: nu + N
};

/// mean* = m_{X*} + K_{X*,X} K_{X,X}^{-1} (y - m_X),
/// cov*  = K_{X*,X*} - K_{X*,X} K_{X,X}^{-1} K_{X,X*}.
ConditionalUpdate gauss_condition(const PartitionedPrior& prior, const Eigen::VectorXd& y_obs);

/// Same mean map as gauss_condition; covariance is the Schur complement
/// scaled by (nu + beta - 2) / (nu + N - 2) and dof* = nu + N.
ConditionalUpdate t_condition(const PartitionedPrior& prior, double dof, const Eigen::VectorXd& y_obs);

/// `count` draws (rows) of m + L z with z standard normal. Deterministic in seed.
Eigen::MatrixXd gauss_sample(const MvGaussian& dist, Eigen::Index count, std::uint64_t seed);

/// `count` draws (rows) of m + sqrt((nu-2)/g) L z, g ~ chi-square(nu).
/// Deterministic in seed.
Eigen::MatrixXd t_sample(const MvStudentT& dist, Eigen::Index count, std::uint64_t seed);

}  // namespace tplvm
