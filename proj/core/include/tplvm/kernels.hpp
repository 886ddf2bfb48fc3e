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

#include <limits>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace tplvm {

enum class KernelFamily { Exponential };

/// Kernel family plus hyperparameters. theta1, theta2 and noise_var are held
/// in log space (the optimizer works on those coordinates); accessors return
/// the exponentiated values. A zero noise variance is stored as log = -inf.
class KernelSpec {
 public:
  static constexpr double kDefaultJitter = 1e-8;

  KernelSpec() = default;

  /// Throws InputError unless theta1 > 0, theta2 > 0, noise_var >= 0, jitter >= 0.
  static KernelSpec exponential(double theta1, double theta2, double noise_var = 0.0,
                                double jitter = kDefaultJitter);
  static KernelSpec from_log(KernelFamily family, double log_theta1, double log_theta2,
                             double log_noise_var, double jitter = kDefaultJitter);

  KernelFamily family() const noexcept { return family_; }
  double theta1() const noexcept;
  double theta2() const noexcept;
  double noise_var() const noexcept;
  double jitter() const noexcept { return jitter_; }

  double log_theta1() const noexcept { return log_theta1_; }
  double log_theta2() const noexcept { return log_theta2_; }
  double log_noise_var() const noexcept { return log_noise_var_; }

  KernelSpec with_jitter(double jitter) const;
  KernelSpec with_noise_var(double noise_var) const;

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;

 private:
  KernelFamily family_ = KernelFamily::Exponential;
  double log_theta1_ = 0.0;
  double log_theta2_ = 0.0;
  double log_noise_var_ = -std::numeric_limits<double>::infinity();
  double jitter_ = kDefaultJitter;
};

/// theta1 * exp(-||x - x2|| / theta2^2), Euclidean (unsquared) norm.
/// Throws InputError on dimension mismatch.
double kernel_eval(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& x2);

/// Noise-free Gram matrix between the rows of `a` and the rows of `b`.
Eigen::MatrixXd cross_kernel(const KernelSpec& spec, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Noise-free symmetric Gram matrix over the rows of X.
Eigen::MatrixXd gram(const KernelSpec& spec, const Eigen::MatrixXd& x);

/// A factorized kernel matrix. `values()` holds exactly the matrix that was
/// factorized: the Gram matrix, the optional noise diagonal and the jitter
/// that was finally required. Immutable once built.
class KernelMatrix {
 public:
  const Eigen::MatrixXd& values() const noexcept { return values_; }
  const Eigen::LLT<Eigen::MatrixXd>& chol() const noexcept { return chol_; }
  Eigen::MatrixXd lower() const { return chol_.matrixL(); }
  double log_det() const noexcept { return log_det_; }
  double jitter_used() const noexcept { return jitter_used_; }
  Eigen::Index size() const noexcept { return values_.rows(); }

  /// K^{-1} b through the Cholesky factor.
  Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const { return chol_.solve(b); }

 private:
  friend KernelMatrix factorize_with_jitter(Eigen::MatrixXd base, double jitter);

  Eigen::MatrixXd values_;
  Eigen::LLT<Eigen::MatrixXd> chol_;
  double log_det_ = 0.0;
  double jitter_used_ = 0.0;
};

/// Jitter ladder: tries `jitter`, then x10 per step up to 1e-2 (a zero
/// starting jitter begins the ladder at 1e-10). Throws NumericalError with
/// the attempted ladder when every step fails.
KernelMatrix factorize_with_jitter(Eigen::MatrixXd base, double jitter);

inline constexpr double kMaxJitter = 1e-2;
inline constexpr double kJitterFloor = 1e-10;

/// Gram matrix over X, plus noise_var*I when requested, factorized with the
/// spec's jitter.
KernelMatrix kernel_matrix(const KernelSpec& spec, const Eigen::MatrixXd& x, bool include_noise);

/// Analytic kernel-matrix derivatives for the noise-free Gram matrix.
///
/// K_ij depends on X only through rows i and j, so the latent gradient is
/// stored compactly: latent[q](i, j) = dK_ij / dX(i, q). By antisymmetry
/// dK_ij / dX(j, q) = latent[q](j, i). Coincident rows get the 0 subgradient.
struct KernelGrads {
  Eigen::MatrixXd log_theta1;
  Eigen::MatrixXd log_theta2;
  std::vector<Eigen::MatrixXd> latent;

  /// For a (not necessarily symmetric) weight matrix G returns the N x Q
  /// matrix d/dX sum_ij G_ij K_ij.
  Eigen::MatrixXd contract_latent(const Eigen::MatrixXd& weights) const;
};

KernelGrads kernel_grads(const KernelSpec& spec, const Eigen::MatrixXd& x);

}  // namespace tplvm
