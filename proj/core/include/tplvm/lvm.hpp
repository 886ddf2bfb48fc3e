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
#include <vector>

#include <Eigen/Core>

#include "tplvm/kernels.hpp"

namespace tplvm {

enum class ModelKind { GPLVM, TPLVM };
enum class MeanMode { Zero, EmpiricalRow };
enum class InferenceMethod { MLE, Variational };

const char* to_string(ModelKind kind) noexcept;
const char* to_string(MeanMode mode) noexcept;
const char* to_string(InferenceMethod method) noexcept;

struct OptimizerConfig {
  int max_iters = 2000;
  double tol = 1e-8;
  int restarts = 5;
  std::uint64_t seed = 0;
};

/// Fitting configuration. The observation matrix Y is N x D: each of the N
/// rows gets a Q-dimensional latent and the D columns are independent draws
/// of the N-vector. For portfolio use, rows are assets and columns periods.
struct LvmConfig {
  ModelKind model = ModelKind::TPLVM;
  int latent_dim = 1;
  /// Starting hyperparameters. When absent: theta1 = 0.8 v, noise = 0.2 v,
  /// theta2 = 1, with v the mean per-row variance of Y.
  std::optional<KernelSpec> initial_kernel;
  double jitter = KernelSpec::kDefaultJitter;
  bool learn_noise = true;
  MeanMode mean_mode = MeanMode::EmpiricalRow;
  OptimizerConfig optimizer;
  InferenceMethod inference = InferenceMethod::MLE;
  /// Pins nu (TPLVM only); otherwise nu is learned as 2 + exp(rho).
  std::optional<double> fixed_nu;
  double initial_nu = 8.0;
  int mc_samples = 8;

  /// Throws ConfigError when invalid for an N x D observation matrix.
  void validate(Eigen::Index n, Eigen::Index d) const;
};

struct FittedLVM {
  ModelKind model = ModelKind::GPLVM;
  InferenceMethod inference = InferenceMethod::MLE;
  Eigen::MatrixXd latent;  // N x Q
  KernelSpec kernel;
  std::optional<double> nu;
  Eigen::VectorXd mean;  // m_X, one entry per row of Y
  double objective = 0.0;
  std::vector<double> objective_trace;
  bool converged = false;
  int restarts_used = 0;
  /// Number of observation columns D and the total quadratic form
  /// sum_d r_d' K^{-1} r_d at the fitted parameters.
  Eigen::Index columns = 0;
  double quad_form = 0.0;

  bool fitted() const noexcept { return latent.size() > 0; }
};

/// Row means (EmpiricalRow) or zeros.
Eigen::VectorXd mean_vector(const Eigen::MatrixXd& y, MeanMode mode);

/// Top-Q principal component scores of the rows of a row-centred matrix,
/// each column scaled to unit variance. Sign fixed so the largest-magnitude
/// entry of every column is positive.
Eigen::MatrixXd pca_init(const Eigen::MatrixXd& y_centred, int latent_dim);

/// Classical multidimensional scaling of the row distances -log(corr_ij)
/// (correlations clamped to [1e-3, 1]), columns scaled to unit variance.
/// Under the exponential kernel -log corr is affine in the latent distance,
/// so this is a second, structurally different starting point.
Eigen::MatrixXd correlation_mds_init(const Eigen::MatrixXd& y, int latent_dim);

/// -(ND/2) log 2pi - (D/2) log|K| - (1/2) tr((Y-M)' K^{-1} (Y-M)).
/// An empty `mean` means zero mean. K includes noise_var and jitter.
double gplvm_loglik(const Eigen::MatrixXd& y, const Eigen::MatrixXd& x, const KernelSpec& kernel,
                    const Eigen::VectorXd& mean = {});

/// Sum over the D columns of the N-variate Student's t log-density with
/// scale K and nu degrees of freedom (each column its own mixing variable).
double tplvm_loglik(const Eigen::MatrixXd& y, const Eigen::MatrixXd& x, const KernelSpec& kernel, double nu,
                    const Eigen::VectorXd& mean = {});

/// Log-likelihood with its partial derivatives in the optimizer's coordinates.
struct LoglikGradient {
  double value = 0.0;
  Eigen::MatrixXd latent;  // N x Q
  double log_theta1 = 0.0;
  double log_theta2 = 0.0;
  double log_noise_var = 0.0;
  double rho = 0.0;  // nu = 2 + exp(rho); zero for GPLVM
};

LoglikGradient gplvm_loglik_grad(const Eigen::MatrixXd& y, const Eigen::MatrixXd& x, const KernelSpec& kernel,
                                 const Eigen::VectorXd& mean = {});
LoglikGradient tplvm_loglik_grad(const Eigen::MatrixXd& y, const Eigen::MatrixXd& x, const KernelSpec& kernel,
                                 double nu, const Eigen::VectorXd& mean = {});

/// Dispatch on model kind; `nu` is ignored for GPLVM.
double loglik(ModelKind model, const Eigen::MatrixXd& y, const Eigen::MatrixXd& x, const KernelSpec& kernel,
              std::optional<double> nu, const Eigen::VectorXd& mean = {});
LoglikGradient loglik_grad(ModelKind model, const Eigen::MatrixXd& y, const Eigen::MatrixXd& x,
                           const KernelSpec& kernel, std::optional<double> nu, const Eigen::VectorXd& mean = {});

/// Maximum likelihood over latents, log hyperparameters and rho with
/// seeded restarts (restart 0 starts from PCA, later ones perturb it).
/// Rows with zero variance are rejected with InputError.
FittedLVM fit_mle(const Eigen::MatrixXd& y, const LvmConfig& config);

// ---------------------------------------------------------------------------
// Variational inference

/// Fully factorized Gaussian q(X) against a standard-normal prior p(X).
struct VariationalPosterior {
  Eigen::MatrixXd mu;         // N x Q
  Eigen::MatrixXd log_sigma;  // N x Q
  int mc_samples = 8;
};

/// Closed-form KL[q || N(0, I)].
double kl_to_standard_normal(const VariationalPosterior& q);

struct ElboEstimate {
  double value = 0.0;
  double std_error = 0.0;
  double expected_loglik = 0.0;
  double kl = 0.0;
  int samples = 0;
};

/// Monte Carlo ELBO with `samples` fresh reparameterized draws.
ElboEstimate estimate_elbo(ModelKind model, const Eigen::MatrixXd& y, const Eigen::VectorXd& mean,
                           const VariationalPosterior& q, const KernelSpec& kernel, std::optional<double> nu,
                           int samples, std::uint64_t seed);

struct ElboGradient {
  double value = 0.0;
  Eigen::MatrixXd mu;
  Eigen::MatrixXd log_sigma;
  double log_theta1 = 0.0;
  double log_theta2 = 0.0;
  double log_noise_var = 0.0;
  double rho = 0.0;
};

/// ELBO and gradient for fixed standard-normal draws `eps` (one N x Q
/// matrix per sample), X_s = mu + exp(log_sigma) .* eps_s.
ElboGradient elbo_grad(ModelKind model, const Eigen::MatrixXd& y, const Eigen::VectorXd& mean,
                       const VariationalPosterior& q, const KernelSpec& kernel, std::optional<double> nu,
                       const std::vector<Eigen::MatrixXd>& eps);

struct VariationalFit {
  FittedLVM model;  // latent = posterior mean
  VariationalPosterior posterior;
  ElboEstimate elbo;
};

/// Maximizes the ELBO over (mu, log_sigma, hyperparameters). The draws are
/// held fixed for the whole run so the ascent is deterministic and monotone;
/// the returned `elbo` is re-estimated on fresh draws.
VariationalFit fit_variational(const Eigen::MatrixXd& y, const LvmConfig& config);

/// Runs fit_mle or fit_variational according to config.inference.
FittedLVM fit(const Eigen::MatrixXd& y, const LvmConfig& config);

}  // namespace tplvm
