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

// Shared plumbing for the maximum-likelihood and variational fitters.

#include <cstdint>
#include <optional>

#include <Eigen/Core>

#include "tplvm/lvm.hpp"

namespace tplvm::detail {

/// Core log-likelihood on residuals R = Y - M (N x D).
double loglik_resid(ModelKind model, const Eigen::MatrixXd& resid, const Eigen::MatrixXd& x,
                    const KernelSpec& kernel, double nu);
LoglikGradient loglik_grad_resid(ModelKind model, const Eigen::MatrixXd& resid, const Eigen::MatrixXd& x,
                                 const KernelSpec& kernel, double nu);
/// sum_d r_d' K^{-1} r_d with K built from (kernel, x) including noise.
double quad_form_resid(const Eigen::MatrixXd& resid, const Eigen::MatrixXd& x, const KernelSpec& kernel);

struct FitSetup {
  Eigen::VectorXd mean;
  Eigen::MatrixXd resid;
  Eigen::MatrixXd x_pca;
  Eigen::MatrixXd x_mds;
  KernelSpec init_kernel;
  bool learn_noise = true;
  bool learn_nu = false;
  double nu_init = 0.0;  // fixed value when !learn_nu; 0 for GPLVM
};

/// Validates inputs, computes the mean and residuals, PCA latents and the
/// starting hyperparameters.
FitSetup prepare_fit(const Eigen::MatrixXd& y, const LvmConfig& config);

/// Latent start for restart r: 0 is PCA, 1 is correlation MDS, later
/// restarts alternate between the two with N(0, 0.5^2) perturbations drawn
/// from the restart's seed.
Eigen::MatrixXd restart_latents(const FitSetup& setup, int restart, std::uint64_t seed);

/// Layout of the hyperparameter tail of the optimizer vector:
/// [log theta1, log theta2, (log noise_var), (rho)].
struct HyperLayout {
  Eigen::Index offset = 0;
  bool learn_noise = true;
  bool learn_nu = false;

  Eigen::Index size() const noexcept { return 2 + (learn_noise ? 1 : 0) + (learn_nu ? 1 : 0); }

  void pack(const KernelSpec& k, double nu, Eigen::VectorXd& v) const;
  KernelSpec kernel(const Eigen::VectorXd& v, const KernelSpec& fixed) const;
  double nu(const Eigen::VectorXd& v, double fixed_nu) const;
  void write_grad(double d_log_theta1, double d_log_theta2, double d_log_noise, double d_rho,
                  Eigen::VectorXd& g) const;
  /// Adds N(0, scale^2) noise to every hyperparameter coordinate.
  template <class Rng, class Normal>
  void perturb(Eigen::VectorXd& v, double scale, Rng& rng, Normal& normal) const {
    for (Eigen::Index i = 0; i < size(); ++i) v(offset + i) += scale * normal(rng);
  }
};

}  // namespace tplvm::detail
