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

#include "tplvm/kernels.hpp"

#include <cmath>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "tplvm/errors.hpp"

namespace tplvm {

KernelSpec KernelSpec::exponential(double theta1, double theta2, double noise_var, double jitter) {
  if (!(theta1 > 0.0) || !(theta2 > 0.0) || !(noise_var >= 0.0) || !(jitter >= 0.0) ||
      !std::isfinite(theta1) || !std::isfinite(theta2) || !std::isfinite(noise_var) ||
      !std::isfinite(jitter)) {
    throw InputError(fmt::format("invalid kernel hyperparameters theta1={} theta2={} noise_var={} jitter={}",
                                 theta1, theta2, noise_var, jitter));
  }
  return from_log(KernelFamily::Exponential, std::log(theta1), std::log(theta2), std::log(noise_var), jitter);
}

KernelSpec KernelSpec::from_log(KernelFamily family, double log_theta1, double log_theta2,
                                double log_noise_var, double jitter) {
  if (!std::isfinite(log_theta1) || !std::isfinite(log_theta2) || std::isnan(log_noise_var) ||
      log_noise_var == std::numeric_limits<double>::infinity() || !(jitter >= 0.0)) {
    throw InputError("invalid log-space kernel hyperparameters");
  }
  KernelSpec spec;
  spec.family_ = family;
  spec.log_theta1_ = log_theta1;
  spec.log_theta2_ = log_theta2;
  spec.log_noise_var_ = log_noise_var;
  spec.jitter_ = jitter;
  return spec;
}

double KernelSpec::theta1() const noexcept { return std::exp(log_theta1_); }
double KernelSpec::theta2() const noexcept { return std::exp(log_theta2_); }
double KernelSpec::noise_var() const noexcept { return std::exp(log_noise_var_); }

KernelSpec KernelSpec::with_jitter(double jitter) const {
  return from_log(family_, log_theta1_, log_theta2_, log_noise_var_, jitter);
}

KernelSpec KernelSpec::with_noise_var(double noise_var) const {
  if (!(noise_var >= 0.0)) throw InputError("noise_var must be non-negative");
  return from_log(family_, log_theta1_, log_theta2_, std::log(noise_var), jitter_);
}

namespace {

// Inverse squared length scale; the exponent is -distance * inv_len2.
double inv_len2(const KernelSpec& spec) { return std::exp(-2.0 * spec.log_theta2()); }

}  // namespace

double kernel_eval(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& x2) {
  if (x.size() != x2.size() || x.size() == 0) {
    throw InputError(fmt::format("kernel_eval: dimension mismatch ({} vs {})", x.size(), x2.size()));
  }
  return spec.theta1() * std::exp(-(x - x2).norm() * inv_len2(spec));
}

Eigen::MatrixXd cross_kernel(const KernelSpec& spec, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.cols() != b.cols()) {
    throw InputError(fmt::format("cross_kernel: latent dimension mismatch ({} vs {})", a.cols(), b.cols()));
  }
  const double scale = spec.theta1();
  const double c = inv_len2(spec);
  Eigen::MatrixXd k(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      k(i, j) = scale * std::exp(-(a.row(i) - b.row(j)).norm() * c);
    }
  }
  return k;
}

Eigen::MatrixXd gram(const KernelSpec& spec, const Eigen::MatrixXd& x) {
  const Eigen::Index n = x.rows();
  const double scale = spec.theta1();
  const double c = inv_len2(spec);
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = scale;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = scale * std::exp(-(x.row(i) - x.row(j)).norm() * c);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

KernelMatrix factorize_with_jitter(Eigen::MatrixXd base, double jitter) {
  std::vector<double> ladder;
  double current = jitter;
  while (true) {
    ladder.push_back(current);
    KernelMatrix km;
    km.values_ = base;
    km.values_.diagonal().array() += current;
    km.chol_.compute(km.values_);
    if (km.chol_.info() == Eigen::Success) {
      const auto diag = km.chol_.matrixLLT().diagonal();
      km.log_det_ = 2.0 * diag.array().log().sum();
      if (std::isfinite(km.log_det_)) {
        km.jitter_used_ = current;
        return km;
      }
    }
    const double next = current > 0.0 ? current * 10.0 : kJitterFloor;
    if (next > kMaxJitter * (1.0 + 1e-12)) break;
    current = next;
  }
  throw NumericalError(fmt::format("Cholesky factorization failed after jitter ladder [{}]",
                                   fmt::join(ladder, ", ")),
                       std::move(ladder));
}

KernelMatrix kernel_matrix(const KernelSpec& spec, const Eigen::MatrixXd& x, bool include_noise) {
  if (x.rows() < 1 || x.cols() < 1) throw InputError("kernel_matrix: empty latent matrix");
  if (!x.allFinite()) throw InputError("kernel_matrix: non-finite latent coordinates");
  Eigen::MatrixXd k = gram(spec, x);
  if (include_noise) k.diagonal().array() += spec.noise_var();
  return factorize_with_jitter(std::move(k), spec.jitter());
}

KernelGrads kernel_grads(const KernelSpec& spec, const Eigen::MatrixXd& x) {
  const Eigen::Index n = x.rows();
  const Eigen::Index q = x.cols();
  const double c = inv_len2(spec);
  KernelGrads g;
  g.log_theta1 = gram(spec, x);
  g.log_theta2.setZero(n, n);
  g.latent.assign(static_cast<std::size_t>(q), Eigen::MatrixXd::Zero(n, n));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const Eigen::RowVectorXd diff = x.row(i) - x.row(j);
      const double dist = diff.norm();
      const double k = g.log_theta1(i, j);
      // d/dlog(theta2) of -dist * theta2^-2 is 2 * dist * theta2^-2.
      const double dt2 = 2.0 * dist * c * k;
      g.log_theta2(i, j) = dt2;
      g.log_theta2(j, i) = dt2;
      if (dist > 0.0) {
        const double s = -c * k / dist;
        for (Eigen::Index d = 0; d < q; ++d) {
          g.latent[static_cast<std::size_t>(d)](i, j) = s * diff(d);
          g.latent[static_cast<std::size_t>(d)](j, i) = -s * diff(d);
        }
      }
    }
  }
  return g;
}

Eigen::MatrixXd KernelGrads::contract_latent(const Eigen::MatrixXd& weights) const {
  const Eigen::Index n = weights.rows();
  const Eigen::MatrixXd sym = weights + weights.transpose();
  Eigen::MatrixXd out(n, static_cast<Eigen::Index>(latent.size()));
  for (std::size_t d = 0; d < latent.size(); ++d) {
    out.col(static_cast<Eigen::Index>(d)) = sym.cwiseProduct(latent[d]).rowwise().sum();
  }
  return out;
}

}  // namespace tplvm
