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

#include "tplvm/tprocess.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "tplvm/errors.hpp"

namespace tplvm {
namespace {

Eigen::LLT<Eigen::MatrixXd> factor_spd(const Eigen::MatrixXd& m, const char* what) {
  if (m.rows() != m.cols()) throw InputError(fmt::format("{}: matrix is not square", what));
  if (!m.allFinite()) throw InputError(fmt::format("{}: matrix has non-finite entries", what));
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) throw NumericalError(fmt::format("{}: matrix is not positive definite", what));
  return llt;
}

double log_det_of(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

void check_dim(Eigen::Index expected, Eigen::Index got, const char* what) {
  if (expected != got) throw InputError(fmt::format("{}: dimension mismatch ({} vs {})", what, expected, got));
}

// Squared Mahalanobis norm r' K^{-1} r through the triangular factor.
double mahalanobis2(const Eigen::LLT<Eigen::MatrixXd>& llt, const Eigen::VectorXd& r) {
  return llt.matrixL().solve(r).squaredNorm();
}

void check_dof(double dof) {
  if (!(dof > 2.0) || std::isnan(dof)) {
    throw DomainError(fmt::format("degrees of freedom must exceed 2 (got {})", dof));
  }
}

struct SchurParts {
  Eigen::VectorXd mean;
  Eigen::MatrixXd schur;
  double beta;
};

SchurParts schur_parts(const PartitionedPrior& p, const Eigen::VectorXd& y_obs) {
  const Eigen::Index n = p.mean_obs.size();
  const Eigen::Index m = p.mean_pred.size();
  check_dim(n, y_obs.size(), "condition: observations");
  check_dim(n, p.cov_obs.rows(), "condition: K_{X,X}");
  check_dim(m, p.cov_pred.rows(), "condition: K_{X*,X*}");
  if (p.cov_cross.rows() != m || p.cov_cross.cols() != n) {
    throw InputError("condition: K_{X*,X} must be N* x N");
  }
  const auto llt = factor_spd(p.cov_obs, "condition: K_{X,X}");
  const Eigen::VectorXd resid = y_obs - p.mean_obs;
  // V = L^{-1} K_{X,X*}; the Schur complement is K_{X*,X*} - V'V.
  const Eigen::MatrixXd v = llt.matrixL().solve(p.cov_cross.transpose());
  const Eigen::VectorXd w = llt.matrixL().solve(resid);
  SchurParts out;
  out.mean = p.mean_pred + v.transpose() * w;
  out.schur = p.cov_pred - v.transpose() * v;
  out.schur = 0.5 * (out.schur + out.schur.transpose()).eval();
  out.beta = w.squaredNorm();
  return out;
}

}  // namespace

MvGaussian::MvGaussian(Eigen::VectorXd mean, Eigen::MatrixXd cov)
    : mean_(std::move(mean)), cov_(std::move(cov)), chol_(factor_spd(cov_, "MvGaussian")),
      log_det_(log_det_of(chol_)) {
  check_dim(mean_.size(), cov_.rows(), "MvGaussian");
}

MvStudentT::MvStudentT(Eigen::VectorXd mean, Eigen::MatrixXd scale, double dof)
    : mean_(std::move(mean)), scale_(std::move(scale)), chol_(factor_spd(scale_, "MvStudentT")),
      log_det_(log_det_of(chol_)), dof_(dof) {
  check_dim(mean_.size(), scale_.rows(), "MvStudentT");
  check_dof(dof_);
}

double gauss_logpdf(const MvGaussian& dist, const Eigen::VectorXd& y) {
  check_dim(dist.dim(), y.size(), "gauss_logpdf");
  const double n = static_cast<double>(dist.dim());
  const double q = mahalanobis2(dist.chol(), y - dist.mean());
  return -0.5 * n * std::log(2.0 * std::numbers::pi) - 0.5 * dist.log_det() - 0.5 * q;
}

double t_logpdf(const MvStudentT& dist, const Eigen::VectorXd& y) {
  check_dim(dist.dim(), y.size(), "t_logpdf");
  const double n = static_cast<double>(dist.dim());
  const double nu = dist.dof();
  const double q = mahalanobis2(dist.chol(), y - dist.mean());
  return std::lgamma(0.5 * (nu + n)) - 0.5 * n * std::log((nu - 2.0) * std::numbers::pi) -
         std::lgamma(0.5 * nu) - 0.5 * dist.log_det() - 0.5 * (nu + n) * std::log1p(q / (nu - 2.0));
}

PartitionedPrior PartitionedPrior::split(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov,
                                         Eigen::Index n_observed) {
  const Eigen::Index total = mean.size();
  if (cov.rows() != total || cov.cols() != total) throw InputError("PartitionedPrior: shape mismatch");
  if (n_observed < 1 || n_observed > total) throw InputError("PartitionedPrior: invalid observed count");
  const Eigen::Index m = total - n_observed;
  PartitionedPrior p;
  p.mean_obs = mean.head(n_observed);
  p.mean_pred = mean.tail(m);
  p.cov_obs = cov.topLeftCorner(n_observed, n_observed);
  p.cov_cross = cov.bottomLeftCorner(m, n_observed);
  p.cov_pred = cov.bottomRightCorner(m, m);
  return p;
}

ConditionalUpdate gauss_condition(const PartitionedPrior& prior, const Eigen::VectorXd& y_obs) {
  auto parts = schur_parts(prior, y_obs);
  return ConditionalUpdate{std::move(parts.mean), std::move(parts.schur), parts.beta, std::nullopt};
}

ConditionalUpdate t_condition(const PartitionedPrior& prior, double dof, const Eigen::VectorXd& y_obs) {
  check_dof(dof);
  auto parts = schur_parts(prior, y_obs);
  const double n = static_cast<double>(prior.mean_obs.size());
  const double factor = (dof + parts.beta - 2.0) / (dof + n - 2.0);
  return ConditionalUpdate{std::move(parts.mean), factor * parts.schur, parts.beta, dof + n};
}

Eigen::MatrixXd gauss_sample(const MvGaussian& dist, Eigen::Index count, std::uint64_t seed) {
  if (count < 1) throw InputError("gauss_sample: count must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const Eigen::MatrixXd lower = dist.chol().matrixL();
  const Eigen::Index n = dist.dim();
  Eigen::MatrixXd out(count, n);
  Eigen::VectorXd z(n);
  for (Eigen::Index s = 0; s < count; ++s) {
    for (Eigen::Index i = 0; i < n; ++i) z(i) = normal(rng);
    const Eigen::VectorXd lz = lower.triangularView<Eigen::Lower>() * z;
    out.row(s) = (dist.mean() + lz).transpose();
  }
  return out;
}

Eigen::MatrixXd t_sample(const MvStudentT& dist, Eigen::Index count, std::uint64_t seed) {
  if (count < 1) throw InputError("t_sample: count must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::chi_squared_distribution<double> chi2(dist.dof());
  const Eigen::MatrixXd lower = dist.chol().matrixL();
  const Eigen::Index n = dist.dim();
  const double nu_minus_2 = dist.dof() - 2.0;
  Eigen::MatrixXd out(count, n);
  Eigen::VectorXd z(n);
  for (Eigen::Index s = 0; s < count; ++s) {
    const double g = chi2(rng);
    for (Eigen::Index i = 0; i < n; ++i) z(i) = normal(rng);
    const double scale = std::sqrt(nu_minus_2 / g);
    const Eigen::VectorXd lz = lower.triangularView<Eigen::Lower>() * z;
    out.row(s) = (dist.mean() + scale * lz).transpose();
  }
  return out;
}

}  // namespace tplvm
