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

#include "tplvm/lvm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>
#include <boost/math/special_functions/digamma.hpp>
#include <fmt/format.h>

#include "lvm_internal.hpp"
#include "tplvm/errors.hpp"
#include "tplvm/optimize.hpp"
#include "tplvm/seed.hpp"

namespace tplvm {

const char* to_string(ModelKind kind) noexcept { return kind == ModelKind::GPLVM ? "gplvm" : "tplvm"; }
const char* to_string(MeanMode mode) noexcept { return mode == MeanMode::Zero ? "zero" : "empirical_row"; }
const char* to_string(InferenceMethod method) noexcept {
  return method == InferenceMethod::MLE ? "mle" : "variational";
}

void LvmConfig::validate(Eigen::Index n, Eigen::Index d) const {
  if (latent_dim < 1) throw ConfigError("latent_dim must be at least 1");
  if (latent_dim >= d) {
    throw ConfigError(fmt::format("latent_dim ({}) must be smaller than the observation dimension ({})", latent_dim, d));
  }
  if (latent_dim > n) {
    throw ConfigError(fmt::format("latent_dim ({}) exceeds the number of latent points ({})", latent_dim, n));
  }
  if (optimizer.max_iters < 1) throw ConfigError("max_iters must be at least 1");
  if (!(optimizer.tol > 0.0)) throw ConfigError("tol must be positive");
  if (optimizer.restarts < 1) throw ConfigError("restarts must be at least 1");
  if (!(jitter >= 0.0)) throw ConfigError("jitter must be non-negative");
  if (mc_samples < 1) throw ConfigError("mc_samples must be at least 1");
  if (model == ModelKind::TPLVM) {
    if (fixed_nu && !(*fixed_nu > 2.0)) throw ConfigError("nu must exceed 2");
    if (!(initial_nu > 2.0)) throw ConfigError("initial_nu must exceed 2");
  }
}

Eigen::VectorXd mean_vector(const Eigen::MatrixXd& y, MeanMode mode) {
  if (mode == MeanMode::Zero) return Eigen::VectorXd::Zero(y.rows());
  return y.rowwise().mean();
}

Eigen::MatrixXd pca_init(const Eigen::MatrixXd& y_centred, int latent_dim) {
  const Eigen::Index n = y_centred.rows();
  const Eigen::Index q = latent_dim;
  if (q < 1 || q > n) throw InputError("pca_init: latent_dim out of range");
  const Eigen::MatrixXd gram = y_centred * y_centred.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  Eigen::MatrixXd x(n, q);
  for (Eigen::Index c = 0; c < q; ++c) {
    const Eigen::Index src = n - 1 - c;  // eigenvalues ascend
    Eigen::VectorXd score = eig.eigenvectors().col(src) * std::sqrt(std::max(eig.eigenvalues()(src), 0.0));
    score.array() -= score.mean();
    const double sd = n > 1 ? std::sqrt(score.squaredNorm() / static_cast<double>(n - 1)) : 0.0;
    if (sd > 0.0) score /= sd;
    Eigen::Index idx = 0;
    score.cwiseAbs().maxCoeff(&idx);
    if (score(idx) < 0.0) score = -score;
    x.col(c) = score;
  }
  return x;
}

Eigen::MatrixXd correlation_mds_init(const Eigen::MatrixXd& y, int latent_dim) {
  const Eigen::Index n = y.rows();
  const Eigen::Index q = latent_dim;
  if (q < 1 || q > n) throw InputError("correlation_mds_init: latent_dim out of range");
  const Eigen::MatrixXd centred = y.colwise() - y.rowwise().mean();
  const Eigen::VectorXd sd = centred.rowwise().norm();
  Eigen::MatrixXd dist2(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double corr = i == j ? 1.0 : centred.row(i).dot(centred.row(j)) / (sd(i) * sd(j));
      const double d = -std::log(std::clamp(corr, 1e-3, 1.0));
      dist2(i, j) = d * d;
    }
  }
  const Eigen::MatrixXd centring =
      Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
  const Eigen::MatrixXd b = -0.5 * centring * dist2 * centring;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(b);
  Eigen::MatrixXd x(n, q);
  for (Eigen::Index c = 0; c < q; ++c) {
    const Eigen::Index src = n - 1 - c;
    Eigen::VectorXd coord = eig.eigenvectors().col(src) * std::sqrt(std::max(eig.eigenvalues()(src), 0.0));
    const double scale = n > 1 ? std::sqrt(coord.squaredNorm() / static_cast<double>(n - 1)) : 0.0;
    if (scale > 0.0) coord /= scale;
    Eigen::Index idx = 0;
    coord.cwiseAbs().maxCoeff(&idx);
    if (coord(idx) < 0.0) coord = -coord;
    x.col(c) = coord;
  }
  return x;
}

namespace detail {
namespace {

struct Factorized {
  KernelMatrix km;
  Eigen::MatrixXd a;  // L^{-1} R
  Eigen::VectorXd q;  // column quadratic forms
};

Factorized factorize(const Eigen::MatrixXd& resid, const Eigen::MatrixXd& x, const KernelSpec& kernel) {
  if (resid.rows() != x.rows()) {
    throw InputError(fmt::format("latent rows ({}) must match observation rows ({})", x.rows(), resid.rows()));
  }
  Factorized f{kernel_matrix(kernel, x, true), {}, {}};
  f.a = f.km.chol().matrixL().solve(resid);
  f.q = f.a.colwise().squaredNorm().transpose();
  return f;
}

double t_column_constant(double nu, double n) {
  return std::lgamma(0.5 * (nu + n)) - 0.5 * n * std::log((nu - 2.0) * std::numbers::pi) - std::lgamma(0.5 * nu);
}

void check_nu(double nu) {
  if (!(nu > 2.0)) throw DomainError(fmt::format("nu must exceed 2 (got {})", nu));
}

}  // namespace

double loglik_resid(ModelKind model, const Eigen::MatrixXd& resid, const Eigen::MatrixXd& x,
                    const KernelSpec& kernel, double nu) {
  if (model == ModelKind::TPLVM) check_nu(nu);
  const auto f = factorize(resid, x, kernel);
  const double n = static_cast<double>(resid.rows());
  const double d = static_cast<double>(resid.cols());
  if (model == ModelKind::GPLVM) {
    return -0.5 * n * d * std::log(2.0 * std::numbers::pi) - 0.5 * d * f.km.log_det() - 0.5 * f.q.sum();
  }
  return d * t_column_constant(nu, n) - 0.5 * d * f.km.log_det() -
         0.5 * (nu + n) * (f.q.array() / (nu - 2.0)).log1p().sum();
}

LoglikGradient loglik_grad_resid(ModelKind model, const Eigen::MatrixXd& resid, const Eigen::MatrixXd& x,
                                 const KernelSpec& kernel, double nu) {
  if (model == ModelKind::TPLVM) check_nu(nu);
  const auto f = factorize(resid, x, kernel);
  const Eigen::Index rows = resid.rows();
  const double n = static_cast<double>(rows);
  const double d = static_cast<double>(resid.cols());
  const auto& llt = f.km.chol();

  LoglikGradient out;
  // B = K^{-1} R; dL/dK = (B W B' - D K^{-1}) / 2 with per-column weights W.
  const Eigen::MatrixXd b = llt.matrixU().solve(f.a);
  const Eigen::MatrixXd k_inv = llt.solve(Eigen::MatrixXd::Identity(rows, rows));
  Eigen::MatrixXd dl_dk;
  if (model == ModelKind::GPLVM) {
    out.value = -0.5 * n * d * std::log(2.0 * std::numbers::pi) - 0.5 * d * f.km.log_det() - 0.5 * f.q.sum();
    dl_dk = 0.5 * (b * b.transpose() - d * k_inv);
  } else {
    const Eigen::ArrayXd log_terms = (f.q.array() / (nu - 2.0)).log1p();
    out.value = d * t_column_constant(nu, n) - 0.5 * d * f.km.log_det() - 0.5 * (nu + n) * log_terms.sum();
    const Eigen::ArrayXd w = (nu + n) / (nu - 2.0 + f.q.array());
    dl_dk = 0.5 * (b * w.matrix().asDiagonal() * b.transpose() - d * k_inv);

    const double dig = 0.5 * boost::math::digamma(0.5 * (nu + n)) - 0.5 * boost::math::digamma(0.5 * nu) -
                       0.5 * n / (nu - 2.0);
    const Eigen::ArrayXd per_col =
        dig - 0.5 * log_terms + 0.5 * (nu + n) * f.q.array() / ((nu - 2.0) * (nu - 2.0 + f.q.array()));
    out.rho = per_col.sum() * (nu - 2.0);
  }

  const KernelGrads g = kernel_grads(kernel, x);
  out.log_theta1 = dl_dk.cwiseProduct(g.log_theta1).sum();
  out.log_theta2 = dl_dk.cwiseProduct(g.log_theta2).sum();
  out.log_noise_var = kernel.noise_var() * dl_dk.trace();
  out.latent = g.contract_latent(dl_dk);
  return out;
}

double quad_form_resid(const Eigen::MatrixXd& resid, const Eigen::MatrixXd& x, const KernelSpec& kernel) {
  return factorize(resid, x, kernel).q.sum();
}

FitSetup prepare_fit(const Eigen::MatrixXd& y, const LvmConfig& config) {
  const Eigen::Index n = y.rows();
  const Eigen::Index d = y.cols();
  if (n < 2) throw InputError("fitting requires at least two latent points (rows)");
  if (d < 1) throw InputError("fitting requires at least one observation column");
  if (!y.allFinite()) throw InputError("observation matrix contains non-finite values");
  config.validate(n, d);

  FitSetup s;
  s.mean = mean_vector(y, config.mean_mode);
  s.resid = y.colwise() - s.mean;

  const Eigen::VectorXd centred_var =
      (y.colwise() - y.rowwise().mean()).rowwise().squaredNorm() / static_cast<double>(std::max<Eigen::Index>(d - 1, 1));
  for (Eigen::Index i = 0; i < n; ++i) {
    // rounding leaves ~1e-18 residue on constant rows, so compare to the row scale
    const double scale = 1e-12 * y.row(i).cwiseAbs().maxCoeff();
    if (!(centred_var(i) > scale * scale)) throw InputError(fmt::format("row {} has zero variance; its latent is unidentifiable", i));
  }

  s.x_pca = pca_init(y.colwise() - y.rowwise().mean(), config.latent_dim);
  s.x_mds = correlation_mds_init(y, config.latent_dim);

  if (config.initial_kernel) {
    s.init_kernel = config.initial_kernel->with_jitter(config.jitter);
  } else {
    const double v = s.resid.rowwise().squaredNorm().mean() / static_cast<double>(d);
    s.init_kernel = KernelSpec::exponential(0.8 * v, 1.0, 0.2 * v, config.jitter);
  }
  s.learn_noise = config.learn_noise && s.init_kernel.noise_var() > 0.0;
  if (config.model == ModelKind::TPLVM) {
    s.learn_nu = !config.fixed_nu.has_value();
    s.nu_init = config.fixed_nu.value_or(config.initial_nu);
  }
  return s;
}

Eigen::MatrixXd restart_latents(const FitSetup& setup, int restart, std::uint64_t seed) {
  if (restart == 0) return setup.x_pca;
  if (restart == 1) return setup.x_mds;
  Eigen::MatrixXd x = restart % 2 == 0 ? setup.x_pca : setup.x_mds;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) x(i, j) += 0.5 * normal(rng);
  }
  return x;
}

void HyperLayout::pack(const KernelSpec& k, double nu, Eigen::VectorXd& v) const {
  Eigen::Index i = offset;
  v(i++) = k.log_theta1();
  v(i++) = k.log_theta2();
  if (learn_noise) v(i++) = k.log_noise_var();
  if (learn_nu) v(i++) = std::log(nu - 2.0);
}

KernelSpec HyperLayout::kernel(const Eigen::VectorXd& v, const KernelSpec& fixed) const {
  const double log_noise = learn_noise ? v(offset + 2) : fixed.log_noise_var();
  return KernelSpec::from_log(fixed.family(), v(offset), v(offset + 1), log_noise, fixed.jitter());
}

double HyperLayout::nu(const Eigen::VectorXd& v, double fixed_nu) const {
  if (!learn_nu) return fixed_nu;
  const double nu = 2.0 + std::exp(v(offset + (learn_noise ? 3 : 2)));
  // rho far out in either tail leaves nu == 2 or inf in floating point
  if (!(nu > 2.0) || !std::isfinite(nu)) throw NumericalError(fmt::format("nu out of range ({})", nu), {});
  return nu;
}

void HyperLayout::write_grad(double d_log_theta1, double d_log_theta2, double d_log_noise, double d_rho,
                             Eigen::VectorXd& g) const {
  Eigen::Index i = offset;
  g(i++) = d_log_theta1;
  g(i++) = d_log_theta2;
  if (learn_noise) g(i++) = d_log_noise;
  if (learn_nu) g(i++) = d_rho;
}

}  // namespace detail

namespace {

Eigen::MatrixXd resid_of(const Eigen::MatrixXd& y, const Eigen::VectorXd& mean) {
  if (mean.size() == 0) return y;
  if (mean.size() != y.rows()) throw InputError("mean length must equal the number of rows of Y");
  return y.colwise() - mean;
}

double nu_or_zero(ModelKind model, std::optional<double> nu) {
  if (model == ModelKind::GPLVM) return 0.0;
  if (!nu) throw InputError("TPLVM requires nu");
  return *nu;
}

}  // namespace

double gplvm_loglik(const Eigen::MatrixXd& y, const Eigen::MatrixXd& x, const KernelSpec& kernel,
                    const Eigen::VectorXd& mean) {
  return detail::loglik_resid(ModelKind::GPLVM, resid_of(y, mean), x, kernel, 0.0);
}

double tplvm_loglik(const Eigen::MatrixXd& y, const Eigen::MatrixXd& x, const KernelSpec& kernel, double nu,
                    const Eigen::VectorXd& mean) {
  return detail::loglik_resid(ModelKind::TPLVM, resid_of(y, mean), x, kernel, nu);
}

LoglikGradient gplvm_loglik_grad(const Eigen::MatrixXd& y, const Eigen::MatrixXd& x, const KernelSpec& kernel,
                                 const Eigen::VectorXd& mean) {
  return detail::loglik_grad_resid(ModelKind::GPLVM, resid_of(y, mean), x, kernel, 0.0);
}

LoglikGradient tplvm_loglik_grad(const Eigen::MatrixXd& y, const Eigen::MatrixXd& x, const KernelSpec& kernel,
                                 double nu, const Eigen::VectorXd& mean) {
  return detail::loglik_grad_resid(ModelKind::TPLVM, resid_of(y, mean), x, kernel, nu);
}

double loglik(ModelKind model, const Eigen::MatrixXd& y, const Eigen::MatrixXd& x, const KernelSpec& kernel,
              std::optional<double> nu, const Eigen::VectorXd& mean) {
  return detail::loglik_resid(model, resid_of(y, mean), x, kernel, nu_or_zero(model, nu));
}

LoglikGradient loglik_grad(ModelKind model, const Eigen::MatrixXd& y, const Eigen::MatrixXd& x,
                           const KernelSpec& kernel, std::optional<double> nu, const Eigen::VectorXd& mean) {
  return detail::loglik_grad_resid(model, resid_of(y, mean), x, kernel, nu_or_zero(model, nu));
}

FittedLVM fit_mle(const Eigen::MatrixXd& y, const LvmConfig& config) {
  const detail::FitSetup s = detail::prepare_fit(y, config);
  const Eigen::Index n = y.rows();
  const Eigen::Index q = config.latent_dim;
  const Eigen::Index nx = n * q;
  const detail::HyperLayout layout{nx, s.learn_noise, s.learn_nu};

  const auto objective = [&](const Eigen::VectorXd& v) {
    const Eigen::Map<const Eigen::MatrixXd> x(v.data(), n, q);
    const KernelSpec k = layout.kernel(v, s.init_kernel);
    const double nu = layout.nu(v, s.nu_init);
    const LoglikGradient g = detail::loglik_grad_resid(config.model, s.resid, x, k, nu);
    ObjectiveEval e{g.value, Eigen::VectorXd(v.size())};
    e.grad.head(nx) = Eigen::Map<const Eigen::VectorXd>(g.latent.data(), nx);
    layout.write_grad(g.log_theta1, g.log_theta2, g.log_noise_var, g.rho, e.grad);
    return e;
  };

  Eigen::VectorXd base(nx + layout.size());
  base.head(nx) = Eigen::Map<const Eigen::VectorXd>(s.x_pca.data(), nx);
  layout.pack(s.init_kernel, s.nu_init, base);

  const AscentOptions opts{config.optimizer.max_iters, config.optimizer.tol};
  std::optional<AscentResult> best;
  int completed = 0;
  for (int r = 0; r < config.optimizer.restarts; ++r) {
    Eigen::VectorXd x0 = base;
    const std::uint64_t restart_seed =
        derive_seed(config.optimizer.seed, seed_stream::kRestart, static_cast<std::uint64_t>(r));
    const Eigen::MatrixXd x_start = detail::restart_latents(s, r, restart_seed);
    x0.head(nx) = Eigen::Map<const Eigen::VectorXd>(x_start.data(), nx);
    if (r > 1) {
      std::mt19937_64 rng(derive_seed(restart_seed, seed_stream::kRestart));
      std::normal_distribution<double> normal;
      layout.perturb(x0, 0.3, rng, normal);
    }
    try {
      AscentResult res = maximize(objective, std::move(x0), opts);
      ++completed;
      if (!best || res.value > best->value) best = std::move(res);
    } catch (const Error& e) {
      if (r == 0 && e.kind() == ErrorKind::Input) {
        throw InputError(fmt::format("non-finite objective at initialization: {}", e.what()));
      }
      if (e.kind() != ErrorKind::Numerical && e.kind() != ErrorKind::Input) throw;
    }
  }
  if (!best) throw NumericalError("all restarts failed to produce a finite objective");

  FittedLVM out;
  out.model = config.model;
  out.inference = InferenceMethod::MLE;
  out.latent = Eigen::Map<const Eigen::MatrixXd>(best->x.data(), n, q);
  out.kernel = layout.kernel(best->x, s.init_kernel);
  if (config.model == ModelKind::TPLVM) out.nu = layout.nu(best->x, s.nu_init);
  out.mean = s.mean;
  out.objective = best->value;
  out.objective_trace = std::move(best->trace);
  out.converged = best->converged;
  out.restarts_used = completed;
  out.columns = y.cols();
  out.quad_form = detail::quad_form_resid(s.resid, out.latent, out.kernel);
  return out;
}

FittedLVM fit(const Eigen::MatrixXd& y, const LvmConfig& config) {
  if (config.inference == InferenceMethod::Variational) return fit_variational(y, config).model;
  return fit_mle(y, config);
}

}  // namespace tplvm
