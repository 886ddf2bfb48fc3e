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

#include <cmath>
#include <random>

#include <fmt/format.h>

#include "lvm_internal.hpp"
#include "tplvm/errors.hpp"
#include "tplvm/lvm.hpp"
#include "tplvm/optimize.hpp"
#include "tplvm/seed.hpp"

namespace tplvm {
namespace {

constexpr double kInitialLogSigma = -2.302585092994046;  // log(0.1)

std::vector<Eigen::MatrixXd> draw_eps(Eigen::Index n, Eigen::Index q, int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<Eigen::MatrixXd> eps(static_cast<std::size_t>(samples), Eigen::MatrixXd(n, q));
  for (auto& e : eps) {
    for (Eigen::Index j = 0; j < q; ++j) {
      for (Eigen::Index i = 0; i < n; ++i) e(i, j) = normal(rng);
    }
  }
  return eps;
}

void check_posterior(const VariationalPosterior& q) {
  if (q.mu.rows() != q.log_sigma.rows() || q.mu.cols() != q.log_sigma.cols()) {
    throw InputError("variational posterior: mu and log_sigma shapes differ");
  }
  if (!q.mu.allFinite() || !q.log_sigma.allFinite()) throw InputError("variational posterior has non-finite entries");
}

double nu_or_zero(ModelKind model, std::optional<double> nu) {
  if (model == ModelKind::GPLVM) return 0.0;
  if (!nu) throw InputError("TPLVM requires nu");
  return *nu;
}

Eigen::MatrixXd resid_of(const Eigen::MatrixXd& y, const Eigen::VectorXd& mean) {
  if (mean.size() == 0) return y;
  if (mean.size() != y.rows()) throw InputError("mean length must equal the number of rows of Y");
  return y.colwise() - mean;
}

ElboGradient elbo_grad_resid(ModelKind model, const Eigen::MatrixXd& resid, const VariationalPosterior& q,
                             const KernelSpec& kernel, double nu, const std::vector<Eigen::MatrixXd>& eps) {
  const Eigen::MatrixXd sigma = q.log_sigma.array().exp().matrix();
  const double inv_s = 1.0 / static_cast<double>(eps.size());
  ElboGradient g;
  g.mu = Eigen::MatrixXd::Zero(q.mu.rows(), q.mu.cols());
  g.log_sigma = Eigen::MatrixXd::Zero(q.mu.rows(), q.mu.cols());
  double expected = 0.0;
  for (const auto& e : eps) {
    const Eigen::MatrixXd x = q.mu + sigma.cwiseProduct(e);
    const LoglikGradient lg = detail::loglik_grad_resid(model, resid, x, kernel, nu);
    expected += inv_s * lg.value;
    g.mu += inv_s * lg.latent;
    g.log_sigma += inv_s * lg.latent.cwiseProduct(sigma).cwiseProduct(e);
    g.log_theta1 += inv_s * lg.log_theta1;
    g.log_theta2 += inv_s * lg.log_theta2;
    g.log_noise_var += inv_s * lg.log_noise_var;
    g.rho += inv_s * lg.rho;
  }
  // KL terms: dKL/dmu = mu, dKL/dlog_sigma = sigma^2 - 1.
  g.value = expected - kl_to_standard_normal(q);
  g.mu -= q.mu;
  g.log_sigma -= (sigma.array().square() - 1.0).matrix();
  return g;
}

}  // namespace

double kl_to_standard_normal(const VariationalPosterior& q) {
  check_posterior(q);
  const Eigen::ArrayXXd ls = q.log_sigma.array();
  return (0.5 * ((2.0 * ls).exp() + q.mu.array().square() - 1.0) - ls).sum();
}

ElboEstimate estimate_elbo(ModelKind model, const Eigen::MatrixXd& y, const Eigen::VectorXd& mean,
                           const VariationalPosterior& q, const KernelSpec& kernel, std::optional<double> nu,
                           int samples, std::uint64_t seed) {
  check_posterior(q);
  if (samples < 2) throw InputError("estimate_elbo needs at least two samples");
  const Eigen::MatrixXd resid = resid_of(y, mean);
  const double nu_v = nu_or_zero(model, nu);
  const Eigen::MatrixXd sigma = q.log_sigma.array().exp().matrix();
  const auto eps = draw_eps(q.mu.rows(), q.mu.cols(), samples, seed);
  Eigen::VectorXd values(samples);
  for (int s = 0; s < samples; ++s) {
    const Eigen::MatrixXd x = q.mu + sigma.cwiseProduct(eps[static_cast<std::size_t>(s)]);
    values(s) = detail::loglik_resid(model, resid, x, kernel, nu_v);
  }
  ElboEstimate out;
  out.samples = samples;
  out.expected_loglik = values.mean();
  out.kl = kl_to_standard_normal(q);
  out.value = out.expected_loglik - out.kl;
  const double var = (values.array() - out.expected_loglik).square().sum() / static_cast<double>(samples - 1);
  out.std_error = std::sqrt(var / static_cast<double>(samples));
  return out;
}

ElboGradient elbo_grad(ModelKind model, const Eigen::MatrixXd& y, const Eigen::VectorXd& mean,
                       const VariationalPosterior& q, const KernelSpec& kernel, std::optional<double> nu,
                       const std::vector<Eigen::MatrixXd>& eps) {
  check_posterior(q);
  if (eps.empty()) throw InputError("elbo_grad needs at least one draw");
  return elbo_grad_resid(model, resid_of(y, mean), q, kernel, nu_or_zero(model, nu), eps);
}

VariationalFit fit_variational(const Eigen::MatrixXd& y, const LvmConfig& config) {
  const detail::FitSetup s = detail::prepare_fit(y, config);
  const Eigen::Index n = y.rows();
  const Eigen::Index q = config.latent_dim;
  const Eigen::Index nx = n * q;
  const detail::HyperLayout layout{2 * nx, s.learn_noise, s.learn_nu};

  const auto unpack_posterior = [&](const Eigen::VectorXd& v) {
    VariationalPosterior post;
    post.mu = Eigen::Map<const Eigen::MatrixXd>(v.data(), n, q);
    post.log_sigma = Eigen::Map<const Eigen::MatrixXd>(v.data() + nx, n, q);
    post.mc_samples = config.mc_samples;
    return post;
  };

  Eigen::VectorXd base(2 * nx + layout.size());
  base.head(nx) = Eigen::Map<const Eigen::VectorXd>(s.x_pca.data(), nx);
  base.segment(nx, nx).setConstant(kInitialLogSigma);
  layout.pack(s.init_kernel, s.nu_init, base);

  const AscentOptions opts{config.optimizer.max_iters, config.optimizer.tol};
  std::optional<AscentResult> best;
  int completed = 0;
  for (int r = 0; r < config.optimizer.restarts; ++r) {
    const auto eps = draw_eps(n, q, config.mc_samples,
                              derive_seed(config.optimizer.seed, seed_stream::kVariational, static_cast<std::uint64_t>(r)));
    const auto objective = [&](const Eigen::VectorXd& v) {
      const VariationalPosterior post = unpack_posterior(v);
      const KernelSpec k = layout.kernel(v, s.init_kernel);
      const double nu = layout.nu(v, s.nu_init);
      const ElboGradient g = elbo_grad_resid(config.model, s.resid, post, k, nu, eps);
      ObjectiveEval e{g.value, Eigen::VectorXd(v.size())};
      e.grad.head(nx) = Eigen::Map<const Eigen::VectorXd>(g.mu.data(), nx);
      e.grad.segment(nx, nx) = Eigen::Map<const Eigen::VectorXd>(g.log_sigma.data(), nx);
      layout.write_grad(g.log_theta1, g.log_theta2, g.log_noise_var, g.rho, e.grad);
      return e;
    };

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

  VariationalFit out;
  out.posterior = unpack_posterior(best->x);
  FittedLVM& m = out.model;
  m.model = config.model;
  m.inference = InferenceMethod::Variational;
  m.latent = out.posterior.mu;
  m.kernel = layout.kernel(best->x, s.init_kernel);
  if (config.model == ModelKind::TPLVM) m.nu = layout.nu(best->x, s.nu_init);
  m.mean = s.mean;
  m.objective = best->value;
  m.objective_trace = std::move(best->trace);
  m.converged = best->converged;
  m.restarts_used = completed;
  m.columns = y.cols();
  m.quad_form = detail::quad_form_resid(s.resid, m.latent, m.kernel);

  const int report_samples = std::max(256, 32 * config.mc_samples);
  out.elbo = estimate_elbo(config.model, y, s.mean, out.posterior, m.kernel, m.nu, report_samples,
                           derive_seed(config.optimizer.seed, seed_stream::kElboReport));
  return out;
}

}  // namespace tplvm
