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

// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <boost/math/quadrature/sinh_sinh.hpp>
#include <fmt/format.h>

#include "test_support.hpp"
#include "tplvm/backtest.hpp"
#include "tplvm/data_io.hpp"
#include "tplvm/folio.hpp"
#include "tplvm/kernels.hpp"
#include "tplvm/lvm.hpp"
#include "tplvm/report_io.hpp"
#include "tplvm/tprocess.hpp"

namespace {

using namespace tplvm;
using testing::central_difference;
using testing::random_matrix;
using testing::random_spd;
using testing::relative_gap;

struct Outcome {
  bool pass = true;
  std::string detail;
  std::string fingerprint;  // exact numeric output, compared across reruns
};

std::string g17(double v) { return fmt::format("{:.17g}", v); }

double log_std_normal(double x) { return -0.5 * std::log(2.0 * std::numbers::pi) - 0.5 * x * x; }

Eigen::VectorXd scalar(double v) { return Eigen::VectorXd::Constant(1, v); }
Eigen::MatrixXd scalar_m(double v) { return Eigen::MatrixXd::Constant(1, 1, v); }

// ---------------------------------------------------------------------------

Outcome gaussian_limit() {
  std::mt19937_64 rng(101);
  double worst_logpdf = 0.0, worst_cov = 0.0, worst_mean = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index n = 2 + trial % 7;
    const Eigen::MatrixXd k = random_spd(n, rng);
    const Eigen::VectorXd m = random_matrix(n, 1, rng);
    const Eigen::MatrixXd l = k.llt().matrixL();
    const Eigen::VectorXd y = m + l * random_matrix(n, 1, rng);
    worst_logpdf = std::max(worst_logpdf, std::abs(t_logpdf(MvStudentT(m, k, 1e6), y) - gauss_logpdf(MvGaussian(m, k), y)));

    const Eigen::Index n_obs = 1 + static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(n - 1));
    const auto p = PartitionedPrior::split(m, k, n_obs);
    const auto g = gauss_condition(p, y.head(n_obs));
    const auto t = t_condition(p, 1e6, y.head(n_obs));
    worst_cov = std::max(worst_cov, (t.cov - g.cov).norm() / g.cov.norm());
    worst_mean = std::max(worst_mean, (t.mean - g.mean).cwiseAbs().maxCoeff());
  }
  Outcome o;
  o.pass = worst_logpdf < 1e-4 && worst_cov < 1e-4 && worst_mean < 1e-12;
  o.detail = fmt::format("200 instances N<=8, max |logpdf gap| {:.2e}, max relative cov gap {:.2e} (tol 1e-4)",
                         worst_logpdf, worst_cov);
  return o;
}

Outcome conditional_oracle() {
  // The mixing scale s = (nu - 2) / chi2_nu is drawn from its prior and
  // weighted by the Gaussian likelihood of the observed pair at that scale;
  // the predicted coordinate is drawn from the Gaussian conditional at s.
  std::mt19937_64 setup(202);
  Outcome o;
  int within = 0, total = 0;
  double worst_z = 0.0;
  for (double nu : {3.0, 5.0, 8.0, 30.0}) {
    const Eigen::MatrixXd cov = random_spd(3, setup);
    const Eigen::VectorXd mean = random_matrix(3, 1, setup);
    const auto joint = t_sample(MvStudentT(mean, cov, nu), 1, setup());
    const Eigen::VectorXd y = joint.row(0).head(2).transpose();
    const auto p = PartitionedPrior::split(mean, cov, 2);
    const auto g = gauss_condition(p, y);
    const double beta = (y - p.mean_obs).dot(p.cov_obs.ldlt().solve(y - p.mean_obs));

    std::mt19937_64 rng(setup());
    std::chi_squared_distribution<double> chi(nu);
    std::normal_distribution<double> normal;
    const int draws = 1'000'000;
    Eigen::ArrayXd w(draws), x(draws);
    for (int i = 0; i < draws; ++i) {
      const double s = (nu - 2.0) / chi(rng);
      w(i) = std::exp(-0.5 * beta / s) / s;
      x(i) = g.mean(0) + std::sqrt(s * g.cov(0, 0)) * normal(rng);
    }
    const double sw = w.sum();
    const double mc_mean = (w * x).sum() / sw;
    const Eigen::ArrayXd dev2 = (x - mc_mean).square();
    const double mc_var = (w * dev2).sum() / sw;
    const double se_mean = std::sqrt((w.square() * dev2).sum()) / sw;
    const double se_var = std::sqrt((w.square() * (dev2 - mc_var).square()).sum()) / sw;

    const auto t = t_condition(p, nu, y);
    const double z_mean = std::abs(t.mean(0) - mc_mean) / se_mean;
    const double z_var = std::abs(t.cov(0, 0) - mc_var) / se_var;
    within += (z_mean <= 3.0) + (z_var <= 3.0);
    total += 2;
    worst_z = std::max({worst_z, z_mean, z_var});
    o.fingerprint += g17(mc_mean) + ' ' + g17(mc_var) + ' ' + g17(t.mean(0)) + ' ' + g17(t.cov(0, 0)) + '\n';
  }
  o.pass = within == total;
  o.detail = fmt::format("{}/{} moments within 3 SE at 1e6 draws, nu in {{3,5,8,30}}, worst {:.2f} SE", within, total,
                         worst_z);
  return o;
}

Outcome normalization() {
  boost::math::quadrature::sinh_sinh<double> integrator;
  double worst = 0.0;
  const MvGaussian g(scalar(0.3), scalar_m(2.0));
  worst = std::abs(integrator.integrate([&](double y) { return std::exp(gauss_logpdf(g, scalar(y))); }) - 1.0);
  for (double nu : {3.0, 5.0, 30.0}) {
    const MvStudentT t(scalar(-0.2), scalar_m(0.7), nu);
    worst = std::max(worst, std::abs(integrator.integrate([&](double y) { return std::exp(t_logpdf(t, scalar(y))); }) - 1.0));
  }
  return {worst < 1e-6, fmt::format("max |integral - 1| {:.2e} over gaussian and nu in {{3,5,30}} (tol 1e-6)", worst), {}};
}

Outcome gradients() {
  std::mt19937_64 rng(404);
  int probes = 0, failures = 0;
  double worst = 0.0;
  const auto check = [&](double analytic, double fd, double floor) {
    const double gap = relative_gap(analytic, fd, floor);
    worst = std::max(worst, gap);
    if (!(gap < 1e-5)) ++failures;
  };

  // kernel entries
  for (int trial = 0; trial < 40; ++trial, ++probes) {
    const Eigen::Index n = 4, q = 1 + trial % 3;
    const Eigen::MatrixXd x = random_matrix(n, q, rng);
    const Eigen::Vector2d p = random_matrix(2, 1, rng, 0.5);
    const auto spec = KernelSpec::from_log(KernelFamily::Exponential, p(0), p(1), std::log(0.1));
    const auto kg = kernel_grads(spec, x);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        if (i == j) continue;
        auto entry_theta = [&](const Eigen::VectorXd& v) {
          const auto s = KernelSpec::from_log(KernelFamily::Exponential, v(0), v(1), std::log(0.1));
          return kernel_eval(s, x.row(i).transpose(), x.row(j).transpose());
        };
        check(kg.log_theta1(i, j), central_difference(entry_theta, p, 0), 1e-12);
        check(kg.log_theta2(i, j), central_difference(entry_theta, p, 1), 1e-12);
        for (Eigen::Index d = 0; d < q; ++d) {
          auto entry_x = [&](const Eigen::VectorXd& xi) { return kernel_eval(spec, xi, x.row(j).transpose()); };
          check(kg.latent[static_cast<std::size_t>(d)](i, j), central_difference(entry_x, x.row(i).transpose(), d), 1e-12);
        }
      }
    }
  }

  // log likelihoods over (X, log theta1, log theta2, log noise, rho)
  for (ModelKind model : {ModelKind::GPLVM, ModelKind::TPLVM}) {
    for (int trial = 0; trial < 25; ++trial, ++probes) {
      const Eigen::Index n = 5, q = 1 + trial % 2, d = 4;
      const Eigen::MatrixXd y = random_matrix(n, d, rng);
      const Eigen::VectorXd m = random_matrix(n, 1, rng, 0.1);
      Eigen::VectorXd p(n * q + 4);
      p.head(n * q) = random_matrix(n * q, 1, rng);
      p.tail(4) = random_matrix(4, 1, rng, 0.3);
      const auto kernel = [&](const Eigen::VectorXd& v) {
        return KernelSpec::from_log(KernelFamily::Exponential, v(n * q), v(n * q + 1), v(n * q + 2));
      };
      const auto nu = [&](const Eigen::VectorXd& v) {
        return model == ModelKind::TPLVM ? std::optional<double>(2.0 + std::exp(v(n * q + 3))) : std::nullopt;
      };
      const auto latent = [&](const Eigen::VectorXd& v) { return Eigen::MatrixXd(Eigen::Map<const Eigen::MatrixXd>(v.data(), n, q)); };
      const auto f = [&](const Eigen::VectorXd& v) { return loglik(model, y, latent(v), kernel(v), nu(v), m); };
      const auto g = loglik_grad(model, y, latent(p), kernel(p), nu(p), m);
      Eigen::VectorXd analytic(p.size());
      analytic.head(n * q) = Eigen::Map<const Eigen::VectorXd>(g.latent.data(), n * q);
      analytic.tail(4) << g.log_theta1, g.log_theta2, g.log_noise_var, g.rho;
      const Eigen::Index count = model == ModelKind::TPLVM ? p.size() : p.size() - 1;
      for (Eigen::Index i = 0; i < count; ++i) check(analytic(i), central_difference(f, p, i), 1.0);
    }
  }

  // ELBO over (mu, log sigma, log theta1, log theta2, log noise, rho) with fixed draws
  for (ModelKind model : {ModelKind::GPLVM, ModelKind::TPLVM}) {
    for (int trial = 0; trial < 10; ++trial, ++probes) {
      const Eigen::Index n = 4, q = 1, d = 3;
      std::vector<Eigen::MatrixXd> eps;
      for (int s = 0; s < 4; ++s) eps.push_back(random_matrix(n, q, rng));
      const Eigen::MatrixXd y = random_matrix(n, d, rng);
      Eigen::VectorXd p(2 * n * q + 4);
      p.head(n * q) = random_matrix(n * q, 1, rng);
      p.segment(n * q, n * q) = random_matrix(n * q, 1, rng, 0.3).array() - 1.0;
      p.tail(4) = random_matrix(4, 1, rng, 0.3);
      const auto post = [&](const Eigen::VectorXd& v) {
        VariationalPosterior qp;
        qp.mu = Eigen::Map<const Eigen::MatrixXd>(v.data(), n, q);
        qp.log_sigma = Eigen::Map<const Eigen::MatrixXd>(v.data() + n * q, n, q);
        return qp;
      };
      const auto kernel = [&](const Eigen::VectorXd& v) {
        return KernelSpec::from_log(KernelFamily::Exponential, v(2 * n * q), v(2 * n * q + 1), v(2 * n * q + 2));
      };
      const auto nu = [&](const Eigen::VectorXd& v) {
        return model == ModelKind::TPLVM ? std::optional<double>(2.0 + std::exp(v(2 * n * q + 3))) : std::nullopt;
      };
      const auto f = [&](const Eigen::VectorXd& v) { return elbo_grad(model, y, {}, post(v), kernel(v), nu(v), eps).value; };
      const auto g = elbo_grad(model, y, {}, post(p), kernel(p), nu(p), eps);
      Eigen::VectorXd analytic(p.size());
      analytic << Eigen::Map<const Eigen::VectorXd>(g.mu.data(), n * q),
          Eigen::Map<const Eigen::VectorXd>(g.log_sigma.data(), n * q), g.log_theta1, g.log_theta2, g.log_noise_var, g.rho;
      const Eigen::Index count = model == ModelKind::TPLVM ? p.size() : p.size() - 1;
      for (Eigen::Index i = 0; i < count; ++i) check(analytic(i), central_difference(f, p, i), 1.0);
    }
  }
  return {probes >= 100 && failures == 0,
          fmt::format("{} random probes (kernel, gplvm, tplvm, elbo), {} coordinate failures, max relative gap {:.2e} (tol 1e-5)",
                      probes, failures, worst),
          {}};
}

Outcome elbo_validity() {
  Outcome o;
  std::mt19937_64 rng(505);
  double min_kl = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 1000; ++trial) {
    VariationalPosterior q;
    q.mu = random_matrix(3, 1 + trial % 3, rng, 2.0);
    q.log_sigma = random_matrix(3, 1 + trial % 3, rng, 2.0);
    min_kl = std::min(min_kl, kl_to_standard_normal(q));
  }

  SyntheticSpec spec;
  spec.n_assets = 3;
  spec.n_periods = 12;
  spec.seed = 5;
  const Eigen::MatrixXd y = make_synthetic(spec).panel.values.transpose();
  bool bounded = true;
  std::string parts;
  for (ModelKind model : {ModelKind::GPLVM, ModelKind::TPLVM}) {
    LvmConfig c;
    c.model = model;
    c.inference = InferenceMethod::Variational;
    c.latent_dim = 1;
    c.optimizer.restarts = 2;
    c.optimizer.seed = 5;
    const auto fit = fit_variational(y, c);
    min_kl = std::min(min_kl, fit.elbo.kl);

    // proposal: equal mixture of the prior and the fitted posterior widened by 1.5
    std::mt19937_64 is_rng(55);
    std::normal_distribution<double> normal;
    std::bernoulli_distribution coin(0.5);
    const int draws = 400'000;
    const Eigen::ArrayXd mu = fit.posterior.mu.reshaped().array();
    const Eigen::ArrayXd s = 1.5 * fit.posterior.log_sigma.reshaped().array().exp();
    Eigen::ArrayXd log_w(draws);
    Eigen::MatrixXd x(3, 1);
    for (int i = 0; i < draws; ++i) {
      const bool from_prior = coin(is_rng);
      for (Eigen::Index r = 0; r < 3; ++r) x(r) = from_prior ? normal(is_rng) : mu(r) + s(r) * normal(is_rng);
      double log_prior = 0.0, log_q = 0.0;
      for (Eigen::Index r = 0; r < 3; ++r) {
        log_prior += log_std_normal(x(r));
        log_q += log_std_normal((x(r) - mu(r)) / s(r)) - std::log(s(r));
      }
      const double log_mix =
          std::log(0.5) + std::max(log_prior, log_q) + std::log1p(std::exp(-std::abs(log_prior - log_q)));
      log_w(i) = loglik(model, y, x, fit.model.kernel, fit.model.nu, fit.model.mean) + log_prior - log_mix;
    }
    const double top = log_w.maxCoeff();
    const Eigen::ArrayXd w = (log_w - top).exp();
    const double log_evidence = top + std::log(w.mean());
    const double se = std::sqrt((w - w.mean()).square().sum() / (draws - 1.0) / draws) / w.mean();
    const double slack = 3.0 * (se + fit.elbo.std_error);
    bounded = bounded && fit.elbo.value <= log_evidence + slack;
    parts += fmt::format(", {} elbo {:.4f} vs log evidence {:.4f} (3 SE {:.1e})", to_string(model), fit.elbo.value,
                         log_evidence, slack);
    o.fingerprint += g17(fit.elbo.value) + ' ' + g17(fit.elbo.std_error) + ' ' + g17(log_evidence) + '\n';
  }
  o.pass = bounded && min_kl >= 0.0;
  o.detail = fmt::format("min KL {:.3e} over 1002 posteriors{}", min_kl, parts);
  return o;
}

Outcome qp_oracle() {
  std::mt19937_64 rng(606);
  double worst = 0.0;
  bool sums = true;
  int instances = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index d = 2 + trial % 9;
    const Eigen::MatrixXd sigma = random_spd(d, rng);
    for (bool long_only : {false, true}) {
      const Eigen::VectorXd w = min_variance_weights(sigma, long_only);
      const Eigen::VectorXd ref = testing::projected_gradient_min_variance(sigma, long_only);
      worst = std::max(worst, std::abs(w.dot(sigma * w) - ref.dot(sigma * ref)));
      double s = 0.0;
      for (Eigen::Index i = 0; i < d; ++i) s += w(i);
      sums = sums && s == 1.0;
      if (long_only) sums = sums && w.minCoeff() >= 0.0;
      ++instances;
    }
  }
  return {worst < 1e-8 && sums,
          fmt::format("{} problems up to 10x10, both modes, max variance gap {:.2e} (tol 1e-8), exact unit sums: {}",
                      instances, worst, sums ? "yes" : "no"),
          {}};
}

Outcome metric_formulas() {
  bool ok = true;
  double worst = 0.0;
  const auto near = [&](double a, double b) {
    worst = std::max(worst, std::abs(a - b));
    ok = ok && std::abs(a - b) <= 1e-12;
  };
  const std::vector<double> pair{0.01, -0.01};
  const auto m1 = portfolio_metrics(pair, 12);
  near(m1.risk, std::sqrt(0.0024));
  near(m1.ret, 0.0);
  ok = ok && m1.rr.has_value();
  near(m1.rr.value_or(1.0), 0.0);
  const std::vector<double> triple{0.02, 0.01, 0.03};
  const auto m2 = portfolio_metrics(triple, 12);
  near(m2.ret, 0.24);
  near(m2.risk, std::sqrt(0.0012));
  near(m2.rr.value_or(0.0), 0.24 / std::sqrt(0.0012));

  SyntheticSpec spec;
  spec.n_periods = 150;
  spec.seed = 7;
  const ReturnsPanel panel = make_synthetic(spec).panel;
  BacktestConfig c;
  c.model = BacktestModel::SampleCov;
  c.window = 60;
  const BacktestReport report = run_backtest(panel, c);
  bool exact = true;
  const auto against = [&](const SplitMetrics& sm) {
    std::vector<double> r;
    for (const auto& rb : report.rebalances) {
      if (sm.start <= rb.realized_date && rb.realized_date <= sm.end) r.push_back(rb.realized_return);
    }
    const auto m = portfolio_metrics(r, report.periods_per_year);
    exact = exact && r.size() == sm.count && m.ret == sm.metrics.ret && m.risk == sm.metrics.risk && m.rr == sm.metrics.rr;
    // textbook formulas
    double mean = 0.0;
    for (double v : r) mean += v / static_cast<double>(r.size());
    double ss = 0.0;
    for (double v : r) ss += (v - mean) * (v - mean);
    near(sm.metrics.ret, 12.0 * mean);
    near(sm.metrics.risk, std::sqrt(12.0 * ss / static_cast<double>(r.size() - 1)));
  };
  for (const auto& sm : report.per_split) against(sm);
  against(report.whole);

  BacktestReport again = report;
  again.per_split.clear();
  again.whole = {};
  std::vector<PeriodSplit> splits;
  for (const auto& sm : report.per_split) splits.push_back({sm.label, sm.start, sm.end});
  recompute_metrics(again, splits);
  exact = exact && format_report_table(again) == format_report_table(report);
  return {ok && exact,
          fmt::format("hand values max error {:.1e} (tol 1e-12), report recomputed from realized returns exactly: {}", worst,
                      exact ? "yes" : "no"),
          {}};
}

Outcome synthetic_experiment() {
  Outcome o;
  std::vector<double> risk_g, risk_t;
  for (int seed = 0; seed < 20; ++seed) {
    SyntheticSpec spec;
    spec.n_assets = 16;
    spec.n_periods = 240;
    spec.generator = SyntheticGenerator::TFactor;
    spec.nu = 5.0;
    spec.seed = static_cast<std::uint64_t>(seed);
    const ReturnsPanel panel = make_synthetic(spec).panel;
    BacktestConfig c;
    c.window = 120;
    c.seed = static_cast<std::uint64_t>(seed);
    c.model = BacktestModel::GPLVM;
    c.lvm.model = ModelKind::GPLVM;
    const BacktestReport g = run_backtest(panel, c);
    c.model = BacktestModel::TPLVM;
    c.lvm.model = ModelKind::TPLVM;
    const BacktestReport t = run_backtest(panel, c);
    risk_g.push_back(g.whole.metrics.risk);
    risk_t.push_back(t.whole.metrics.risk);
    o.fingerprint += report_to_json(g) + report_to_json(t);
  }
  const auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
  };
  const double mg = median(risk_g), mt = median(risk_t);
  int wins = 0;
  for (std::size_t i = 0; i < risk_g.size(); ++i) wins += risk_t[i] <= risk_g[i];
  o.pass = mt <= mg;
  o.detail = fmt::format("median whole-period risk TPLVM {:.4f}% vs GPLVM {:.4f}% over 20 seeds (TPLVM lower on {}/20)",
                         100.0 * mt, 100.0 * mg, wins);
  return o;
}

Outcome no_look_ahead() {
  SyntheticSpec spec;
  spec.n_assets = 5;
  spec.n_periods = 60;
  spec.seed = 10;
  const ReturnsPanel panel = make_synthetic(spec).panel;
  std::mt19937_64 rng(1010);
  std::normal_distribution<double> normal(0.0, 0.1);
  const BacktestModel models[] = {BacktestModel::SampleCov, BacktestModel::GPLVM, BacktestModel::TPLVM};
  int unchanged = 0;
  const int trials = 200;
  for (int trial = 0; trial < trials; ++trial) {
    BacktestConfig c;
    c.window = 24;
    c.model = models[trial % 3];
    c.lvm.model = c.model == BacktestModel::GPLVM ? ModelKind::GPLVM : ModelKind::TPLVM;
    c.lvm.optimizer.restarts = 2;
    c.lvm.optimizer.max_iters = 100;
    c.seed = static_cast<std::uint64_t>(trial);
    const Eigen::Index t = c.window + static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(panel.periods() - c.window));
    const Eigen::Index earlier = c.window + static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(t - c.window + 1));
    ReturnsPanel perturbed = panel;
    for (Eigen::Index row = t; row < panel.periods(); ++row) {
      for (Eigen::Index col = 0; col < panel.asset_count(); ++col) perturbed.values(row, col) += normal(rng);
    }
    const bool same = rebalance_weights(panel, c, t) == rebalance_weights(perturbed, c, t) &&
                      rebalance_weights(panel, c, earlier) == rebalance_weights(perturbed, c, earlier);
    unchanged += same;
  }
  return {unchanged == trials,
          fmt::format("{}/{} future-perturbation trials left historical weights bit-identical", unchanged, trials), {}};
}

// ---------------------------------------------------------------------------

struct Timed {
  Outcome outcome;
  double seconds;
};

Timed timed(const std::function<Outcome()>& f) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o = f();
  return {std::move(o), std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()};
}

}  // namespace

int main() {
  int failures = 0;
  const auto report = [&](int id, const std::string& name, const Outcome& o, double seconds, double budget) {
    const bool pass = o.pass && (budget <= 0.0 || seconds < budget);
    failures += !pass;
    const std::string budget_text = budget > 0.0 ? fmt::format(", budget {:.0f} s", budget) : "";
    std::cout << fmt::format("{} criterion {}: {}: {} [{:.2f} s{}]", pass ? "PASS" : "FAIL", id, name, o.detail, seconds,
                             budget_text)
              << std::endl;
  };

  const Timed c1 = timed(gaussian_limit);
  report(1, "gaussian limit", c1.outcome, c1.seconds, 1.0);
  const Timed c2 = timed(conditional_oracle);
  report(2, "conditional update vs scale-mixture Monte Carlo", c2.outcome, c2.seconds, 30.0);
  const Timed c3 = timed(normalization);
  report(3, "density normalization", c3.outcome, c3.seconds, 5.0);
  const Timed c4 = timed(gradients);
  report(4, "analytic gradients vs central differences", c4.outcome, c4.seconds, 30.0);
  const Timed c5 = timed(elbo_validity);
  report(5, "ELBO below importance-sampled evidence", c5.outcome, c5.seconds, 60.0);
  const Timed c6 = timed(qp_oracle);
  report(6, "minimum-variance QP oracle", c6.outcome, c6.seconds, 30.0);
  const Timed c7 = timed(metric_formulas);
  report(7, "metric formulas and report recomputation", c7.outcome, c7.seconds, 0.0);
  const Timed c8 = timed(synthetic_experiment);
  report(8, "synthetic TFactor experiment, median risk TPLVM <= GPLVM", c8.outcome, c8.seconds, 900.0);

  const Timed c9 = timed([&] {
    const Outcome r2 = conditional_oracle();
    const Outcome r5 = elbo_validity();
    const Outcome r8 = synthetic_experiment();
    const bool same2 = r2.fingerprint == c2.outcome.fingerprint;
    const bool same5 = r5.fingerprint == c5.outcome.fingerprint;
    const bool same8 = r8.fingerprint == c8.outcome.fingerprint;
    return Outcome{same2 && same5 && same8,
                   fmt::format("reruns byte-identical: criterion 2 {}, criterion 5 {}, criterion 8 {} ({} report bytes)",
                               same2 ? "yes" : "no", same5 ? "yes" : "no", same8 ? "yes" : "no",
                               c8.outcome.fingerprint.size()),
                   {}};
  });
  report(9, "determinism", c9.outcome, c9.seconds, 0.0);
  const Timed c10 = timed(no_look_ahead);
  report(10, "no look-ahead", c10.outcome, c10.seconds, 0.0);

  std::cout << fmt::format("{} of 10 criteria passed", 10 - failures) << std::endl;
  return failures == 0 ? 0 : 1;
}
