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

#include "tplvm/folio.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "tplvm/errors.hpp"
#include "tplvm/kernels.hpp"

namespace tplvm {
namespace {

double condition_number(const Eigen::MatrixXd& sigma) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
}

// Sigma_FF^{-1} 1 normalized, on the index subset `free`.
Eigen::VectorXd closed_form(const Eigen::MatrixXd& sigma, const std::vector<Eigen::Index>& free) {
  const Eigen::Index k = static_cast<Eigen::Index>(free.size());
  Eigen::MatrixXd sub(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) sub(i, j) = sigma(free[static_cast<std::size_t>(i)], free[static_cast<std::size_t>(j)]);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(sub);
  if (llt.info() != Eigen::Success) throw NumericalError("min_variance_weights: covariance is not positive definite");
  const Eigen::VectorXd x = llt.solve(Eigen::VectorXd::Ones(k));
  const double denom = x.sum();
  if (!(denom > 0.0) || !std::isfinite(denom)) throw NumericalError("min_variance_weights: 1' Sigma^{-1} 1 is not positive");
  Eigen::VectorXd w = Eigen::VectorXd::Zero(sigma.rows());
  for (Eigen::Index i = 0; i < k; ++i) w(free[static_cast<std::size_t>(i)]) = x(i) / denom;
  return w;
}

Eigen::VectorXd long_only_active_set(const Eigen::MatrixXd& sigma) {
  const Eigen::Index n = sigma.rows();
  std::vector<bool> at_zero(static_cast<std::size_t>(n), false);
  Eigen::VectorXd w = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  const double scale = sigma.diagonal().maxCoeff();

  for (Eigen::Index iter = 0; iter < 50 * n + 50; ++iter) {
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!at_zero[static_cast<std::size_t>(i)]) free.push_back(i);
    }
    const Eigen::VectorXd target = closed_form(sigma, free);

    double alpha = 1.0;
    Eigen::Index blocking = -1;
    for (Eigen::Index i : free) {
      if (target(i) < 0.0) {
        const double a = w(i) / (w(i) - target(i));
        if (a < alpha) {
          alpha = a;
          blocking = i;
        }
      }
    }

    if (blocking < 0) {
      w = target;
      // KKT: every bound weight must have (Sigma w)_i >= w' Sigma w.
      const Eigen::VectorXd grad = sigma * w;
      const double level = w.dot(grad);
      Eigen::Index release = -1;
      double worst = -1e-13 * scale;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (at_zero[static_cast<std::size_t>(i)] && grad(i) - level < worst) {
          worst = grad(i) - level;
          release = i;
        }
      }
      if (release < 0) return w;
      at_zero[static_cast<std::size_t>(release)] = false;
      continue;
    }

    w += alpha * (target - w);
    w(blocking) = 0.0;
    at_zero[static_cast<std::size_t>(blocking)] = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (w(i) < 0.0) {
        w(i) = 0.0;
        at_zero[static_cast<std::size_t>(i)] = true;
      }
    }
  }
  throw NumericalError("min_variance_weights: active-set iteration did not terminate");
}

}  // namespace

const char* to_string(CovarianceSource source) noexcept {
  switch (source) {
    case CovarianceSource::GPLVM: return "gplvm";
    case CovarianceSource::TPLVM: return "tplvm";
    case CovarianceSource::Sample: return "samplecov";
  }
  return "unknown";
}

CovarianceEstimate covariance_from_lvm(const FittedLVM& model, CovarianceMode mode) {
  if (!model.fitted()) throw StateError("covariance_from_lvm: model has not been fitted");
  const KernelMatrix km = kernel_matrix(model.kernel, model.latent, true);
  CovarianceEstimate est;
  est.sigma = km.values();
  est.source = model.model == ModelKind::GPLVM ? CovarianceSource::GPLVM : CovarianceSource::TPLVM;
  est.diagnostics.objective = model.objective;
  est.diagnostics.nu = model.nu;
  est.diagnostics.jitter = km.jitter_used();
  if (mode == CovarianceMode::Predictive && model.model == ModelKind::TPLVM && model.nu) {
    const double n = static_cast<double>(model.latent.rows() * model.columns);
    est.sigma *= (*model.nu + model.quad_form - 2.0) / (*model.nu + n - 2.0);
  }
  est.diagnostics.condition_number = condition_number(est.sigma);
  return est;
}

CovarianceEstimate sample_covariance(const Eigen::MatrixXd& returns, double jitter) {
  if (returns.rows() < 2 || returns.cols() < 1) throw InputError("sample_covariance needs at least two observations");
  const Eigen::MatrixXd centred = returns.rowwise() - returns.colwise().mean();
  Eigen::MatrixXd cov = centred.transpose() * centred / static_cast<double>(returns.rows() - 1);
  const KernelMatrix km = factorize_with_jitter(std::move(cov), jitter);
  CovarianceEstimate est;
  est.sigma = km.values();
  est.source = CovarianceSource::Sample;
  est.diagnostics.jitter = km.jitter_used();
  est.diagnostics.condition_number = condition_number(est.sigma);
  return est;
}

namespace {

double ordered_sum(const Eigen::VectorXd& w) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) s += w(i);
  return s;
}

// Steps w(i) one ulp at a time toward an ordered sum of exactly 1.
bool walk_to_one(Eigen::VectorXd& w, Eigen::Index i, int max_steps) {
  for (int step = 0; step < max_steps; ++step) {
    const double s = ordered_sum(w);
    if (s == 1.0) return true;
    w(i) = std::nextafter(w(i), s < 1.0 ? std::numeric_limits<double>::infinity()
                                        : -std::numeric_limits<double>::infinity());
  }
  return ordered_sum(w) == 1.0;
}

}  // namespace

void normalize_exact(Eigen::VectorXd& w) {
  const double total = w.sum();
  if (!(std::abs(total) > 0.0) || !std::isfinite(total)) throw NumericalError("weights cannot be normalized");
  w /= total;
  Eigen::Index big = 0;
  w.cwiseAbs().maxCoeff(&big);
  for (int pass = 0; pass < 4; ++pass) {
    const double s = ordered_sum(w);
    if (s == 1.0) return;
    w(big) += 1.0 - s;
  }
  // The last addend controls the final rounding of the ordered sum.
  const Eigen::Index last = w.size() - 1;
  const double head = ordered_sum(w.head(last));
  const Eigen::VectorXd saved = w;
  w(last) = 1.0 - head;
  if (walk_to_one(w, last, 64)) return;
  w = saved;
  if (walk_to_one(w, big, 64)) return;
  throw NumericalError("weights cannot be normalized to an exact unit sum");
}

Eigen::VectorXd min_variance_weights(const Eigen::MatrixXd& sigma, bool long_only) {
  if (sigma.rows() < 1 || sigma.rows() != sigma.cols()) throw InputError("min_variance_weights: square covariance required");
  if (!sigma.allFinite()) throw InputError("min_variance_weights: non-finite covariance");
  Eigen::VectorXd w;
  if (long_only) {
    w = long_only_active_set(sigma);
  } else {
    std::vector<Eigen::Index> all(static_cast<std::size_t>(sigma.rows()));
    for (Eigen::Index i = 0; i < sigma.rows(); ++i) all[static_cast<std::size_t>(i)] = i;
    w = closed_form(sigma, all);
  }
  normalize_exact(w);
  return w;
}

PortfolioWeights min_variance_weights(const CovarianceEstimate& cov, bool long_only) {
  PortfolioWeights out;
  out.weights = min_variance_weights(cov.sigma, long_only);
  out.long_only = long_only;
  if (cov.window) out.as_of = cov.window->end;
  return out;
}

PortfolioMetrics portfolio_metrics(std::span<const double> returns, int periods_per_year) {
  const std::size_t t = returns.size();
  if (t < 2) throw InputError("portfolio_metrics needs at least two returns");
  if (periods_per_year < 1) throw InputError("periods_per_year must be positive");
  const double p = static_cast<double>(periods_per_year);
  double sum = 0.0;
  for (double r : returns) sum += r;
  const double mean = sum / static_cast<double>(t);
  PortfolioMetrics m;
  m.ret = p / static_cast<double>(t) * sum;
  const auto [lo, hi] = std::minmax_element(returns.begin(), returns.end());
  if (*lo == *hi) {
    m.risk = 0.0;
  } else {
    double ss = 0.0;
    for (double r : returns) ss += (r - mean) * (r - mean);
    m.risk = std::sqrt(p / static_cast<double>(t - 1) * ss);
  }
  if (m.risk > 0.0) m.rr = m.ret / m.risk;
  return m;
}

SummaryStats summary_stats(std::span<const double> returns, int periods_per_year) {
  const std::size_t t = returns.size();
  if (t < 4) throw InputError("summary_stats needs at least four returns");
  const auto [lo, hi] = std::minmax_element(returns.begin(), returns.end());
  if (*lo == *hi) throw InputError("summary_stats: series has zero variance");
  const double n = static_cast<double>(t);
  double sum = 0.0;
  for (double r : returns) sum += r;
  const double mean = sum / n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double r : returns) {
    const double d = r - mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  const double sample_var = m2 / (n - 1.0);
  m2 /= n;
  m3 /= n;
  m4 /= n;
  SummaryStats s;
  s.mean_ann = static_cast<double>(periods_per_year) * mean;
  s.std_ann = std::sqrt(static_cast<double>(periods_per_year) * sample_var);
  s.rr = s.mean_ann / s.std_ann;
  s.skew = m3 / std::pow(m2, 1.5);
  s.kurtosis = m4 / (m2 * m2);
  return s;
}

}  // namespace tplvm
