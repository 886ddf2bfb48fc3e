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

#include <random>

#include <benchmark/benchmark.h>

#include "tplvm/backtest.hpp"
#include "tplvm/data_io.hpp"
#include "tplvm/folio.hpp"
#include "tplvm/kernels.hpp"
#include "tplvm/lvm.hpp"

namespace {

using namespace tplvm;

Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  }
  return m;
}

Eigen::MatrixXd synthetic_rows(int assets, int periods) {
  SyntheticSpec spec;
  spec.n_assets = assets;
  spec.n_periods = periods;
  return make_synthetic(spec).panel.values.transpose();
}

void BM_KernelMatrix(benchmark::State& state) {
  const Eigen::MatrixXd x = gaussian(state.range(0), 2, 1);
  const auto spec = KernelSpec::exponential(1.0, 1.0, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(kernel_matrix(spec, x, true));
}
BENCHMARK(BM_KernelMatrix)->Arg(16)->Arg(64)->Arg(256);

void BM_LoglikGrad(benchmark::State& state, ModelKind model) {
  const Eigen::Index n = state.range(0);
  const Eigen::MatrixXd y = synthetic_rows(static_cast<int>(n), 120);
  const Eigen::MatrixXd x = gaussian(n, 1, 2);
  const auto spec = KernelSpec::exponential(0.0025, 1.0, 0.0005);
  const std::optional<double> nu = model == ModelKind::TPLVM ? std::optional<double>(5.0) : std::nullopt;
  for (auto _ : state) benchmark::DoNotOptimize(loglik_grad(model, y, x, spec, nu));
}
BENCHMARK_CAPTURE(BM_LoglikGrad, gplvm, ModelKind::GPLVM)->Arg(16)->Arg(64);
BENCHMARK_CAPTURE(BM_LoglikGrad, tplvm, ModelKind::TPLVM)->Arg(16)->Arg(64);

void BM_FitMle(benchmark::State& state, ModelKind model) {
  const Eigen::MatrixXd y = synthetic_rows(16, 120);
  LvmConfig c;
  c.model = model;
  c.optimizer.restarts = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(fit_mle(y, c));
}
BENCHMARK_CAPTURE(BM_FitMle, gplvm, ModelKind::GPLVM)->Arg(1)->Arg(5)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_FitMle, tplvm, ModelKind::TPLVM)->Arg(1)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_MinVariance(benchmark::State& state) {
  const Eigen::Index d = state.range(0);
  const Eigen::MatrixXd a = gaussian(d, d + 5, 3);
  Eigen::MatrixXd sigma = a * a.transpose() / static_cast<double>(d);
  sigma.diagonal().array() += 0.05;
  const bool long_only = state.range(1) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(min_variance_weights(sigma, long_only));
}
BENCHMARK(BM_MinVariance)->Args({16, 0})->Args({16, 1})->Args({64, 0})->Args({64, 1});

void BM_BacktestSampleCov(benchmark::State& state) {
  SyntheticSpec spec;
  const ReturnsPanel panel = make_synthetic(spec).panel;
  BacktestConfig c;
  c.model = BacktestModel::SampleCov;
  for (auto _ : state) benchmark::DoNotOptimize(run_backtest(panel, c));
}
BENCHMARK(BM_BacktestSampleCov)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
