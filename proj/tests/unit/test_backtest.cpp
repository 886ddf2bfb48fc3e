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

#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "tplvm/backtest.hpp"
#include "tplvm/data_io.hpp"
#include "tplvm/errors.hpp"
#include "tplvm/report_io.hpp"

#ifndef TPLVM_TEST_DATA_DIR
#error "TPLVM_TEST_DATA_DIR must be defined"
#endif

namespace tplvm {
namespace {

ReturnsPanel small_panel(std::uint64_t seed = 0, int assets = 4, int periods = 60) {
  SyntheticSpec spec;
  spec.seed = seed;
  spec.n_assets = assets;
  spec.n_periods = periods;
  return make_synthetic(spec).panel;
}

BacktestConfig sample_config(Eigen::Index window = 24) {
  BacktestConfig c;
  c.window = window;
  c.model = BacktestModel::SampleCov;
  c.threads = 1;
  return c;
}

BacktestConfig lvm_config(BacktestModel model, Eigen::Index window = 24) {
  BacktestConfig c = sample_config(window);
  c.model = model;
  c.lvm.optimizer.restarts = 1;
  c.lvm.optimizer.max_iters = 200;
  return c;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

TEST(Backtest, WindowAccounting) {
  const auto panel = small_panel();
  const auto r = run_backtest(panel, sample_config());
  ASSERT_EQ(r.rebalances.size(), static_cast<std::size_t>(panel.periods() - 24));
  EXPECT_EQ(r.rebalances.front().index, 24);
  EXPECT_EQ(r.rebalances.front().as_of, panel.dates[23]);
  EXPECT_EQ(r.rebalances.front().realized_date, panel.dates[24]);
  EXPECT_EQ(r.whole.count, r.rebalances.size());
}

TEST(Backtest, RealizedReturnIsWeightedAssetReturn) {
  const auto panel = small_panel();
  const auto r = run_backtest(panel, sample_config());
  for (const auto& rb : r.rebalances) {
    EXPECT_EQ(rb.realized_return, rb.weights.dot(panel.values.row(rb.index).transpose()));
    double s = 0.0;
    for (Eigen::Index i = 0; i < rb.weights.size(); ++i) s += rb.weights(i);
    EXPECT_EQ(s, 1.0);
  }
}

TEST(Backtest, WholePeriodMetricsRecomputeFromRealizedReturns) {
  const auto r = run_backtest(small_panel(), sample_config());
  const auto m = portfolio_metrics(realized_returns(r), 12);
  EXPECT_NEAR(r.whole.metrics.ret, m.ret, 1e-12);
  EXPECT_NEAR(r.whole.metrics.risk, m.risk, 1e-12);
  EXPECT_NEAR(*r.whole.metrics.rr, *m.rr, 1e-12);
}

TEST(Backtest, SplitMetricsAreSubsequenceMetrics) {
  const auto r = run_backtest(small_panel(), sample_config());
  ASSERT_EQ(r.per_split.size(), 2u);
  EXPECT_EQ(r.per_split[0].label, "Anterior half");
  EXPECT_EQ(r.per_split[1].label, "Posterior half");
  EXPECT_EQ(r.per_split[0].count + r.per_split[1].count, r.rebalances.size());
  for (const auto& s : r.per_split) {
    std::vector<double> sub;
    for (const auto& rb : r.rebalances) {
      if (s.start <= rb.realized_date && rb.realized_date <= s.end) sub.push_back(rb.realized_return);
    }
    const auto m = portfolio_metrics(sub, 12);
    EXPECT_EQ(s.metrics.ret, m.ret);
    EXPECT_EQ(s.metrics.risk, m.risk);
  }
}

TEST(Backtest, ExplicitSplits) {
  const auto panel = small_panel();
  auto c = sample_config();
  c.splits = {{"First year", panel.dates[24], panel.dates[35]}, {"Rest", panel.dates[36], panel.dates.back()}};
  const auto r = run_backtest(panel, c);
  ASSERT_EQ(r.per_split.size(), 2u);
  EXPECT_EQ(r.per_split[0].count, 12u);
  EXPECT_EQ(r.per_split[0].label, "First year");
}

TEST(Backtest, ValidationErrors) {
  const auto panel = small_panel();
  auto c = sample_config(5);
  EXPECT_THROW(run_backtest(panel, c), ConfigError);  // window < assets + 2
  c = sample_config(60);
  EXPECT_THROW(run_backtest(panel, c), ConfigError);  // no history left
  c = sample_config();
  c.splits = {{"Empty", panel.dates[40], panel.dates[30]}};
  EXPECT_THROW(run_backtest(panel, c), ConfigError);
  c.splits = {{"Burn-in only", panel.dates[0], panel.dates[10]}};
  EXPECT_THROW(run_backtest(panel, c), ConfigError);
  c.splits = {{"Outside", panel.dates[30], add_months_end(panel.dates.back(), 3)}};
  EXPECT_THROW(run_backtest(panel, c), ConfigError);
  EXPECT_THROW(parse_backtest_model("garch"), ConfigError);
}

TEST(Backtest, OneAssetHoldsEverything) {
  const auto panel = small_panel(1, 1, 40);
  const auto r = run_backtest(panel, sample_config(10));
  for (const auto& rb : r.rebalances) {
    EXPECT_EQ(rb.weights(0), 1.0);
    EXPECT_EQ(rb.realized_return, panel.values(rb.index, 0));
  }
}

TEST(Backtest, SampleCovarianceReportIsReproducible) {
  const auto panel = small_panel(2, 6, 80);
  auto c = sample_config(30);
  c.seed = 17;
  EXPECT_EQ(report_to_json(run_backtest(panel, c)), report_to_json(run_backtest(panel, c)));
}

TEST(Backtest, ThreadCountDoesNotChangeResults) {
  const auto panel = small_panel(3, 5, 40);
  auto c = lvm_config(BacktestModel::TPLVM, 20);
  c.threads = 1;
  const auto a = report_to_json(run_backtest(panel, c));
  c.threads = 3;
  EXPECT_EQ(a, report_to_json(run_backtest(panel, c)));
}

TEST(Backtest, NoLookAhead) {
  const auto panel = small_panel(4, 5, 50);
  std::mt19937_64 rng(8);
  std::normal_distribution<double> normal(0.0, 0.05);
  for (BacktestModel model : {BacktestModel::SampleCov, BacktestModel::TPLVM}) {
    const auto c = lvm_config(model, 20);
    for (int trial = 0; trial < 4; ++trial) {
      const Eigen::Index t = 20 + static_cast<Eigen::Index>(rng() % 30);
      const Eigen::VectorXd before = rebalance_weights(panel, c, t);
      ReturnsPanel perturbed = panel;
      for (Eigen::Index row = t; row < panel.periods(); ++row) {
        for (Eigen::Index col = 0; col < panel.asset_count(); ++col) perturbed.values(row, col) += normal(rng);
      }
      EXPECT_EQ(before, rebalance_weights(perturbed, c, t));
    }
  }
}

TEST(Backtest, FitFailureFallsBackToPreviousWeights) {
  auto panel = small_panel(5, 4, 40);
  // asset 2 is flat through the first windows, so those LVM fits fail
  for (Eigen::Index row = 0; row < 22; ++row) panel.values(row, 2) = 0.0;
  const auto r = run_backtest(panel, lvm_config(BacktestModel::GPLVM, 20));
  ASSERT_TRUE(r.rebalances[0].diagnostics.fallback);
  EXPECT_FALSE(r.rebalances[0].diagnostics.error.empty());
  EXPECT_EQ(r.rebalances[0].weights, Eigen::VectorXd::Constant(4, 0.25));
  ASSERT_TRUE(r.rebalances[1].diagnostics.fallback);
  EXPECT_EQ(r.rebalances[1].weights, r.rebalances[0].weights);
  EXPECT_FALSE(r.rebalances.back().diagnostics.fallback);
}

TEST(Backtest, RebalanceEveryHoldsWeights) {
  auto c = sample_config();
  c.rebalance_every = 3;
  const auto r = run_backtest(small_panel(), c);
  for (std::size_t i = 0; i < r.rebalances.size(); ++i) {
    EXPECT_EQ(r.rebalances[i].diagnostics.refit, i % 3 == 0);
    if (i % 3 != 0) EXPECT_EQ(r.rebalances[i].weights, r.rebalances[i - 1].weights);
  }
}

TEST(Compare, IdenticalReportsHaveZeroDifferences) {
  const auto r = run_backtest(small_panel(), sample_config());
  const auto t = compare_reports(r, r);
  ASSERT_EQ(t.rows.size(), 3u);
  EXPECT_EQ(t.rows.back().label, "Whole period");
  for (const auto& row : t.rows) {
    EXPECT_EQ(row.b.ret - row.a.ret, 0.0);
    EXPECT_EQ(row.b.risk - row.a.risk, 0.0);
  }
  EXPECT_NE(format_comparison(t).find("0.00%"), std::string::npos);
}

TEST(Compare, SwappingArgumentsNegatesDifferences) {
  const auto panel = small_panel();
  const auto a = run_backtest(panel, sample_config());
  auto cl = sample_config();
  cl.long_only = true;
  const auto b = run_backtest(panel, cl);
  const auto ab = compare_reports(a, b);
  const auto ba = compare_reports(b, a);
  for (std::size_t i = 0; i < ab.rows.size(); ++i) {
    EXPECT_EQ(ab.rows[i].b.ret - ab.rows[i].a.ret, -(ba.rows[i].b.ret - ba.rows[i].a.ret));
    EXPECT_EQ(ab.rows[i].b.risk - ab.rows[i].a.risk, -(ba.rows[i].b.risk - ba.rows[i].a.risk));
  }
}

TEST(Compare, MismatchedDatesRejected) {
  const auto panel = small_panel();
  const auto a = run_backtest(panel, sample_config(24));
  const auto b = run_backtest(panel, sample_config(25));
  EXPECT_THROW(compare_reports(a, b), InputError);
}

TEST(Compare, TableLayoutGolden) {
  ComparisonTable t;
  t.name_a = portfolio_heading("gplvm");
  t.name_b = portfolio_heading("tplvm");
  ComparisonRow row;
  row.label = "Whole period";
  row.start = parse_date("2008-06-30");
  row.end = parse_date("2019-06-30");
  row.a = {0.0064, 0.1592, 0.0064 / 0.1592};
  row.b = {0.0187, 0.1493, 0.0187 / 0.1493};
  t.rows.push_back(row);
  EXPECT_EQ(format_comparison(t), read_file(std::string(TPLVM_TEST_DATA_DIR) + "/comparison_layout.txt"));
}

TEST(ReportTable, HasThreeSections) {
  const auto text = format_report_table(run_backtest(small_panel(), sample_config()));
  EXPECT_NE(text.find("Anterior half ("), std::string::npos);
  EXPECT_NE(text.find("Posterior half ("), std::string::npos);
  EXPECT_NE(text.find("Whole period ("), std::string::npos);
  EXPECT_NE(text.find("Port_S"), std::string::npos);
}

TEST(ReportJson, RoundTrip) {
  auto c = lvm_config(BacktestModel::TPLVM, 20);
  const auto r = run_backtest(small_panel(6, 4, 30), c);
  const auto text = report_to_json(r);
  const auto back = report_from_json(text);
  EXPECT_EQ(report_to_json(back), text);
  ASSERT_EQ(back.rebalances.size(), r.rebalances.size());
  EXPECT_EQ(back.rebalances[3].weights, r.rebalances[3].weights);
  EXPECT_EQ(back.rebalances[3].diagnostics.nu, r.rebalances[3].diagnostics.nu);
  EXPECT_THROW(report_from_json("{\"format\": \"other\"}"), IoError);
}

}  // namespace
}  // namespace tplvm
