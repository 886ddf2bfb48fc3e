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

#include "tplvm/backtest.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <thread>

#include <fmt/format.h>

#include "tplvm/errors.hpp"
#include "tplvm/seed.hpp"

namespace tplvm {

const char* to_string(BacktestModel model) noexcept {
  switch (model) {
    case BacktestModel::GPLVM: return "gplvm";
    case BacktestModel::TPLVM: return "tplvm";
    case BacktestModel::SampleCov: return "samplecov";
  }
  return "unknown";
}

BacktestModel parse_backtest_model(const std::string& name) {
  if (name == "gplvm") return BacktestModel::GPLVM;
  if (name == "tplvm") return BacktestModel::TPLVM;
  if (name == "samplecov") return BacktestModel::SampleCov;
  throw ConfigError(fmt::format("unknown model '{}' (expected gplvm, tplvm or samplecov)", name));
}

void BacktestConfig::validate(const ReturnsPanel& panel) const {
  panel.validate();
  const Eigen::Index assets = panel.asset_count();
  if (window < assets + 2) {
    throw ConfigError(fmt::format("window ({}) must be at least the asset count plus 2 ({})", window, assets + 2));
  }
  if (panel.periods() < window + 1) {
    throw ConfigError(fmt::format("insufficient history: {} periods for a window of {}", panel.periods(), window));
  }
  if (rebalance_every < 1) throw ConfigError("rebalance_every must be at least 1");
  if (periods_per_year < 1) throw ConfigError("periods_per_year must be positive");
  if (threads < 0) throw ConfigError("threads must be non-negative");
  if (model != BacktestModel::SampleCov && assets > 1) lvm.validate(assets, window);

  const Date first = panel.dates[static_cast<std::size_t>(window)];
  const Date last = panel.dates.back();
  for (const auto& s : splits) {
    if (s.label.empty()) throw ConfigError("split label must not be empty");
    if (!(s.start <= s.end)) throw ConfigError(fmt::format("split '{}' has an empty date range", s.label));
    if (s.start < panel.dates.front() || last < s.end) {
      throw ConfigError(fmt::format("split '{}' lies outside the data range", s.label));
    }
    std::size_t count = 0;
    for (Eigen::Index t = window; t < panel.periods(); ++t) {
      const Date& d = panel.dates[static_cast<std::size_t>(t)];
      if (s.start <= d && d <= s.end) ++count;
    }
    if (count < 2) {
      throw ConfigError(fmt::format("split '{}' covers {} realized periods between {} and {}; at least 2 are needed",
                                    s.label, count, format_date(first), format_date(last)));
    }
  }
}

std::vector<PeriodSplit> default_splits(const ReturnsPanel& panel, Eigen::Index window) {
  const Eigen::Index realized = panel.periods() - window;
  if (realized < 4) throw ConfigError("too few realized periods to split into halves");
  const Eigen::Index mid = window + realized / 2;
  const auto date = [&](Eigen::Index i) { return panel.dates[static_cast<std::size_t>(i)]; };
  return {{"Anterior half", date(window), date(mid - 1)}, {"Posterior half", date(mid), date(panel.periods() - 1)}};
}

namespace {

struct DateFit {
  Eigen::VectorXd weights;
  RebalanceDiagnostics diagnostics;
};

DateFit fit_for_date(const ReturnsPanel& panel, const BacktestConfig& config, Eigen::Index t) {
  DateFit out;
  const Eigen::Index assets = panel.asset_count();
  if (assets == 1) {
    out.weights = Eigen::VectorXd::Ones(1);
    return out;
  }
  const Eigen::MatrixXd window = panel.values.middleRows(t - config.window, config.window);
  CovarianceEstimate cov;
  if (config.model == BacktestModel::SampleCov) {
    cov = sample_covariance(window, config.lvm.jitter);
  } else {
    LvmConfig lvm = config.lvm;
    lvm.model = config.model == BacktestModel::GPLVM ? ModelKind::GPLVM : ModelKind::TPLVM;
    lvm.optimizer.seed = derive_seed(config.seed, seed_stream::kRebalance, static_cast<std::uint64_t>(t));
    const FittedLVM model = fit(window.transpose(), lvm);
    cov = covariance_from_lvm(model, config.covariance_mode);
    out.diagnostics.converged = model.converged;
  }
  out.diagnostics.objective = cov.diagnostics.objective;
  out.diagnostics.nu = cov.diagnostics.nu;
  out.diagnostics.condition_number = cov.diagnostics.condition_number;
  out.weights = min_variance_weights(cov.sigma, config.long_only);
  return out;
}

void run_parallel(std::size_t count, int threads, const std::function<void(std::size_t)>& body) {
  unsigned workers = threads > 0 ? static_cast<unsigned>(threads) : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < count; i = next++) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

SplitMetrics metrics_for(const std::vector<Rebalance>& rebalances, const std::string& label, Date start, Date end,
                         int periods_per_year) {
  std::vector<double> r;
  for (const auto& rb : rebalances) {
    if (start <= rb.realized_date && rb.realized_date <= end) r.push_back(rb.realized_return);
  }
  SplitMetrics m;
  m.label = label;
  m.start = start;
  m.end = end;
  m.count = r.size();
  m.metrics = portfolio_metrics(r, periods_per_year);
  return m;
}

}  // namespace

Eigen::VectorXd rebalance_weights(const ReturnsPanel& panel, const BacktestConfig& config, Eigen::Index t) {
  if (t < config.window || t >= panel.periods()) throw InputError("rebalance index out of range");
  return fit_for_date(panel, config, t).weights;
}

BacktestReport run_backtest(const ReturnsPanel& panel, const BacktestConfig& config) {
  config.validate(panel);
  const Eigen::Index first = config.window;
  const Eigen::Index total = panel.periods();

  std::vector<Eigen::Index> refit_rows;
  for (Eigen::Index t = first; t < total; t += config.rebalance_every) refit_rows.push_back(t);

  struct Outcome {
    std::optional<DateFit> fit;
    std::string error;
  };
  std::vector<Outcome> outcomes(refit_rows.size());
  run_parallel(refit_rows.size(), config.threads, [&](std::size_t i) {
    try {
      outcomes[i].fit = fit_for_date(panel, config, refit_rows[i]);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::Config || e.kind() == ErrorKind::State) throw;
      outcomes[i].error = fmt::format("{} error: {}", to_string(e.kind()), e.what());
    }
  });

  BacktestReport report;
  report.model = to_string(config.model);
  report.window = config.window;
  report.long_only = config.long_only;
  report.periods_per_year = config.periods_per_year;
  report.assets = panel.assets;

  const Eigen::Index assets = panel.asset_count();
  Eigen::VectorXd held = Eigen::VectorXd::Constant(assets, 1.0 / static_cast<double>(assets));
  normalize_exact(held);
  std::size_t next_refit = 0;
  for (Eigen::Index t = first; t < total; ++t) {
    Rebalance rb;
    rb.index = t;
    rb.as_of = panel.dates[static_cast<std::size_t>(t - 1)];
    rb.realized_date = panel.dates[static_cast<std::size_t>(t)];
    if (next_refit < refit_rows.size() && refit_rows[next_refit] == t) {
      Outcome& o = outcomes[next_refit++];
      if (o.fit) {
        held = o.fit->weights;
        rb.diagnostics = std::move(o.fit->diagnostics);
      } else {
        rb.diagnostics.fallback = true;
        rb.diagnostics.converged = false;
        rb.diagnostics.error = std::move(o.error);
      }
    } else {
      rb.diagnostics.refit = false;
    }
    rb.weights = held;
    rb.realized_return = held.dot(panel.values.row(t).transpose());
    report.rebalances.push_back(std::move(rb));
  }

  recompute_metrics(report, config.splits.empty() ? default_splits(panel, config.window) : config.splits);
  return report;
}

std::vector<double> realized_returns(const BacktestReport& report) {
  std::vector<double> r;
  r.reserve(report.rebalances.size());
  for (const auto& rb : report.rebalances) r.push_back(rb.realized_return);
  return r;
}

void recompute_metrics(BacktestReport& report, const std::vector<PeriodSplit>& splits) {
  if (report.rebalances.size() < 2) throw InputError("report needs at least two realized returns");
  report.per_split.clear();
  for (const auto& s : splits) {
    report.per_split.push_back(metrics_for(report.rebalances, s.label, s.start, s.end, report.periods_per_year));
  }
  report.whole = metrics_for(report.rebalances, "Whole period", report.rebalances.front().realized_date,
                             report.rebalances.back().realized_date, report.periods_per_year);
}

ComparisonTable compare_reports(const BacktestReport& a, const BacktestReport& b) {
  if (a.rebalances.size() != b.rebalances.size()) throw InputError("reports cover different numbers of dates");
  for (std::size_t i = 0; i < a.rebalances.size(); ++i) {
    if (a.rebalances[i].realized_date != b.rebalances[i].realized_date) {
      throw InputError(fmt::format("reports differ at realized date {} vs {}", format_date(a.rebalances[i].realized_date),
                                   format_date(b.rebalances[i].realized_date)));
    }
  }
  if (a.per_split.size() != b.per_split.size()) throw InputError("reports use different period splits");
  ComparisonTable table;
  table.name_a = portfolio_heading(a.model);
  table.name_b = portfolio_heading(b.model);
  for (std::size_t i = 0; i <= a.per_split.size(); ++i) {
    const SplitMetrics& sa = i < a.per_split.size() ? a.per_split[i] : a.whole;
    const SplitMetrics& sb = i < b.per_split.size() ? b.per_split[i] : b.whole;
    if (sa.label != sb.label || sa.start != sb.start || sa.end != sb.end) {
      throw InputError(fmt::format("split '{}' does not match '{}'", sa.label, sb.label));
    }
    table.rows.push_back({sa.label, sa.start, sa.end, sa.metrics, sb.metrics});
  }
  return table;
}

std::string portfolio_heading(const std::string& model) {
  if (model == "gplvm") return "Port_G";
  if (model == "tplvm") return "Port_t";
  if (model == "samplecov") return "Port_S";
  return model;
}

namespace {

std::string pct(double v) { return fmt::format("{:.2f}%", 100.0 * v); }
std::string ratio(const std::optional<double>& v) { return v ? fmt::format("{:.2f}", *v) : std::string("n/a"); }
std::string month_year(Date d) {
  static constexpr const char* kMonths[] = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                            "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
  return fmt::format("{} {}", kMonths[static_cast<unsigned>(d.month()) - 1], static_cast<int>(d.year()));
}
std::string section(const std::string& label, Date start, Date end) {
  return fmt::format("{} ({} - {})", label, month_year(start), month_year(end));
}

constexpr int kLabelWidth = 8;
constexpr int kColumnWidth = 12;

}  // namespace

std::string format_comparison(const ComparisonTable& table) {
  std::string out = fmt::format("{:<{}}{:>{}}{:>{}}{:>{}}\n", "", kLabelWidth, table.name_a, kColumnWidth, table.name_b,
                                kColumnWidth, "Difference", kColumnWidth);
  const auto line = [&](const char* name, const std::string& a, const std::string& b, const std::string& d) {
    out += fmt::format("{:<{}}{:>{}}{:>{}}{:>{}}\n", name, kLabelWidth, a, kColumnWidth, b, kColumnWidth, d, kColumnWidth);
  };
  for (const auto& row : table.rows) {
    out += section(row.label, row.start, row.end) + '\n';
    line("Return", pct(row.a.ret), pct(row.b.ret), pct(row.b.ret - row.a.ret));
    line("Risk", pct(row.a.risk), pct(row.b.risk), pct(row.b.risk - row.a.risk));
    std::optional<double> diff;
    if (row.a.rr && row.b.rr) diff = *row.b.rr - *row.a.rr;
    line("R/R", ratio(row.a.rr), ratio(row.b.rr), ratio(diff));
  }
  return out;
}

std::string format_report_table(const BacktestReport& report) {
  std::string out = fmt::format("{:<{}}{:>{}}\n", "", kLabelWidth, portfolio_heading(report.model), kColumnWidth);
  const auto block = [&](const SplitMetrics& s) {
    out += section(s.label, s.start, s.end) + '\n';
    out += fmt::format("{:<{}}{:>{}}\n", "Return", kLabelWidth, pct(s.metrics.ret), kColumnWidth);
    out += fmt::format("{:<{}}{:>{}}\n", "Risk", kLabelWidth, pct(s.metrics.risk), kColumnWidth);
    out += fmt::format("{:<{}}{:>{}}\n", "R/R", kLabelWidth, ratio(s.metrics.rr), kColumnWidth);
  };
  for (const auto& s : report.per_split) block(s);
  block(report.whole);
  return out;
}

}  // namespace tplvm
