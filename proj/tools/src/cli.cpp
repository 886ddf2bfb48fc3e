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

#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>
#include <system_error>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "tplvm/dates.hpp"
#include "tplvm/errors.hpp"
#include "tplvm/folio.hpp"
#include "tplvm/lvm.hpp"
#include "tplvm/model_io.hpp"
#include "tplvm/report_io.hpp"

namespace tplvm::cli {
namespace {

namespace fs = std::filesystem;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

long long to_int(const std::string& key, const std::string& value, long long lo) {
  long long v = 0;
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, v);
  if (ec != std::errc{} || ptr != end) throw ConfigError(fmt::format("{}: '{}' is not an integer", key, value));
  if (v < lo) throw ConfigError(fmt::format("{}: must be at least {} (got {})", key, lo, v));
  return v;
}

std::uint64_t to_uint(const std::string& key, const std::string& value) {
  std::uint64_t v = 0;
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, v);
  if (ec != std::errc{} || ptr != end) throw ConfigError(fmt::format("{}: '{}' is not a non-negative integer", key, value));
  return v;
}

double to_double(const std::string& key, const std::string& value) {
  double v = 0.0;
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, v);
  if (ec != std::errc{} || ptr != end || !std::isfinite(v)) {
    throw ConfigError(fmt::format("{}: '{}' is not a finite number", key, value));
  }
  return v;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError(fmt::format("{}: '{}' is not a boolean", key, value));
}

Date to_date(const std::string& key, const std::string& value) {
  try {
    return parse_date(value);
  } catch (const InputError& e) {
    throw ConfigError(fmt::format("{}: {}", key, e.what()));
  }
}

template <typename T>
T choose(const std::string& key, const std::string& value, std::initializer_list<std::pair<const char*, T>> options) {
  std::string names;
  for (const auto& [name, v] : options) {
    if (value == name) return v;
    names += names.empty() ? name : fmt::format(", {}", name);
  }
  throw ConfigError(fmt::format("{}: '{}' is not one of {}", key, value, names));
}

PeriodSplit to_split(const std::string& value) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto comma = value.find(',', start);
    parts.push_back(trim(std::string_view(value).substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (parts.size() != 3 || parts[0].empty()) throw ConfigError(fmt::format("split: expected 'label,start,end', got '{}'", value));
  return {parts[0], to_date("split", parts[1]), to_date("split", parts[2])};
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"data", [](RunConfig& c, const std::string&, const std::string& v) { c.data = v; }},
      {"kind", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.kind = choose<PanelKind>(k, v, {{"returns", PanelKind::Returns}, {"prices", PanelKind::Prices}});
       }},
      {"out", [](RunConfig& c, const std::string&, const std::string& v) { c.out = v; }},
      {"seed", [](RunConfig& c, const std::string& k, const std::string& v) { c.seed = to_uint(k, v); }},
      {"model", [](RunConfig& c, const std::string&, const std::string& v) {
         c.backtest.model = parse_backtest_model(v);
         if (c.backtest.model == BacktestModel::GPLVM) c.backtest.lvm.model = ModelKind::GPLVM;
         if (c.backtest.model == BacktestModel::TPLVM) c.backtest.lvm.model = ModelKind::TPLVM;
       }},
      {"window", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.backtest.window = to_int(k, v, 2);
         c.fit_window = c.backtest.window;
       }},
      {"latent_dim", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.backtest.lvm.latent_dim = static_cast<int>(to_int(k, v, 1));
       }},
      {"long_only", [](RunConfig& c, const std::string& k, const std::string& v) { c.backtest.long_only = to_bool(k, v); }},
      {"rebalance_every", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.backtest.rebalance_every = static_cast<int>(to_int(k, v, 1));
       }},
      {"periods_per_year", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.backtest.periods_per_year = static_cast<int>(to_int(k, v, 1));
       }},
      {"covariance_mode", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.backtest.covariance_mode =
             choose<CovarianceMode>(k, v, {{"prior", CovarianceMode::Prior}, {"predictive", CovarianceMode::Predictive}});
       }},
      {"threads", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.backtest.threads = static_cast<int>(to_int(k, v, 0));
       }},
      {"split", [](RunConfig& c, const std::string&, const std::string& v) { c.backtest.splits.push_back(to_split(v)); }},
      {"inference", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.backtest.lvm.inference = choose<InferenceMethod>(
             k, v, {{"mle", InferenceMethod::MLE}, {"variational", InferenceMethod::Variational}});
       }},
      {"mean_mode", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.backtest.lvm.mean_mode =
             choose<MeanMode>(k, v, {{"zero", MeanMode::Zero}, {"empirical", MeanMode::EmpiricalRow}});
       }},
      {"restarts", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.backtest.lvm.optimizer.restarts = static_cast<int>(to_int(k, v, 1));
       }},
      {"max_iters", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.backtest.lvm.optimizer.max_iters = static_cast<int>(to_int(k, v, 1));
       }},
      {"tol", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.backtest.lvm.optimizer.tol = to_double(k, v);
         if (!(c.backtest.lvm.optimizer.tol > 0.0)) throw ConfigError("tol: must be positive");
       }},
      {"nu", [](RunConfig& c, const std::string& k, const std::string& v) {
         const double nu = to_double(k, v);
         if (!(nu > 2.0)) throw ConfigError(fmt::format("nu: must exceed 2 (got {})", v));
         c.backtest.lvm.fixed_nu = nu;
       }},
      {"initial_nu", [](RunConfig& c, const std::string& k, const std::string& v) {
         const double nu = to_double(k, v);
         if (!(nu > 2.0)) throw ConfigError(fmt::format("initial_nu: must exceed 2 (got {})", v));
         c.backtest.lvm.initial_nu = nu;
       }},
      {"learn_noise", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.backtest.lvm.learn_noise = to_bool(k, v);
       }},
      {"jitter", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.backtest.lvm.jitter = to_double(k, v);
         if (c.backtest.lvm.jitter < 0.0) throw ConfigError("jitter: must be non-negative");
       }},
      {"mc_samples", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.backtest.lvm.mc_samples = static_cast<int>(to_int(k, v, 1));
       }},
      {"simulate.assets", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.synthetic.n_assets = static_cast<int>(to_int(k, v, 1));
       }},
      {"simulate.periods", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.synthetic.n_periods = static_cast<int>(to_int(k, v, 1));
       }},
      {"simulate.generator", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.synthetic.generator = choose<SyntheticGenerator>(
             k, v, {{"gaussian", SyntheticGenerator::GaussianFactor}, {"t", SyntheticGenerator::TFactor}});
       }},
      {"simulate.nu", [](RunConfig& c, const std::string& k, const std::string& v) { c.synthetic.nu = to_double(k, v); }},
      {"simulate.q_true", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.synthetic.q_true = static_cast<int>(to_int(k, v, 1));
       }},
      {"simulate.start", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.synthetic.start = to_date(k, v);
       }},
  };
  return table;
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

struct Failure {
  int status;
  std::string kind;
  std::string message;
};

Failure classify(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::Config: return {kExitConfig, "config", e.what()};
    case ErrorKind::Io: return {kExitIo, "io", e.what()};
    case ErrorKind::Input: return {kExitIo, "input", e.what()};
    case ErrorKind::Domain: return {kExitNumerical, "domain", e.what()};
    case ErrorKind::State: return {kExitNumerical, "state", e.what()};
    case ErrorKind::Numerical: return {kExitNumerical, "numerical", e.what()};
  }
  return {kExitNumerical, "numerical", e.what()};
}

// Outputs are staged in memory and only written once the command succeeded.
struct Outputs {
  std::vector<std::pair<std::string, std::string>> files;
  void add(std::string name, std::string content) { files.emplace_back(std::move(name), std::move(content)); }
};

void commit(const fs::path& dir, const Outputs& outputs) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(fmt::format("cannot create output directory {}: {}", dir.string(), ec.message()));
  std::vector<fs::path> staged;
  auto discard = [&] {
    for (const auto& p : staged) fs::remove(p, ec);
  };
  for (const auto& [name, content] : outputs.files) {
    const fs::path tmp = dir / (name + ".partial");
    std::ofstream f(tmp, std::ios::binary);
    f << content;
    f.close();
    staged.push_back(tmp);
    if (!f) {
      discard();
      throw IoError(fmt::format("cannot write {}", tmp.string()));
    }
  }
  for (std::size_t i = 0; i < staged.size(); ++i) {
    fs::rename(staged[i], dir / outputs.files[i].first, ec);
    if (ec) {
      discard();
      throw IoError(fmt::format("cannot finalize {}: {}", outputs.files[i].first, ec.message()));
    }
  }
}

fs::path require_out(const RunConfig& c) {
  if (!c.out) throw ConfigError("an output directory is required (--out or 'out = ...')");
  return *c.out;
}

ReturnsPanel require_panel(const RunConfig& c) {
  if (!c.data) throw ConfigError("an input panel is required (--data or 'data = ...')");
  return load_panel(*c.data, c.kind);
}

std::string num17(double v) { return fmt::format("{:.17g}", v); }

int cmd_fit(const RunConfig& c, std::ostream& out) {
  const fs::path dir = require_out(c);
  if (c.backtest.model == BacktestModel::SampleCov) throw ConfigError("fit: model must be gplvm or tplvm");
  ReturnsPanel panel = require_panel(c);
  if (c.fit_window) {
    if (*c.fit_window > panel.periods()) {
      throw ConfigError(fmt::format("window ({}) exceeds the {} available periods", *c.fit_window, panel.periods()));
    }
    panel = panel.slice(panel.periods() - *c.fit_window, panel.periods());
  }
  LvmConfig lvm = c.backtest.lvm;
  lvm.optimizer.seed = c.seed;
  const Eigen::MatrixXd y = panel.values.transpose();
  lvm.validate(y.rows(), y.cols());

  FittedLVM model;
  std::optional<ElboEstimate> elbo;
  if (lvm.inference == InferenceMethod::Variational) {
    auto v = fit_variational(y, lvm);
    model = std::move(v.model);
    elbo = v.elbo;
  } else {
    model = fit_mle(y, lvm);
  }

  Outputs o;
  std::ostringstream model_text;
  write_model(model_text, ModelFile{model, panel.assets});
  o.add("model.txt", model_text.str());

  std::string trace;
  for (double v : model.objective_trace) trace += num17(v) + '\n';
  o.add("trace.txt", trace);

  std::string s;
  const auto line = [&](const std::string& key, const std::string& value) { s += fmt::format("{:<14}{}\n", key, value); };
  line("model", to_string(model.model));
  line("inference", to_string(model.inference));
  line("assets", std::to_string(y.rows()));
  line("periods", fmt::format("{} ({} - {})", y.cols(), format_date(panel.dates.front()), format_date(panel.dates.back())));
  line("latent_dim", std::to_string(model.latent.cols()));
  line("theta1", fmt::format("{:.6g}", model.kernel.theta1()));
  line("theta2", fmt::format("{:.6g}", model.kernel.theta2()));
  line("noise_var", fmt::format("{:.6g}", model.kernel.noise_var()));
  if (model.nu) line("nu", fmt::format("{:.6g}", *model.nu));
  if (elbo) {
    line("elbo", fmt::format("{:.6f} +/- {:.6f} (kl {:.6f}, {} draws)", elbo->value, elbo->std_error, elbo->kl,
                             elbo->samples));
  } else {
    line("loglik", fmt::format("{:.6f}", model.objective));
  }
  line("converged", model.converged ? "true" : "false");
  line("restarts", std::to_string(model.restarts_used));
  line("steps", std::to_string(model.objective_trace.empty() ? 0 : model.objective_trace.size() - 1));
  o.add("summary.txt", s);

  commit(dir, o);
  out << s;
  return kExitOk;
}

int cmd_backtest(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const fs::path dir = require_out(c);
  const ReturnsPanel panel = require_panel(c);
  BacktestConfig bt = c.backtest;
  bt.seed = c.seed;
  bt.validate(panel);
  const BacktestReport report = run_backtest(panel, bt);
  for (const auto& rb : report.rebalances) {
    if (rb.diagnostics.fallback) {
      err << fmt::format("tplvm: warning: fallback weights at {}: {}\n", format_date(rb.as_of),
                         one_line(rb.diagnostics.error));
    }
  }
  Outputs o;
  o.add("report.json", report_to_json(report));
  const std::string table = format_report_table(report);
  o.add("report.txt", table);
  commit(dir, o);
  out << table;
  return kExitOk;
}

int cmd_compare(const RunConfig& c, const std::vector<std::string>& reports, std::ostream& out) {
  if (reports.size() != 2) throw ConfigError("compare: exactly two report files are required");
  const BacktestReport a = load_report_json(reports[0]);
  const BacktestReport b = load_report_json(reports[1]);
  const std::string text = format_comparison(compare_reports(a, b));
  if (c.out) {
    Outputs o;
    o.add("comparison.txt", text);
    commit(*c.out, o);
  }
  out << text;
  return kExitOk;
}

int cmd_simulate(const RunConfig& c, std::ostream& out) {
  const fs::path dir = require_out(c);
  SyntheticSpec spec = c.synthetic;
  spec.seed = c.seed;
  try {
    spec.validate();
  } catch (const InputError& e) {
    throw ConfigError(e.what());
  }
  const SyntheticPanel syn = make_synthetic(spec);
  Outputs o;
  std::ostringstream panel_text, cov_text;
  write_panel(panel_text, syn.panel);
  write_labelled_matrix(cov_text, syn.panel.assets, syn.true_cov);
  o.add("panel.csv", panel_text.str());
  o.add("truth_cov.csv", cov_text.str());
  commit(dir, o);
  out << fmt::format("simulated {} assets x {} periods ({} - {})\n", syn.panel.asset_count(), syn.panel.periods(),
                     format_date(syn.panel.dates.front()), format_date(syn.panel.dates.back()));
  return kExitOk;
}

int cmd_stats(const RunConfig& c, std::ostream& out) {
  const fs::path dir = require_out(c);
  const ReturnsPanel panel = require_panel(c);
  const std::string table = format_stats_table(panel, c.backtest.periods_per_year);
  Outputs o;
  o.add("stats.txt", table);
  commit(dir, o);
  out << table;
  return kExitOk;
}

}  // namespace

void apply_setting(RunConfig& config, const std::string& key, const std::string& value) {
  const auto& table = setters();
  const auto it = table.find(key);
  if (it == table.end()) throw ConfigError(fmt::format("unknown key '{}'", key));
  if (value.empty()) throw ConfigError(fmt::format("{}: empty value", key));
  it->second(config, key, value);
}

void apply_config_text(RunConfig& config, std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const std::string t = trim(std::string_view(line).substr(0, hash));
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError(fmt::format("config line {}: expected 'key = value'", line_no));
    try {
      apply_setting(config, trim(std::string_view(t).substr(0, eq)), trim(std::string_view(t).substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("config line {}: {}", line_no, e.what()));
    }
  }
}

std::vector<std::string> known_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, v] : setters()) keys.push_back(k);
  return keys;
}

std::string format_stats_table(const ReturnsPanel& panel, int periods_per_year) {
  std::size_t width = 8;
  for (const auto& a : panel.assets) width = std::max(width, a.size() + 2);
  std::string s = fmt::format("{:<{}}{:>10}{:>10}{:>10}{:>10}{:>10}\n", "Asset", width, "Mean", "Std.", "R/R", "Skew",
                              "Kurtosis");
  for (Eigen::Index j = 0; j < panel.asset_count(); ++j) {
    const Eigen::VectorXd col = panel.values.col(j);
    const std::string& label = panel.assets[static_cast<std::size_t>(j)];
    try {
      const SummaryStats st = summary_stats(std::span<const double>(col.data(), col.size()), periods_per_year);
      s += fmt::format("{:<{}}{:>10}{:>10}{:>10.2f}{:>10.2f}{:>10.2f}\n", label, width,
                       fmt::format("{:.2f}%", 100.0 * st.mean_ann), fmt::format("{:.2f}%", 100.0 * st.std_ann), st.rr,
                       st.skew, st.kurtosis);
    } catch (const InputError& e) {
      s += fmt::format("{:<{}}flagged: {}\n", label, width, e.what());
    }
  }
  return s;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gaussian and Student-t process latent variable models for portfolio covariance"};
  app.name("tplvm");
  app.require_subcommand(1, 1);

  // Flags are collected as settings and applied after the config file.
  std::vector<std::pair<std::string, std::string>> flags;
  std::string config_path;
  std::vector<std::string> report_paths;

  auto add_flag = [&](CLI::App* sub, const std::string& name, const std::string& key, const std::string& help) {
    sub->add_option_function<std::string>(name, [&flags, key](const std::string& v) { flags.emplace_back(key, v); }, help);
  };
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "flat key = value config file");
    add_flag(sub, "--seed", "seed", "global seed");
    add_flag(sub, "--out", "out", "output directory");
  };
  auto add_data = [&](CLI::App* sub) {
    add_flag(sub, "--data", "data", "CSV panel: date,ASSET1,ASSET2,...");
    add_flag(sub, "--kind", "kind", "returns or prices");
  };
  auto add_model = [&](CLI::App* sub) {
    add_flag(sub, "--model", "model", "gplvm, tplvm or samplecov");
    add_flag(sub, "--window", "window", "estimation window in periods");
    add_flag(sub, "--latent-dim", "latent_dim", "latent dimension Q");
  };

  CLI::App* fit = app.add_subcommand("fit", "fit a GPLVM or TPLVM to a returns panel");
  add_common(fit);
  add_data(fit);
  add_model(fit);

  CLI::App* backtest = app.add_subcommand("backtest", "rolling-window minimum-variance backtest");
  add_common(backtest);
  add_data(backtest);
  add_model(backtest);
  backtest->add_flag_function("--long-only", [&flags](std::int64_t) { flags.emplace_back("long_only", "true"); },
                              "forbid short positions");

  CLI::App* compare = app.add_subcommand("compare", "difference table of two backtest reports");
  add_common(compare);
  compare->add_option("reports", report_paths, "two report.json files")->expected(2);

  CLI::App* simulate = app.add_subcommand("simulate", "synthetic factor panel with its true covariance");
  add_common(simulate);

  CLI::App* stats = app.add_subcommand("stats", "per-asset summary statistics");
  add_common(stats);
  add_data(stats);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kExitOk;
    }
    err << fmt::format("tplvm: error kind=config exit={}: {}\n", kExitConfig, one_line(e.what()));
    return kExitConfig;
  }

  try {
    RunConfig config;
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      if (!f) throw IoError(fmt::format("cannot open config file {}", config_path));
      apply_config_text(config, f);
    }
    for (const auto& [k, v] : flags) apply_setting(config, k, v);

    if (fit->parsed()) return cmd_fit(config, out);
    if (backtest->parsed()) return cmd_backtest(config, out, err);
    if (compare->parsed()) return cmd_compare(config, report_paths, out);
    if (simulate->parsed()) return cmd_simulate(config, out);
    return cmd_stats(config, out);
  } catch (const Error& e) {
    const Failure f = classify(e);
    err << fmt::format("tplvm: error kind={} exit={}: {}\n", f.kind, f.status, one_line(f.message));
    return f.status;
  } catch (const std::exception& e) {
    err << fmt::format("tplvm: error kind=internal exit={}: {}\n", kExitNumerical, one_line(e.what()));
    return kExitNumerical;
  }
}

}  // namespace tplvm::cli
