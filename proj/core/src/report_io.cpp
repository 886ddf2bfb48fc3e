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

#include "tplvm/report_io.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "tplvm/errors.hpp"

namespace tplvm {
namespace {

using json = nlohmann::ordered_json;

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> opt_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

json metrics_json(const SplitMetrics& s) {
  json j;
  j["label"] = s.label;
  j["start"] = format_date(s.start);
  j["end"] = format_date(s.end);
  j["count"] = s.count;
  j["ret"] = s.metrics.ret;
  j["risk"] = s.metrics.risk;
  j["rr"] = opt(s.metrics.rr);
  return j;
}

SplitMetrics metrics_from(const json& j) {
  SplitMetrics s;
  s.label = j.at("label").get<std::string>();
  s.start = parse_date(j.at("start").get<std::string>());
  s.end = parse_date(j.at("end").get<std::string>());
  s.count = j.at("count").get<std::size_t>();
  s.metrics.ret = j.at("ret").get<double>();
  s.metrics.risk = j.at("risk").get<double>();
  s.metrics.rr = opt_from(j.at("rr"));
  return s;
}

}  // namespace

std::string report_to_json(const BacktestReport& report) {
  json j;
  j["format"] = "tplvm-backtest-1";
  j["model"] = report.model;
  j["window"] = report.window;
  j["long_only"] = report.long_only;
  j["periods_per_year"] = report.periods_per_year;
  j["assets"] = report.assets;
  json rebalances = json::array();
  for (const auto& rb : report.rebalances) {
    json r;
    r["index"] = rb.index;
    r["as_of"] = format_date(rb.as_of);
    r["realized_date"] = format_date(rb.realized_date);
    r["weights"] = std::vector<double>(rb.weights.data(), rb.weights.data() + rb.weights.size());
    r["realized_return"] = rb.realized_return;
    json d;
    d["refit"] = rb.diagnostics.refit;
    d["fallback"] = rb.diagnostics.fallback;
    d["error"] = rb.diagnostics.error;
    d["objective"] = opt(rb.diagnostics.objective);
    d["nu"] = opt(rb.diagnostics.nu);
    d["condition_number"] = opt(rb.diagnostics.condition_number);
    d["converged"] = rb.diagnostics.converged;
    r["diagnostics"] = std::move(d);
    rebalances.push_back(std::move(r));
  }
  j["rebalances"] = std::move(rebalances);
  json splits = json::array();
  for (const auto& s : report.per_split) splits.push_back(metrics_json(s));
  j["per_split"] = std::move(splits);
  j["whole"] = metrics_json(report.whole);
  return j.dump(2) + '\n';
}

BacktestReport report_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    if (j.at("format").get<std::string>() != "tplvm-backtest-1") throw IoError("report: unsupported format tag");
    BacktestReport report;
    report.model = j.at("model").get<std::string>();
    report.window = j.at("window").get<Eigen::Index>();
    report.long_only = j.at("long_only").get<bool>();
    report.periods_per_year = j.at("periods_per_year").get<int>();
    report.assets = j.at("assets").get<std::vector<std::string>>();
    for (const auto& r : j.at("rebalances")) {
      Rebalance rb;
      rb.index = r.at("index").get<Eigen::Index>();
      rb.as_of = parse_date(r.at("as_of").get<std::string>());
      rb.realized_date = parse_date(r.at("realized_date").get<std::string>());
      const auto w = r.at("weights").get<std::vector<double>>();
      rb.weights = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
      rb.realized_return = r.at("realized_return").get<double>();
      const json& d = r.at("diagnostics");
      rb.diagnostics.refit = d.at("refit").get<bool>();
      rb.diagnostics.fallback = d.at("fallback").get<bool>();
      rb.diagnostics.error = d.at("error").get<std::string>();
      rb.diagnostics.objective = opt_from(d.at("objective"));
      rb.diagnostics.nu = opt_from(d.at("nu"));
      rb.diagnostics.condition_number = opt_from(d.at("condition_number"));
      rb.diagnostics.converged = d.at("converged").get<bool>();
      report.rebalances.push_back(std::move(rb));
    }
    for (const auto& s : j.at("per_split")) report.per_split.push_back(metrics_from(s));
    report.whole = metrics_from(j.at("whole"));
    return report;
  } catch (const json::exception& e) {
    throw IoError(fmt::format("report: malformed JSON ({})", e.what()));
  } catch (const InputError& e) {
    throw IoError(fmt::format("report: {}", e.what()));
  }
}

void save_report_json(const std::filesystem::path& path, const BacktestReport& report) {
  std::ofstream out(path);
  if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  out << report_to_json(report);
  if (!out) throw IoError(fmt::format("failed writing '{}'", path.string()));
}

BacktestReport load_report_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return report_from_json(ss.str());
}

}  // namespace tplvm
