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

#include "tplvm/data_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <set>

#include <fmt/format.h>

#include "tplvm/errors.hpp"
#include "tplvm/kernels.hpp"
#include "tplvm/seed.hpp"
#include "tplvm/tprocess.hpp"

namespace tplvm {
namespace {

using Code = ParseError::Code;

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

void ReturnsPanel::validate() const {
  if (values.cols() < 1) throw InputError("panel has no assets");
  if (static_cast<Eigen::Index>(assets.size()) != values.cols()) throw InputError("panel labels do not match columns");
  if (static_cast<Eigen::Index>(dates.size()) != values.rows()) throw InputError("panel dates do not match rows");
  for (std::size_t t = 1; t < dates.size(); ++t) {
    if (!(dates[t - 1] < dates[t])) {
      throw InputError(fmt::format("panel dates not strictly increasing at {}", format_date(dates[t])));
    }
  }
  if (!values.allFinite()) throw InputError("panel contains non-finite values");
}

ReturnsPanel ReturnsPanel::slice(Eigen::Index begin, Eigen::Index end) const {
  if (begin < 0 || end > periods() || begin > end) throw InputError("panel slice out of range");
  ReturnsPanel out;
  out.dates.assign(dates.begin() + begin, dates.begin() + end);
  out.assets = assets;
  out.values = values.middleRows(begin, end - begin);
  return out;
}

ReturnsPanel read_panel(std::istream& in, PanelKind kind) {
  std::string line;
  std::size_t row = 0;
  if (!std::getline(in, line)) throw ParseError(Code::Empty, 1, 0, "panel file is empty");
  ++row;
  const auto header = split_commas(line);
  if (header.size() < 2 || trim(header[0]) != "date") {
    throw ParseError(Code::BadHeader, 1, 1, "header must be 'date' followed by at least one asset label");
  }
  ReturnsPanel panel;
  std::set<std::string> seen;
  for (std::size_t c = 1; c < header.size(); ++c) {
    std::string label(trim(header[c]));
    if (label.empty() || !seen.insert(label).second) {
      throw ParseError(Code::BadHeader, 1, c + 1, fmt::format("empty or duplicate asset label in column {}", c + 1));
    }
    panel.assets.push_back(std::move(label));
  }
  const std::size_t width = header.size();

  std::vector<double> flat;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() != width) {
      throw ParseError(Code::Ragged, row, 0, fmt::format("row {} has {} fields, expected {}", row, cells.size(), width));
    }
    const std::string_view date_text = trim(cells[0]);
    if (date_text.empty()) throw ParseError(Code::MissingCell, row, 1, fmt::format("row {}: missing date", row));
    Date date;
    try {
      date = parse_date(date_text);
    } catch (const InputError& e) {
      throw ParseError(Code::BadDate, row, 1, fmt::format("row {}: {}", row, e.what()));
    }
    if (!panel.dates.empty()) {
      if (date == panel.dates.back()) {
        throw ParseError(Code::DuplicateDate, row, 1, fmt::format("row {}: duplicate date {}", row, date_text));
      }
      if (date < panel.dates.back()) {
        throw ParseError(Code::NonMonotoneDate, row, 1,
                         fmt::format("row {}: date {} precedes {}", row, date_text, format_date(panel.dates.back())));
      }
    }
    panel.dates.push_back(date);
    for (std::size_t c = 1; c < width; ++c) {
      const std::string_view cell = trim(cells[c]);
      if (cell.empty()) {
        throw ParseError(Code::MissingCell, row, c + 1, fmt::format("row {} column {}: missing value", row, c + 1));
      }
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
        throw ParseError(Code::BadNumber, row, c + 1,
                         fmt::format("row {} column {}: cannot parse '{}'", row, c + 1, cell));
      }
      if (!std::isfinite(v)) {
        throw ParseError(Code::NonFinite, row, c + 1, fmt::format("row {} column {}: non-finite value", row, c + 1));
      }
      if (kind == PanelKind::Prices && !(v > 0.0)) {
        throw ParseError(Code::NonPositivePrice, row, c + 1,
                         fmt::format("row {} column {}: prices must be positive", row, c + 1));
      }
      flat.push_back(v);
    }
  }

  const Eigen::Index cols = static_cast<Eigen::Index>(width - 1);
  const Eigen::Index rows = static_cast<Eigen::Index>(panel.dates.size());
  Eigen::MatrixXd raw = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      flat.data(), rows, cols);

  if (kind == PanelKind::Returns) {
    if (rows < 1) throw ParseError(Code::Empty, row, 0, "panel has no data rows");
    panel.values = std::move(raw);
  } else {
    if (rows < 2) throw ParseError(Code::Empty, row, 0, "price panel needs at least two rows");
    panel.values = (raw.bottomRows(rows - 1).array() / raw.topRows(rows - 1).array() - 1.0).matrix();
    panel.dates.erase(panel.dates.begin());
  }
  return panel;
}

ReturnsPanel load_panel(const std::filesystem::path& path, PanelKind kind) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  return read_panel(in, kind);
}

void write_panel(std::ostream& out, const ReturnsPanel& panel) {
  panel.validate();
  out << "date";
  for (const auto& a : panel.assets) out << ',' << a;
  out << '\n';
  for (Eigen::Index t = 0; t < panel.periods(); ++t) {
    out << format_date(panel.dates[static_cast<std::size_t>(t)]);
    for (Eigen::Index a = 0; a < panel.asset_count(); ++a) out << ',' << format_number(panel.values(t, a));
    out << '\n';
  }
}

void save_panel(const std::filesystem::path& path, const ReturnsPanel& panel) {
  std::ofstream out(path);
  if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  write_panel(out, panel);
  if (!out) throw IoError(fmt::format("failed writing '{}'", path.string()));
}

void write_labelled_matrix(std::ostream& out, const std::vector<std::string>& labels, const Eigen::MatrixXd& m) {
  if (static_cast<Eigen::Index>(labels.size()) != m.rows() || m.rows() != m.cols()) {
    throw InputError("write_labelled_matrix: labels must match a square matrix");
  }
  out << "asset";
  for (const auto& l : labels) out << ',' << l;
  out << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out << labels[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << ',' << format_number(m(i, j));
    out << '\n';
  }
}

Eigen::MatrixXd cumulate_prices(const Eigen::RowVectorXd& initial, const Eigen::MatrixXd& returns) {
  if (initial.size() != returns.cols()) throw InputError("cumulate_prices: width mismatch");
  Eigen::MatrixXd prices(returns.rows() + 1, returns.cols());
  prices.row(0) = initial;
  for (Eigen::Index t = 0; t < returns.rows(); ++t) {
    prices.row(t + 1) = prices.row(t).array() * (1.0 + returns.row(t).array());
  }
  return prices;
}

void SyntheticSpec::validate() const {
  if (n_assets < 1) throw InputError("n_assets must be positive");
  if (n_periods < 1) throw InputError("n_periods must be positive");
  if (q_true < 1) throw InputError("q_true must be positive");
  if (generator == SyntheticGenerator::TFactor && !(nu > 2.0)) throw InputError("TFactor requires nu > 2");
  if (!(theta1 > 0.0) || !(theta2 > 0.0) || !(noise_var >= 0.0)) throw InputError("invalid synthetic kernel");
  if (!std::isfinite(drift)) throw InputError("drift must be finite");
  if (!start.ok()) throw InputError("invalid start date");
}

SyntheticPanel make_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  SyntheticPanel out;
  {
    std::mt19937_64 rng(derive_seed(spec.seed, seed_stream::kSynthetic, 0));
    std::normal_distribution<double> normal;
    out.loadings.resize(spec.n_assets, spec.q_true);
    for (Eigen::Index j = 0; j < out.loadings.cols(); ++j) {
      for (Eigen::Index i = 0; i < out.loadings.rows(); ++i) out.loadings(i, j) = normal(rng);
    }
  }
  const KernelSpec kernel = KernelSpec::exponential(spec.theta1, spec.theta2, spec.noise_var);
  out.true_cov = gram(kernel, out.loadings);
  out.true_cov.diagonal().array() += spec.noise_var;
  out.true_mean = Eigen::VectorXd::Constant(spec.n_assets, spec.drift);

  const std::uint64_t draw_seed = derive_seed(spec.seed, seed_stream::kSynthetic, 1);
  if (spec.generator == SyntheticGenerator::GaussianFactor) {
    out.panel.values = gauss_sample(MvGaussian(out.true_mean, out.true_cov), spec.n_periods, draw_seed);
  } else {
    out.panel.values = t_sample(MvStudentT(out.true_mean, out.true_cov, spec.nu), spec.n_periods, draw_seed);
  }
  for (int a = 0; a < spec.n_assets; ++a) out.panel.assets.push_back(fmt::format("A{:02d}", a + 1));
  for (int t = 0; t < spec.n_periods; ++t) out.panel.dates.push_back(add_months_end(spec.start, t));
  return out;
}

}  // namespace tplvm
