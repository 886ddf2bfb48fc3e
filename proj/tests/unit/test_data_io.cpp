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

#include <algorithm>
#include <charconv>
#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "tplvm/data_io.hpp"
#include "tplvm/dates.hpp"
#include "tplvm/errors.hpp"
#include "tplvm/folio.hpp"

namespace tplvm {
namespace {

using Code = ParseError::Code;

std::string fmt_double_for_test(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

ReturnsPanel parse(const std::string& text, PanelKind kind = PanelKind::Returns) {
  std::istringstream in(text);
  return read_panel(in, kind);
}

void expect_parse_error(const std::string& text, Code code, std::size_t row, std::size_t column,
                        PanelKind kind = PanelKind::Returns) {
  try {
    parse(text, kind);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.code(), code) << e.what();
    EXPECT_EQ(e.row(), row) << e.what();
    EXPECT_EQ(e.column(), column) << e.what();
  }
}

TEST(Dates, ParseAndFormat) {
  EXPECT_EQ(format_date(parse_date("2008-06-30")), "2008-06-30");
  EXPECT_THROW(parse_date("2008-6-30"), InputError);
  EXPECT_THROW(parse_date("2008-02-30"), InputError);
  EXPECT_THROW(parse_date("30/06/2008"), InputError);
  EXPECT_EQ(format_date(add_months_end(parse_date("1998-06-30"), 1)), "1998-07-31");
  EXPECT_EQ(format_date(add_months_end(parse_date("1999-01-31"), 1)), "1999-02-28");
  EXPECT_EQ(format_date(add_months_end(parse_date("2000-01-31"), 1)), "2000-02-29");
}

TEST(LoadPanel, PricesToReturns) {
  const auto p = parse("date,A\n2000-01-31,100\n2000-02-29,101\n", PanelKind::Prices);
  ASSERT_EQ(p.periods(), 1);
  EXPECT_NEAR(p.values(0, 0), 0.01, 1e-15);
  EXPECT_EQ(format_date(p.dates[0]), "2000-02-29");
}

TEST(LoadPanel, HandWrittenFixture) {
  const auto p = parse(
      "date,SPX,DAX,N225\n"
      "2001-01-31,0.01,-0.02,0.003\n"
      "2001-02-28,0.02,0.01,-0.004\n"
      "2001-03-31,-0.015,0.0,0.1\n"
      "2001-04-30,0.5,-0.25,1e-3\n"
      "2001-05-31,0,0.125,-0.0625\n");
  Eigen::MatrixXd expected(5, 3);
  expected << 0.01, -0.02, 0.003, 0.02, 0.01, -0.004, -0.015, 0.0, 0.1, 0.5, -0.25, 1e-3, 0.0, 0.125, -0.0625;
  EXPECT_EQ(p.values, expected);
  EXPECT_EQ(p.assets, (std::vector<std::string>{"SPX", "DAX", "N225"}));
  EXPECT_EQ(format_date(p.dates.back()), "2001-05-31");
}

TEST(LoadPanel, Diagnostics) {
  expect_parse_error("", Code::Empty, 1, 0);
  expect_parse_error("when,A\n", Code::BadHeader, 1, 1);
  expect_parse_error("date,A,A\n2000-01-31,1,2\n", Code::BadHeader, 1, 3);
  expect_parse_error("date,A,B\n2000-01-31,0.1\n", Code::Ragged, 2, 0);
  expect_parse_error("date,A,B\n2000-01-31,0.1,abc\n", Code::BadNumber, 2, 3);
  expect_parse_error("date,A,B\n2000-01-31,0.1,\n", Code::MissingCell, 2, 3);
  expect_parse_error("date,A\n2000-13-31,0.1\n", Code::BadDate, 2, 1);
  expect_parse_error("date,A\n2000-02-29,0.1\n2000-01-31,0.2\n", Code::NonMonotoneDate, 3, 1);
  expect_parse_error("date,A\n2000-01-31,0.1\n2000-01-31,0.2\n", Code::DuplicateDate, 3, 1);
  expect_parse_error("date,A\n2000-01-31,nan\n", Code::NonFinite, 2, 2);
  expect_parse_error("date,A\n2000-01-31,100\n2000-02-29,0\n", Code::NonPositivePrice, 3, 2, PanelKind::Prices);
  expect_parse_error("date,A\n", Code::Empty, 1, 0);
}

TEST(LoadPanel, DuplicateDateMessageNamesDate) {
  try {
    parse("date,A\n2000-01-31,0.1\n2000-01-31,0.2\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("2000-01-31"), std::string::npos);
  }
}

TEST(LoadPanel, MissingFileIsIoError) {
  EXPECT_THROW(load_panel("/nonexistent/panel.csv", PanelKind::Returns), IoError);
}

TEST(WritePanel, RoundTripsBitExactly) {
  SyntheticSpec spec;
  spec.n_assets = 5;
  spec.n_periods = 50;
  const auto p = make_synthetic(spec).panel;
  std::ostringstream out;
  write_panel(out, p);
  const auto back = parse(out.str());
  EXPECT_EQ(back.values, p.values);
  EXPECT_EQ(back.assets, p.assets);
  EXPECT_EQ(back.dates, p.dates);
}

TEST(Prices, CumulateInvertsReturns) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(50.0, 150.0);
  Eigen::MatrixXd prices(30, 3);
  for (Eigen::Index i = 0; i < prices.size(); ++i) prices(i) = u(rng);
  std::ostringstream text;
  text << "date,A,B,C\n";
  Date d = parse_date("2000-01-31");
  for (Eigen::Index t = 0; t < 30; ++t, d = add_months_end(d, 1)) {
    text << format_date(d);
    for (Eigen::Index c = 0; c < 3; ++c) text << ',' << fmt_double_for_test(prices(t, c));
    text << '\n';
  }
  const auto p = parse(text.str(), PanelKind::Prices);
  const Eigen::MatrixXd rebuilt = cumulate_prices(prices.row(0), p.values);
  ASSERT_EQ(rebuilt.rows(), 30);
  EXPECT_LT(((rebuilt - prices).array() / prices.array()).abs().maxCoeff(), 1e-12);
}

TEST(Synthetic, DeterministicAndShaped) {
  SyntheticSpec spec;
  spec.n_assets = 4;
  spec.n_periods = 24;
  const auto a = make_synthetic(spec);
  const auto b = make_synthetic(spec);
  EXPECT_EQ(a.panel.values, b.panel.values);
  EXPECT_EQ(a.panel.assets.front(), "A01");
  EXPECT_EQ(format_date(a.panel.dates.front()), "1998-06-30");
  EXPECT_EQ(a.true_cov.rows(), 4);
  spec.seed = 1;
  EXPECT_NE(make_synthetic(spec).panel.values, a.panel.values);
}

TEST(Synthetic, InvalidSpecRejected) {
  SyntheticSpec spec;
  spec.nu = 2.0;
  EXPECT_THROW(make_synthetic(spec), InputError);
  spec = SyntheticSpec{};
  spec.n_assets = 0;
  EXPECT_THROW(make_synthetic(spec), InputError);
}

TEST(Synthetic, GaussianSampleCovarianceConverges) {
  SyntheticSpec spec;
  spec.generator = SyntheticGenerator::GaussianFactor;
  spec.n_periods = 100000;
  const auto syn = make_synthetic(spec);
  const auto s = sample_covariance(syn.panel.values);
  EXPECT_LT((s.sigma - syn.true_cov).norm() / syn.true_cov.norm(), 0.02);
}

TEST(Synthetic, StudentKurtosis) {
  // The sample kurtosis of a t(6) series has no finite variance, so a single
  // panel is noisy; the median over independent panels is stable.
  std::vector<double> k;
  for (std::uint64_t seed = 0; seed < 9; ++seed) {
    SyntheticSpec spec;
    spec.nu = 6.0;
    spec.n_periods = 100000;
    spec.n_assets = 4;
    spec.seed = seed;
    const auto syn = make_synthetic(spec);
    for (Eigen::Index c = 0; c < 4; ++c) k.push_back(testing::kurtosis(syn.panel.values.col(c)));
  }
  std::sort(k.begin(), k.end());
  EXPECT_NEAR(0.5 * (k[17] + k[18]), 6.0, 0.5);
}

}  // namespace
}  // namespace tplvm
