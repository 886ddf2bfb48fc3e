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

#include "tplvm/model_io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "tplvm/errors.hpp"

namespace tplvm {
namespace {

constexpr const char* kFormatTag = "tplvm-model-1";

std::string num(double v) { return fmt::format("{:.17g}", v); }

std::string join_numbers(const double* data, Eigen::Index count) {
  std::string s;
  for (Eigen::Index i = 0; i < count; ++i) {
    if (i) s += ' ';
    s += num(data[i]);
  }
  return s;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double parse_double(const std::string& text, const std::string& key) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end) throw IoError(fmt::format("model file: bad number '{}' for '{}'", text, key));
  return v;
}

long long parse_int(const std::string& text, const std::string& key) {
  long long v = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end) throw IoError(fmt::format("model file: bad integer '{}' for '{}'", text, key));
  return v;
}

std::vector<double> parse_list(const std::string& text, const std::string& key) {
  std::vector<double> out;
  std::istringstream ss(text);
  std::string tok;
  while (ss >> tok) out.push_back(parse_double(tok, key));
  return out;
}

bool parse_bool(const std::string& text, const std::string& key) {
  if (text == "true") return true;
  if (text == "false") return false;
  throw IoError(fmt::format("model file: bad boolean '{}' for '{}'", text, key));
}

}  // namespace

void write_model(std::ostream& out, const ModelFile& file) {
  const FittedLVM& m = file.model;
  if (!m.fitted()) throw StateError("write_model: model is not fitted");
  out << "# tplvm fitted latent variable model\n";
  out << "format = " << kFormatTag << '\n';
  out << "model = " << to_string(m.model) << '\n';
  out << "inference = " << to_string(m.inference) << '\n';
  out << "rows = " << m.latent.rows() << '\n';
  out << "columns = " << m.columns << '\n';
  out << "latent_dim = " << m.latent.cols() << '\n';
  out << "kernel.family = exponential\n";
  out << "kernel.theta1 = " << num(m.kernel.theta1()) << '\n';
  out << "kernel.theta2 = " << num(m.kernel.theta2()) << '\n';
  out << "kernel.noise_var = " << num(m.kernel.noise_var()) << '\n';
  out << "kernel.jitter = " << num(m.kernel.jitter()) << '\n';
  // log-space values are authoritative; exponentiating loses the last bits
  out << "kernel.log_theta1 = " << num(m.kernel.log_theta1()) << '\n';
  out << "kernel.log_theta2 = " << num(m.kernel.log_theta2()) << '\n';
  out << "kernel.log_noise_var = " << num(m.kernel.log_noise_var()) << '\n';
  if (m.nu) out << "nu = " << num(*m.nu) << '\n';
  out << "objective = " << num(m.objective) << '\n';
  out << "converged = " << (m.converged ? "true" : "false") << '\n';
  out << "restarts_used = " << m.restarts_used << '\n';
  out << "quad_form = " << num(m.quad_form) << '\n';
  if (!file.labels.empty()) out << "labels = " << fmt::format("{}", fmt::join(file.labels, ",")) << '\n';
  out << "mean = " << join_numbers(m.mean.data(), m.mean.size()) << '\n';
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m.latent;
  out << "latent = " << join_numbers(rm.data(), rm.size()) << '\n';
  out << "objective_trace = " << join_numbers(m.objective_trace.data(), static_cast<Eigen::Index>(m.objective_trace.size()))
      << '\n';
}

ModelFile read_model(std::istream& in) {
  std::map<std::string, std::string> fields;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw IoError(fmt::format("model file line {}: expected 'key = value'", line_no));
    const std::string key = trim(std::string_view(t).substr(0, eq));
    if (!fields.emplace(key, trim(std::string_view(t).substr(eq + 1))).second) {
      throw IoError(fmt::format("model file line {}: duplicate key '{}'", line_no, key));
    }
  }
  const auto get = [&](const std::string& key) -> const std::string& {
    auto it = fields.find(key);
    if (it == fields.end()) throw IoError(fmt::format("model file: missing key '{}'", key));
    return it->second;
  };
  if (get("format") != kFormatTag) throw IoError("model file: unsupported format tag");

  ModelFile file;
  FittedLVM& m = file.model;
  const std::string& model = get("model");
  if (model == "gplvm") m.model = ModelKind::GPLVM;
  else if (model == "tplvm") m.model = ModelKind::TPLVM;
  else throw IoError(fmt::format("model file: unknown model '{}'", model));
  const std::string& inference = get("inference");
  if (inference == "mle") m.inference = InferenceMethod::MLE;
  else if (inference == "variational") m.inference = InferenceMethod::Variational;
  else throw IoError(fmt::format("model file: unknown inference '{}'", inference));
  if (get("kernel.family") != "exponential") throw IoError("model file: unknown kernel family");

  const Eigen::Index rows = parse_int(get("rows"), "rows");
  const Eigen::Index q = parse_int(get("latent_dim"), "latent_dim");
  m.columns = parse_int(get("columns"), "columns");
  if (rows < 1 || q < 1) throw IoError("model file: invalid dimensions");
  try {
    const double jitter = parse_double(get("kernel.jitter"), "kernel.jitter");
    // validates the readable values, then takes the exact log-space ones
    KernelSpec::exponential(parse_double(get("kernel.theta1"), "kernel.theta1"),
                            parse_double(get("kernel.theta2"), "kernel.theta2"),
                            parse_double(get("kernel.noise_var"), "kernel.noise_var"), jitter);
    m.kernel = KernelSpec::from_log(KernelFamily::Exponential, parse_double(get("kernel.log_theta1"), "kernel.log_theta1"),
                                    parse_double(get("kernel.log_theta2"), "kernel.log_theta2"),
                                    parse_double(get("kernel.log_noise_var"), "kernel.log_noise_var"), jitter);
  } catch (const InputError& e) {
    throw IoError(fmt::format("model file: {}", e.what()));
  }
  if (fields.count("nu")) m.nu = parse_double(get("nu"), "nu");
  if (m.model == ModelKind::TPLVM && !(m.nu && *m.nu > 2.0)) throw IoError("model file: tplvm requires nu > 2");
  m.objective = parse_double(get("objective"), "objective");
  m.converged = parse_bool(get("converged"), "converged");
  m.restarts_used = static_cast<int>(parse_int(get("restarts_used"), "restarts_used"));
  m.quad_form = parse_double(get("quad_form"), "quad_form");

  const auto mean = parse_list(get("mean"), "mean");
  const auto latent = parse_list(get("latent"), "latent");
  if (static_cast<Eigen::Index>(mean.size()) != rows) throw IoError("model file: mean has wrong length");
  if (static_cast<Eigen::Index>(latent.size()) != rows * q) throw IoError("model file: latent has wrong length");
  m.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), rows);
  m.latent = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(latent.data(), rows, q);
  m.objective_trace = parse_list(get("objective_trace"), "objective_trace");

  if (fields.count("labels")) {
    std::string rest = get("labels");
    std::size_t start = 0;
    while (true) {
      const auto comma = rest.find(',', start);
      file.labels.push_back(rest.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (static_cast<Eigen::Index>(file.labels.size()) != rows) throw IoError("model file: labels have wrong length");
  }
  return file;
}

void save_model(const std::filesystem::path& path, const ModelFile& file) {
  std::ofstream out(path);
  if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  write_model(out, file);
  if (!out) throw IoError(fmt::format("failed writing '{}'", path.string()));
}

ModelFile load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  return read_model(in);
}

}  // namespace tplvm
