// Copyright 2026 The DPPF Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dppf/io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace dppf {
namespace {

std::vector<std::string> SplitLines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    lines.push_back(line);
  }
  return lines;
}

std::vector<double> ParseRow(const std::string& line, size_t lineno) {
  std::vector<double> row;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    const char* begin = cell.c_str();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(begin, &end);
    while (end && (*end == ' ' || *end == '\t')) ++end;
    if (end == begin || (end && *end != '\0') || errno == ERANGE || !std::isfinite(v)) {
      throw Error(ErrorCode::kIo, "line " + std::to_string(lineno) + ": bad number '" + cell + "'");
    }
    row.push_back(v);
  }
  return row;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string matrix_to_csv(const Matrix& m) {
  std::string out;
  out.reserve(static_cast<size_t>(m.size()) * 24);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out += ',';
      out += format_double(m(i, j));
    }
    out += '\n';
  }
  return out;
}

Matrix matrix_from_csv(const std::string& text) {
  const std::vector<std::string> lines = SplitLines(text);
  if (lines.empty()) throw Error(ErrorCode::kIo, "matrix CSV is empty");
  std::vector<std::vector<double>> rows;
  for (size_t i = 0; i < lines.size(); ++i) rows.push_back(ParseRow(lines[i], i + 1));
  const size_t cols = rows.front().size();
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(cols));
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) {
      throw Error(ErrorCode::kIo, "matrix CSV row " + std::to_string(i + 1) + " has " +
                                      std::to_string(rows[i].size()) + " values, expected " +
                                      std::to_string(cols));
    }
    for (size_t j = 0; j < cols; ++j) m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  }
  return m;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "write to " + path.string() + " failed");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m) {
  write_text(path, matrix_to_csv(m));
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
  return matrix_from_csv(read_text(path));
}

Vector read_vector_csv(const std::filesystem::path& path) {
  const Matrix m = read_matrix_csv(path);
  if (m.cols() == 1) return m.col(0);
  if (m.rows() == 1) return m.row(0).transpose();
  throw Error(ErrorCode::kIo, path.string() + " is not a single row or column");
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  write_text(path, j.dump(2) + "\n");
}

nlohmann::json read_json(const std::filesystem::path& path) {
  try {
    return nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kIo, path.string() + ": " + e.what());
  }
}

nlohmann::json vector_to_json(const Vector& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

nlohmann::json to_json(const LossReport& r) {
  return {{"gamma", r.gamma}, {"frob_w_sq", r.frob_w_sq}, {"loss", r.loss}, {"root_loss", r.root_loss}};
}

nlohmann::json to_json(const FixedPointResult& r) {
  return {{"n", r.n},
          {"lambda", vector_to_json(r.lambda)},
          {"loss", r.loss},
          {"root_loss", r.root_loss()},
          {"iterations", r.iterations},
          {"fp_residual", r.fp_residual},
          {"kkt_residual", r.kkt_residual},
          {"diagonal_drift", r.diagonal_drift}};
}

nlohmann::json to_json(const SpectrumReport& r) {
  return {{"n", r.n},
          {"singular_values", vector_to_json(r.singular_values)},
          {"odd_sum", r.odd_sum},
          {"lower_bound", r.lower_bound},
          {"root_lower_bound", std::sqrt(r.lower_bound)},
          {"analytic_log_bound", r.analytic_log_bound}};
}

nlohmann::json to_json(const PrivacyParams& p, std::uint64_t seed) {
  return {{"epsilon", p.epsilon}, {"delta", p.delta}, {"zeta", p.zeta},
          {"gamma", p.gamma},     {"sigma", p.sigma}, {"seed", seed}};
}

std::string mechanism_to_csv(const MechanismRun& run) {
  std::string out = "t,release,true_prefix,noise_component\n";
  for (Index t = 0; t < run.releases.size(); ++t) {
    out += std::to_string(t + 1) + ',' + format_double(run.releases(t)) + ',' +
           format_double(run.true_prefix(t)) + ',' + format_double(run.noise_component(t)) + '\n';
  }
  return out;
}

void save_structured(const std::filesystem::path& dir, const StructuredW& sw) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  write_matrix_csv(dir / "band.csv", sw.band);
  write_matrix_csv(dir / "a.csv", sw.a);
  write_matrix_csv(dir / "b.csv", sw.b);
  const bool standard = sw.mask == standard_mask(sw.n, sw.d);
  if (!standard) write_matrix_csv(dir / "mask.csv", sw.mask);
  write_json(dir / "meta.json", {{"n", sw.n},
                                 {"d", sw.d},
                                 {"r", sw.r},
                                 {"reg", sw.reg},
                                 {"seed", sw.seed},
                                 {"sweeps", sw.sweeps},
                                 {"mask", standard ? "lower" : "mask.csv"}});
}

StructuredW load_structured(const std::filesystem::path& dir) {
  const nlohmann::json meta = read_json(dir / "meta.json");
  StructuredW sw;
  try {
    sw.n = meta.at("n").get<Index>();
    sw.d = meta.at("d").get<Index>();
    sw.r = meta.at("r").get<Index>();
    sw.reg = meta.value("reg", 0.0);
    sw.seed = meta.value("seed", std::uint64_t{0});
    sw.sweeps = meta.value("sweeps", 0);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kIo, "meta.json: " + std::string(e.what()));
  }
  sw.band = read_matrix_csv(dir / "band.csv");
  sw.a = read_matrix_csv(dir / "a.csv");
  sw.b = read_matrix_csv(dir / "b.csv");
  if (meta.value("mask", std::string("lower")) == "lower") {
    sw.mask = standard_mask(sw.n, sw.d);
  } else {
    sw.mask = read_matrix_csv(dir / "mask.csv");
  }
  assemble(sw);
  return sw;
}

}  // namespace dppf
