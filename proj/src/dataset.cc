/*
 * Copyright 2026 The LOOD Toolkit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "lood/dataset.h"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <string_view>
#include <vector>

#include "lood/error.h"

namespace lood {

namespace {

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> SplitCommas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(Trim(line.substr(start)));
      return cells;
    }
    cells.push_back(Trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

[[noreturn]] void ParseFail(const std::string& source, int row, int col,
                            const std::string& what) {
  Fail(ErrorCode::kParseError, source + ": row " + std::to_string(row) +
                                   ", column " + std::to_string(col) + ": " +
                                   what);
}

std::string Format17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

Dataset ParseDataset(const std::string& text, double noise_variance,
                     const std::string& source) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  int d = -1;
  std::vector<double> values;
  std::vector<double> labels;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = Trim(line);
    if (view.empty() || view.front() == '#') continue;
    const std::vector<std::string_view> cells = SplitCommas(view);
    if (d < 0) {
      const int cols = static_cast<int>(cells.size());
      if (cols < 2 || cells.back() != "label") {
        ParseFail(source, line_no, cols, "header must end with 'label'");
      }
      for (int j = 0; j + 1 < cols; ++j) {
        if (cells[j] != "f" + std::to_string(j)) {
          ParseFail(source, line_no, j + 1,
                    "expected header 'f" + std::to_string(j) + "'");
        }
      }
      d = cols - 1;
      continue;
    }
    if (static_cast<int>(cells.size()) != d + 1) {
      ParseFail(source, line_no, static_cast<int>(cells.size()),
                "expected " + std::to_string(d + 1) + " columns");
    }
    for (int j = 0; j <= d; ++j) {
      const std::string_view cell = cells[j];
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size()) {
        ParseFail(source, line_no, j + 1,
                  "cannot parse '" + std::string(cell) + "' as a number");
      }
      if (!std::isfinite(v)) {
        ParseFail(source, line_no, j + 1, "non-finite value");
      }
      (j < d ? values : labels).push_back(v);
    }
  }
  if (d < 0) ParseFail(source, line_no, 0, "missing header");
  if (labels.empty()) {
    Fail(ErrorCode::kEmptyDataset, source + ": no data rows");
  }
  Dataset data;
  data.noise_variance = noise_variance;
  const Eigen::Index n = static_cast<Eigen::Index>(labels.size());
  data.features =
      Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                     Eigen::RowMajor>>(values.data(), n, d);
  data.labels = Eigen::Map<const Vector>(labels.data(), n);
  return data;
}

Dataset LoadDataset(const std::string& path, double noise_variance) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIoError, "cannot open dataset '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return ParseDataset(buf.str(), noise_variance, path);
}

std::string FormatDataset(const Dataset& data) {
  std::string out;
  for (Eigen::Index j = 0; j < data.dim(); ++j) {
    out += "f" + std::to_string(j) + ",";
  }
  out += "label\n";
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    for (Eigen::Index j = 0; j < data.dim(); ++j) {
      out += Format17(data.features(i, j)) + ",";
    }
    out += Format17(data.labels(i)) + "\n";
  }
  return out;
}

void SaveDataset(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) Fail(ErrorCode::kIoError, "cannot write dataset '" + path + "'");
  out << FormatDataset(data);
  if (!out) Fail(ErrorCode::kIoError, "write failed for '" + path + "'");
}

Dataset GenerateToy(const ToyGeneratorSpec& spec) {
  if (spec.kind != "sine") {
    Fail(ErrorCode::kConfigError, "unknown toy kind '" + spec.kind + "'");
  }
  if (spec.n < 1) Fail(ErrorCode::kConfigError, "toy n must be >= 1");
  if (!(spec.x_std > 0.0)) Fail(ErrorCode::kConfigError, "toy x_std must be > 0");
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, spec.x_std);
  Dataset data;
  data.noise_variance = spec.noise_variance;
  data.features.resize(spec.n, 1);
  data.labels.resize(spec.n);
  for (int i = 0; i < spec.n; ++i) {
    data.features(i, 0) = normal(rng);
    data.labels(i) = std::sin(data.features(i, 0));
  }
  return data;
}

}  // namespace lood
