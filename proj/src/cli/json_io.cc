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
#include "lood/cli/json_io.h"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "lood/error.h"

namespace lood::cli {

namespace {

void Indent(std::string& out, int depth) { out.append(2 * depth, ' '); }

void Emit(const Json& value, int depth, std::string& out) {
  switch (value.type()) {
    case Json::value_t::object: {
      if (value.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [key, item] : value.items()) {
        if (!first) out += ",\n";
        first = false;
        Indent(out, depth + 1);
        out += Json(key).dump() + ": ";
        Emit(item, depth + 1, out);
      }
      out += "\n";
      Indent(out, depth);
      out += "}";
      return;
    }
    case Json::value_t::array: {
      if (value.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      bool flat = true;
      for (const Json& item : value) {
        if (item.is_structured()) flat = false;
      }
      out += flat ? "[" : "[\n";
      bool first = true;
      for (const Json& item : value) {
        if (!first) out += flat ? ", " : ",\n";
        first = false;
        if (!flat) Indent(out, depth + 1);
        Emit(item, depth + 1, out);
      }
      if (!flat) {
        out += "\n";
        Indent(out, depth);
      }
      out += "]";
      return;
    }
    case Json::value_t::number_float:
      out += FormatDouble(value.get<double>());
      return;
    default:
      out += value.dump();
  }
}

}  // namespace

std::string FormatDouble(double value) {
  if (!std::isfinite(value)) return "null";
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

std::string DumpJson(const Json& value) {
  std::string out;
  Emit(value, 0, out);
  out += "\n";
  return out;
}

Json ToJson(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Json ToJson(const Matrix& m) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out.push_back(ToJson(Vector(m.row(i).transpose())));
  }
  return out;
}

void WriteTextFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorCode::kIoError, "cannot write '" + path + "'");
  out << text;
  if (!out) Fail(ErrorCode::kIoError, "write to '" + path + "' failed");
}

std::string FormatCsv(const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i > 0) out += ",";
    out += header[i];
  }
  out += "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out += ",";
      out += FormatDouble(row[i]);
    }
    out += "\n";
  }
  return out;
}

}  // namespace lood::cli
