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
#include "lood/cli/config.h"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "lood/error.h"

namespace lood::cli {

namespace {

std::string Trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

// Drops a trailing '#' comment that is not inside a string.
std::string StripComment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (c == '\\' && in_string) {
      ++i;
    } else if (c == '"') {
      in_string = !in_string;
    } else if (c == '#' && !in_string) {
      return line.substr(0, i);
    }
  }
  return line;
}

bool IsBareWord(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == '"' || c == '[' ||
        c == ']' || c == '{' || c == '}' || c == ',') {
      return false;
    }
  }
  return true;
}

Json ParseValue(const std::string& raw, const std::string& where) {
  const std::string text = Trim(raw);
  if (text.empty()) Fail(ErrorCode::kConfigError, where + ": empty value");
  Json value = Json::parse(text, nullptr, false);
  if (!value.is_discarded()) return value;
  if (IsBareWord(text)) return Json(text);
  Fail(ErrorCode::kConfigError, where + ": cannot parse value '" + text + "'");
}

bool ValidKey(const std::string& key) {
  if (key.empty()) return false;
  for (char c : key) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-' &&
        c != '.') {
      return false;
    }
  }
  return true;
}

[[noreturn]] void WrongType(const std::string& key, const char* expected,
                            const Json& value) {
  Fail(ErrorCode::kConfigError, "config key '" + key + "' must be " +
                                    expected + ", got " + value.dump());
}

}  // namespace

std::uint64_t Fnv1a64(const std::string& bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

Config Config::Parse(const std::string& text, const std::string& source) {
  Config config;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = source + ":" + std::to_string(line_no);
    const std::string body = Trim(StripComment(line));
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']') {
        Fail(ErrorCode::kConfigError, where + ": unterminated section header");
      }
      section = Trim(body.substr(1, body.size() - 2));
      if (!ValidKey(section)) {
        Fail(ErrorCode::kConfigError, where + ": bad section name");
      }
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      Fail(ErrorCode::kConfigError, where + ": expected key = value");
    }
    const std::string key = Trim(body.substr(0, eq));
    if (!ValidKey(key)) {
      Fail(ErrorCode::kConfigError, where + ": bad key '" + key + "'");
    }
    const std::string full = section.empty() ? key : section + "." + key;
    config.values_[full] = ParseValue(body.substr(eq + 1), where);
  }
  return config;
}

Config Config::Load(const std::string& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIoError, "cannot open config '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return Parse(buffer.str(), path);
}

void Config::Override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    Fail(ErrorCode::kConfigError,
         "override '" + assignment + "' is not key=value");
  }
  const std::string key = Trim(assignment.substr(0, eq));
  if (!ValidKey(key)) {
    Fail(ErrorCode::kConfigError, "bad override key '" + key + "'");
  }
  values_[key] = ParseValue(assignment.substr(eq + 1), "--set " + key);
}

void Config::Set(const std::string& key, Json value) {
  values_[key] = std::move(value);
}

bool Config::Has(const std::string& key) const {
  return values_.count(key) > 0;
}

const Json* Config::Find(const std::string& key) const {
  const auto it = values_.find(key);
  return it == values_.end() ? nullptr : &it->second;
}

double Config::GetDouble(const std::string& key, double fallback) const {
  return OptionalDouble(key).value_or(fallback);
}

double Config::RequireDouble(const std::string& key) const {
  const auto value = OptionalDouble(key);
  if (!value) Fail(ErrorCode::kConfigError, "missing config key '" + key + "'");
  return *value;
}

std::optional<double> Config::OptionalDouble(const std::string& key) const {
  const Json* value = Find(key);
  if (value == nullptr) return std::nullopt;
  if (!value->is_number()) WrongType(key, "a number", *value);
  return value->get<double>();
}

std::int64_t Config::GetInt(const std::string& key,
                            std::int64_t fallback) const {
  const Json* value = Find(key);
  if (value == nullptr) return fallback;
  if (value->is_number_integer()) return value->get<std::int64_t>();
  if (value->is_number_float()) {
    const double d = value->get<double>();
    if (std::floor(d) == d && std::abs(d) < 9e15) {
      return static_cast<std::int64_t>(d);
    }
  }
  WrongType(key, "an integer", *value);
}

std::uint64_t Config::GetSeed(const std::string& key,
                              std::uint64_t fallback) const {
  const Json* value = Find(key);
  if (value == nullptr) return fallback;
  if (value->is_number_unsigned()) return value->get<std::uint64_t>();
  if (value->is_number_integer() && value->get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(value->get<std::int64_t>());
  }
  WrongType(key, "a non-negative integer", *value);
}

bool Config::GetBool(const std::string& key, bool fallback) const {
  const Json* value = Find(key);
  if (value == nullptr) return fallback;
  if (!value->is_boolean()) WrongType(key, "true or false", *value);
  return value->get<bool>();
}

std::string Config::GetString(const std::string& key,
                              const std::string& fallback) const {
  const Json* value = Find(key);
  if (value == nullptr) return fallback;
  if (!value->is_string()) WrongType(key, "a string", *value);
  return value->get<std::string>();
}

std::vector<double> Config::GetDoubles(const std::string& key) const {
  const Json* value = Find(key);
  if (value == nullptr) return {};
  if (value->is_number()) return {value->get<double>()};
  if (!value->is_array()) WrongType(key, "a list of numbers", *value);
  std::vector<double> out;
  for (const Json& item : *value) {
    if (!item.is_number()) WrongType(key, "a list of numbers", *value);
    out.push_back(item.get<double>());
  }
  return out;
}

std::vector<std::vector<double>> Config::GetRows(const std::string& key) const {
  const Json* value = Find(key);
  if (value == nullptr) return {};
  if (value->is_number()) return {{value->get<double>()}};
  if (!value->is_array()) WrongType(key, "a list of rows", *value);
  if (!value->empty() && !value->front().is_array()) {
    return {GetDoubles(key)};
  }
  std::vector<std::vector<double>> rows;
  for (const Json& row : *value) {
    if (!row.is_array()) WrongType(key, "a list of rows", *value);
    std::vector<double> r;
    for (const Json& item : row) {
      if (!item.is_number()) WrongType(key, "a list of rows", *value);
      r.push_back(item.get<double>());
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string Config::Canonical() const {
  std::string out;
  for (const auto& [key, value] : values_) {
    out += key + " = " + value.dump() + "\n";
  }
  return out;
}

std::uint64_t Config::Hash() const { return Fnv1a64(Canonical()); }

}  // namespace lood::cli
