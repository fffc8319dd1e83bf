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
#ifndef LOOD_CLI_CONFIG_H_
#define LOOD_CLI_CONFIG_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace lood::cli {

using Json = nlohmann::ordered_json;

// Flat experiment configuration. Files look like
//
//   seed = 3
//   [kernel]
//   type = "rbf"
//   length = 1.0
//   [differing]
//   features = [[0.5]]
//
// Keys under a [section] are stored as "section.key". Values are JSON
// literals; a bare word is read as a string.
class Config {
 public:
  static Config Parse(const std::string& text,
                      const std::string& source = "<memory>");
  static Config Load(const std::string& path);

  // Applies "key=value" with the same value syntax as the file.
  void Override(const std::string& assignment);
  void Set(const std::string& key, Json value);

  bool Has(const std::string& key) const;
  const Json* Find(const std::string& key) const;

  // Typed getters throw kConfigError on a wrong type.
  double GetDouble(const std::string& key, double fallback) const;
  double RequireDouble(const std::string& key) const;
  std::optional<double> OptionalDouble(const std::string& key) const;
  std::int64_t GetInt(const std::string& key, std::int64_t fallback) const;
  std::uint64_t GetSeed(const std::string& key, std::uint64_t fallback) const;
  bool GetBool(const std::string& key, bool fallback) const;
  std::string GetString(const std::string& key,
                        const std::string& fallback) const;
  std::vector<double> GetDoubles(const std::string& key) const;
  // A flat list is a single row.
  std::vector<std::vector<double>> GetRows(const std::string& key) const;

  // One "key = value" line per entry in key order.
  std::string Canonical() const;
  std::uint64_t Hash() const;

  const std::map<std::string, Json>& values() const { return values_; }

 private:
  std::map<std::string, Json> values_;
};

// 64-bit FNV-1a.
std::uint64_t Fnv1a64(const std::string& bytes);

}  // namespace lood::cli

#endif  // LOOD_CLI_CONFIG_H_
