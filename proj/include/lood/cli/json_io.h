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
#ifndef LOOD_CLI_JSON_IO_H_
#define LOOD_CLI_JSON_IO_H_

#include <string>
#include <vector>

#include "lood/cli/config.h"
#include "lood/linalg.h"

namespace lood::cli {

// %.17g; NaN and infinities become null.
std::string FormatDouble(double value);

// Serializes with two-space indent, keys in insertion order and floats via
// FormatDouble, so equal inputs give identical bytes.
std::string DumpJson(const Json& value);

Json ToJson(const Vector& v);
// Row-major list of rows.
Json ToJson(const Matrix& m);

// Throws kIoError.
void WriteTextFile(const std::string& path, const std::string& text);

// Header line plus one line per row, numbers via FormatDouble.
std::string FormatCsv(const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows);

}  // namespace lood::cli

#endif  // LOOD_CLI_JSON_IO_H_
