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
#ifndef LOOD_DATASET_H_
#define LOOD_DATASET_H_

#include <cstdint>
#include <string>

#include "lood/gp.h"

namespace lood {

// CSV with header f0,...,f{d-1},label. Lines starting with '#' are skipped.
// Error rows count file lines from 1, the header included.
// Throws kParseError (with row/column), kEmptyDataset or kIoError.
Dataset LoadDataset(const std::string& path, double noise_variance);

// Parses CSV text; `source` names the input in error messages.
Dataset ParseDataset(const std::string& text, double noise_variance,
                     const std::string& source = "<memory>");

// Writes values with 17 significant digits.
void SaveDataset(const Dataset& data, const std::string& path);
std::string FormatDataset(const Dataset& data);

struct ToyGeneratorSpec {
  std::string kind = "sine";
  int n = 10;
  double x_std = 1.0;
  double noise_variance = 0.01;
  std::uint64_t seed = 0;
};

// sine: x_i ~ N(0, x_std^2), y_i = sin(x_i).
Dataset GenerateToy(const ToyGeneratorSpec& spec);

}  // namespace lood

#endif  // LOOD_DATASET_H_
