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
#ifndef LOOD_CLI_COMMANDS_H_
#define LOOD_CLI_COMMANDS_H_

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "lood/cli/config.h"
#include "lood/gp.h"
#include "lood/kernels.h"
#include "lood/query_opt.h"

namespace lood::cli {

inline constexpr char kToolkitVersion[] = "0.1.0";

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitIo = 4;

std::string UsageText();
const std::vector<std::string>& SubcommandNames();

// args excludes the program name: {subcommand, options...}. Options are
// --config FILE, --set KEY=VALUE (repeatable), --output-dir DIR, --seed N.
// Writes <subcommand>.json, any CSV tables and manifest.json to the output
// directory, prints a one-line summary to `out` and, on failure, a JSON
// error object to `err`.
int RunSubcommand(const std::vector<std::string>& args, std::ostream& out,
                  std::ostream& err);

// [kernel] type = rbf | linear | nngp | exp-correlation | poly-correlation.
KernelSpec KernelFromConfig(const Config& config);

// D from data.path, a toy draw ([toy] section with data.source = "toy") or
// nothing; S from differing.indices (rows moved out of the file) or
// differing.features / differing.labels.
LeaveOneOutPair PairFromConfig(const Config& config, std::uint64_t root_seed);

// [optimizer] keys; the run seed defaults to a stream of the root seed.
OptConfig OptConfigFromConfig(const Config& config, const KernelSpec& spec,
                              std::uint64_t root_seed);

}  // namespace lood::cli

#endif  // LOOD_CLI_COMMANDS_H_
