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
#ifndef LOOD_RANDOM_H_
#define LOOD_RANDOM_H_

#include <cstdint>

namespace lood {

// Child seed for `stream` under `root` (SplitMix64 finalizer over both).
std::uint64_t DeriveSeed(std::uint64_t root, std::uint64_t stream);

}  // namespace lood

#endif  // LOOD_RANDOM_H_
