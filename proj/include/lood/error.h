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
#ifndef LOOD_ERROR_H_
#define LOOD_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace lood {

enum class ErrorCode {
  kNotPsd,
  kDimensionMismatch,
  kSingularSchur,
  kZeroNormInput,
  kQuadratureDivergence,
  kNonDifferentiablePoint,
  kMultiQueryUnsupported,
  kNonHomogeneousKernel,
  kKernelNotRegular,
  kAlphaNonpositive,
  kLimitEstimationUnstable,
  kInvalidArgument,
  kParseError,
  kEmptyDataset,
  kConfigError,
  kIoError,
};

// Coarse grouping used for process exit codes.
enum class ErrorCategory { kConfig, kNumerical, kIo };

std::string_view ErrorCodeName(ErrorCode code);
ErrorCategory CategoryOf(ErrorCode code);

class LoodError : public std::runtime_error {
 public:
  LoodError(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& message) {
  throw LoodError(code, message);
}

}  // namespace lood

#endif  // LOOD_ERROR_H_
