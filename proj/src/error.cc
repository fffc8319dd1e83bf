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
#include "lood/error.h"

namespace lood {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotPsd: return "NotPsd";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kSingularSchur: return "SingularSchur";
    case ErrorCode::kZeroNormInput: return "ZeroNormInput";
    case ErrorCode::kQuadratureDivergence: return "QuadratureDivergence";
    case ErrorCode::kNonDifferentiablePoint: return "NonDifferentiablePoint";
    case ErrorCode::kMultiQueryUnsupported: return "MultiQueryUnsupported";
    case ErrorCode::kNonHomogeneousKernel: return "NonHomogeneousKernel";
    case ErrorCode::kKernelNotRegular: return "KernelNotRegular";
    case ErrorCode::kAlphaNonpositive: return "AlphaNonpositive";
    case ErrorCode::kLimitEstimationUnstable: return "LimitEstimationUnstable";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

ErrorCategory CategoryOf(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfigError:
    case ErrorCode::kInvalidArgument:
      return ErrorCategory::kConfig;
    case ErrorCode::kParseError:
    case ErrorCode::kEmptyDataset:
    case ErrorCode::kIoError:
      return ErrorCategory::kIo;
    default:
      return ErrorCategory::kNumerical;
  }
}

}  // namespace lood
