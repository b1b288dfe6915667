// Copyright 2026 The qtomo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qtomo {

enum class ErrorCode {
  kNotHermitian,
  kDimensionMismatch,
  kNotNormalized,
  kMissingIdentityCoefficient,
  kNotPhysicalState,
  kIncompleteSet,
  kInvalidRecord,
  kZeroParameters,
  kSingularPivot,
  kZeroSigma,
  kZeroNorm,
  kUnsupportedDimension,
  kUnknownState,
  kParseError,
  kIoError,
  kNoConvergence,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotHermitian: return "NotHermitian";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNotNormalized: return "NotNormalized";
    case ErrorCode::kMissingIdentityCoefficient: return "MissingIdentityCoefficient";
    case ErrorCode::kNotPhysicalState: return "NotPhysicalState";
    case ErrorCode::kIncompleteSet: return "IncompleteSet";
    case ErrorCode::kInvalidRecord: return "InvalidRecord";
    case ErrorCode::kZeroParameters: return "ZeroParameters";
    case ErrorCode::kSingularPivot: return "SingularPivot";
    case ErrorCode::kZeroSigma: return "ZeroSigma";
    case ErrorCode::kZeroNorm: return "ZeroNorm";
    case ErrorCode::kUnsupportedDimension: return "UnsupportedDimension";
    case ErrorCode::kUnknownState: return "UnknownState";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kNoConvergence: return "NoConvergence";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI's exit-code mapping) can branch without string
/// matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace qtomo
