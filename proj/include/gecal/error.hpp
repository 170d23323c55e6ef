// Copyright 2026 The gecal Authors.
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

#ifndef GECAL_ERROR_HPP
#define GECAL_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace gecal {

enum class ErrorCode {
  kDomain,
  kOverflow,
  kInfeasibleStart,
  kLineSearchStall,
  kMaxIterations,
  kOneClass,
  kSeparation,
  kDimensionMismatch,
  kConfig,
  kEmptyTrainingFold,
  kRankDeficientRespondents,
  kInfeasibleLambda,
  kOuterDivergence,
  kSingularJacobian,
  kTooFewRespondents,
  kSingularGram,
  kSingularSystem,
  kSingularTau,
  kTooManyFailures,
  kAllReplicatesFailed,
  kOneArmEmpty,
  kParse,
  kNonNumeric,
  kIo,
  kUnknownFlag,
  kMissingRequired,
  kConflictingRoles,
};

// Coarse grouping used for process exit codes and the C API status values.
enum class ErrorCategory { kConfig, kData, kNumerical, kIo };

std::string_view error_code_name(ErrorCode code);
ErrorCategory error_category(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  ErrorCategory category() const noexcept { return error_category(code_); }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace gecal

#endif  // GECAL_ERROR_HPP
