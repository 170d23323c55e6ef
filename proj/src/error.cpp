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

#include "gecal/error.hpp"

namespace gecal {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDomain: return "DomainError";
    case ErrorCode::kOverflow: return "OverflowError";
    case ErrorCode::kInfeasibleStart: return "InfeasibleStart";
    case ErrorCode::kLineSearchStall: return "LineSearchStall";
    case ErrorCode::kMaxIterations: return "MaxIterations";
    case ErrorCode::kOneClass: return "OneClassError";
    case ErrorCode::kSeparation: return "SeparationError";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kConfig: return "ConfigError";
    case ErrorCode::kEmptyTrainingFold: return "EmptyTrainingFold";
    case ErrorCode::kRankDeficientRespondents: return "RankDeficientRespondents";
    case ErrorCode::kInfeasibleLambda: return "InfeasibleLambda";
    case ErrorCode::kOuterDivergence: return "OuterDivergence";
    case ErrorCode::kSingularJacobian: return "SingularJacobian";
    case ErrorCode::kTooFewRespondents: return "TooFewRespondents";
    case ErrorCode::kSingularGram: return "SingularGram";
    case ErrorCode::kSingularSystem: return "SingularSystem";
    case ErrorCode::kSingularTau: return "SingularTau";
    case ErrorCode::kTooManyFailures: return "TooManyFailures";
    case ErrorCode::kAllReplicatesFailed: return "AllReplicatesFailed";
    case ErrorCode::kOneArmEmpty: return "OneArmEmpty";
    case ErrorCode::kParse: return "ParseError";
    case ErrorCode::kNonNumeric: return "NonNumeric";
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kUnknownFlag: return "UnknownFlag";
    case ErrorCode::kMissingRequired: return "MissingRequired";
    case ErrorCode::kConflictingRoles: return "ConflictingRoles";
  }
  return "Error";
}

ErrorCategory error_category(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfig:
    case ErrorCode::kUnknownFlag:
    case ErrorCode::kMissingRequired:
    case ErrorCode::kConflictingRoles:
      return ErrorCategory::kConfig;
    case ErrorCode::kParse:
    case ErrorCode::kNonNumeric:
    case ErrorCode::kOneClass:
    case ErrorCode::kOneArmEmpty:
    case ErrorCode::kTooFewRespondents:
    case ErrorCode::kDimensionMismatch:
    case ErrorCode::kEmptyTrainingFold:
      return ErrorCategory::kData;
    case ErrorCode::kIo:
      return ErrorCategory::kIo;
    default:
      return ErrorCategory::kNumerical;
  }
}

}  // namespace gecal
