/*
 * Copyright 2026 The byzfed Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "byzfed/error.h"

namespace byzfed {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMagnitudeOverflow: return "MagnitudeOverflow";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kBadThreshold: return "BadThreshold";
    case ErrorCode::kOwnerMismatch: return "OwnerMismatch";
    case ErrorCode::kInsufficientShares: return "InsufficientShares";
    case ErrorCode::kDuplicateOwner: return "DuplicateOwner";
    case ErrorCode::kModeMismatch: return "ModeMismatch";
    case ErrorCode::kDuplicateSigner: return "DuplicateSigner";
    case ErrorCode::kBelowThreshold: return "BelowThreshold";
    case ErrorCode::kWrongRecipient: return "WrongRecipient";
    case ErrorCode::kAuthFailure: return "AuthFailure";
    case ErrorCode::kBadParams: return "BadParams";
    case ErrorCode::kInfeasible: return "Infeasible";
    case ErrorCode::kDivisibilityViolation: return "DivisibilityViolation";
    case ErrorCode::kNotEnough: return "NotEnough";
    case ErrorCode::kBadSignature: return "BadSignature";
    case ErrorCode::kDecodeError: return "DecodeError";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kLivenessViolation: return "LivenessViolation";
  }
  return "Unknown";
}

}  // namespace byzfed
