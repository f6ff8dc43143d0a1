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

#ifndef BYZFED_ERROR_H_
#define BYZFED_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace byzfed {

enum class ErrorCode {
  kMagnitudeOverflow,
  kLengthMismatch,
  kDimensionMismatch,
  kBadThreshold,
  kOwnerMismatch,
  kInsufficientShares,
  kDuplicateOwner,
  kModeMismatch,
  kDuplicateSigner,
  kBelowThreshold,
  kWrongRecipient,
  kAuthFailure,
  kBadParams,
  kInfeasible,
  kDivisibilityViolation,
  kNotEnough,
  kBadSignature,
  kDecodeError,
  kConfigError,
  kLivenessViolation,
};

std::string_view ErrorCodeName(ErrorCode code);

// All library failures surface as this exception; `code()` identifies the
// contract that was violated.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace byzfed

#endif  // BYZFED_ERROR_H_
