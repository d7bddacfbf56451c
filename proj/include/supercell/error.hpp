// Copyright 2026 The Supercell Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
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

namespace supercell {

enum class ErrorCode {
  // usage / configuration
  Config,
  // data errors
  Parse,
  Io,
  UnknownKeyValue,
  MissingKeyColumn,
  RaggedRow,
  EmptyInput,
  NoRuleMatchedAnything,
  InvalidDescriptor,
  SpecViolation,
  KeyResolutionFailure,
  NonNumericExpansion,
  DuplicateCellOnPivot,
  DegenerateVocabulary,
  EmptyEvalSet,
  AggModeConflict,
  NumericParseFailure,
  EmptyColumn,
  IncompatibleSignatures,
  UncoverableAttribute,
  // internal
  InvariantViolation,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Config: return "Config";
    case ErrorCode::Parse: return "Parse";
    case ErrorCode::Io: return "IoFailure";
    case ErrorCode::UnknownKeyValue: return "UnknownKeyValue";
    case ErrorCode::MissingKeyColumn: return "MissingKeyColumn";
    case ErrorCode::RaggedRow: return "RaggedRow";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::NoRuleMatchedAnything: return "NoRuleMatchedAnything";
    case ErrorCode::InvalidDescriptor: return "InvalidDescriptor";
    case ErrorCode::SpecViolation: return "SpecViolation";
    case ErrorCode::KeyResolutionFailure: return "KeyResolutionFailure";
    case ErrorCode::NonNumericExpansion: return "NonNumericExpansion";
    case ErrorCode::DuplicateCellOnPivot: return "DuplicateCellOnPivot";
    case ErrorCode::DegenerateVocabulary: return "DegenerateVocabulary";
    case ErrorCode::EmptyEvalSet: return "EmptyEvalSet";
    case ErrorCode::AggModeConflict: return "AggModeConflict";
    case ErrorCode::NumericParseFailure: return "NumericParseFailure";
    case ErrorCode::EmptyColumn: return "EmptyColumn";
    case ErrorCode::IncompatibleSignatures: return "IncompatibleSignatures";
    case ErrorCode::UncoverableAttribute: return "UncoverableAttribute";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Process exit status for an error: 1 usage, 2 data, 3 internal.
inline int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Config: return 1;
    case ErrorCode::InvariantViolation: return 3;
    default: return 2;
  }
}

}  // namespace supercell
