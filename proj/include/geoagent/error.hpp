// Copyright 2026 The GeoAgent Authors
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

namespace geoagent {

enum class ErrorCode {
  InvalidArgument,
  // llm-gateway
  NoMatchingScript,
  ProviderUnreachable,
  SchemaViolation,
  // metadata-catalog
  DuplicateId,
  UnknownId,
  MalformedQuery,
  ParseError,
  // agentic-search
  EmptyQuery,
  // orchestrator
  UnresolvedRef,
  // context-memory
  IsolationViolation,
  BudgetTooSmall,
  // exec-sandbox
  SpawnFailure,
  KernelDead,
  // visual-qc
  NotAnImage,
  // geo-numerics
  EmptyInput,
  DateNotInGrid,
  StillMissing,
  NoValidRows,
  AllZero,
  DegenerateInput,
  NegativeInput,
  LabelEdgeMismatch,
  InvalidGrid,
  // bench-harness
  IoError,
  // service-api
  SessionBusy,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (CLI exit codes, HTTP status mapping) can branch without
/// parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NoMatchingScript: return "NoMatchingScript";
    case ErrorCode::ProviderUnreachable: return "ProviderUnreachable";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::UnknownId: return "UnknownId";
    case ErrorCode::MalformedQuery: return "MalformedQuery";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::EmptyQuery: return "EmptyQuery";
    case ErrorCode::UnresolvedRef: return "UnresolvedRef";
    case ErrorCode::IsolationViolation: return "IsolationViolation";
    case ErrorCode::BudgetTooSmall: return "BudgetTooSmall";
    case ErrorCode::SpawnFailure: return "SpawnFailure";
    case ErrorCode::KernelDead: return "KernelDead";
    case ErrorCode::NotAnImage: return "NotAnImage";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::DateNotInGrid: return "DateNotInGrid";
    case ErrorCode::StillMissing: return "StillMissing";
    case ErrorCode::NoValidRows: return "NoValidRows";
    case ErrorCode::AllZero: return "AllZero";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::NegativeInput: return "NegativeInput";
    case ErrorCode::LabelEdgeMismatch: return "LabelEdgeMismatch";
    case ErrorCode::InvalidGrid: return "InvalidGrid";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::SessionBusy: return "SessionBusy";
  }
  return "Unknown";
}

}  // namespace geoagent
