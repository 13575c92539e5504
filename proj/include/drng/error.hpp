// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace drng {

enum class ErrorCode {
  // field arithmetic
  NotPrime,
  ZeroInverse,
  FieldMismatch,
  DuplicateX,
  EmptyInput,
  // crypto
  InvalidGroup,
  // dealing
  InvalidThreshold,
  DuplicateRecipientX,
  ZeroRecipientX,
  // contract
  InvalidConfig,
  WrongPhase,
  DuplicateAddress,
  XCollision,
  WrongDeposit,
  NotRegistered,
  NotActive,
  WrongCardinality,
  AlreadyPosted,
  MissingCommitment,
  MissingShares,
  PlaintextModeMismatch,
  MalformedPayload,
  KeyMismatch,
  KeyNotRevealed,
  AlreadyAdjudicated,
  // agents
  InsufficientCoalition,
  // simulator
  ConfigError,
  InvariantViolation,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotPrime: return "NotPrime";
    case ErrorCode::ZeroInverse: return "ZeroInverse";
    case ErrorCode::FieldMismatch: return "FieldMismatch";
    case ErrorCode::DuplicateX: return "DuplicateX";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::InvalidGroup: return "InvalidGroup";
    case ErrorCode::InvalidThreshold: return "InvalidThreshold";
    case ErrorCode::DuplicateRecipientX: return "DuplicateRecipientX";
    case ErrorCode::ZeroRecipientX: return "ZeroRecipientX";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::WrongPhase: return "WrongPhase";
    case ErrorCode::DuplicateAddress: return "DuplicateAddress";
    case ErrorCode::XCollision: return "XCollision";
    case ErrorCode::WrongDeposit: return "WrongDeposit";
    case ErrorCode::NotRegistered: return "NotRegistered";
    case ErrorCode::NotActive: return "NotActive";
    case ErrorCode::WrongCardinality: return "WrongCardinality";
    case ErrorCode::AlreadyPosted: return "AlreadyPosted";
    case ErrorCode::MissingCommitment: return "MissingCommitment";
    case ErrorCode::MissingShares: return "MissingShares";
    case ErrorCode::PlaintextModeMismatch: return "PlaintextModeMismatch";
    case ErrorCode::MalformedPayload: return "MalformedPayload";
    case ErrorCode::KeyMismatch: return "KeyMismatch";
    case ErrorCode::KeyNotRevealed: return "KeyNotRevealed";
    case ErrorCode::AlreadyAdjudicated: return "AlreadyAdjudicated";
    case ErrorCode::InsufficientCoalition: return "InsufficientCoalition";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-checkable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace drng
