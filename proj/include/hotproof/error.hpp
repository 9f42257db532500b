// Copyright (c) The hotproof authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hotproof {

enum class ErrorCode {
  InvalidArgument,
  ParseError,
  // ln_core
  InvariantViolation,
  WrongPhase,
  InsufficientLiquidity,
  UnknownHtlc,
  ChannelMismatch,
  // network_sim
  UnknownNode,
  NoRoute,
  ProbeInconclusive,
  // chain_oracle
  OracleUnavailable,
  UnknownOutpoint,
  // enclave
  StaleState,
  BadOracleSignature,
  HtlcPolicyViolation,
  BadNonceLength,
  ThresholdNotMet,
  // transcript_proof
  EmptyResponse,
  IndexOutOfRange,
  // prover_api / cli
  ServiceUnavailable,
  NotaryUnavailable,
  BadConfig,
};

std::string_view to_string(ErrorCode code);

/// Carries a machine-readable code alongside the message. The code is what
/// crosses service boundaries (HTTP error bodies, CLI exit status).
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail),
      code_(code),
      detail_(detail) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

private:
  ErrorCode code_;
  std::string detail_;
};

/// Inverse of to_string; returns false for unknown names.
bool error_code_from_string(std::string_view name, ErrorCode& out);

} // namespace hotproof
