// Copyright (c) The hotproof authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "hotproof/error.hpp"

#include <array>
#include <utility>

namespace hotproof {

namespace {

constexpr std::array<std::pair<ErrorCode, std::string_view>, 22> names{{
  {ErrorCode::InvalidArgument, "InvalidArgument"},
  {ErrorCode::ParseError, "ParseError"},
  {ErrorCode::InvariantViolation, "InvariantViolation"},
  {ErrorCode::WrongPhase, "WrongPhase"},
  {ErrorCode::InsufficientLiquidity, "InsufficientLiquidity"},
  {ErrorCode::UnknownHtlc, "UnknownHtlc"},
  {ErrorCode::ChannelMismatch, "ChannelMismatch"},
  {ErrorCode::UnknownNode, "UnknownNode"},
  {ErrorCode::NoRoute, "NoRoute"},
  {ErrorCode::ProbeInconclusive, "ProbeInconclusive"},
  {ErrorCode::OracleUnavailable, "OracleUnavailable"},
  {ErrorCode::UnknownOutpoint, "UnknownOutpoint"},
  {ErrorCode::StaleState, "StaleState"},
  {ErrorCode::BadOracleSignature, "BadOracleSignature"},
  {ErrorCode::HtlcPolicyViolation, "HtlcPolicyViolation"},
  {ErrorCode::BadNonceLength, "BadNonceLength"},
  {ErrorCode::ThresholdNotMet, "ThresholdNotMet"},
  {ErrorCode::EmptyResponse, "EmptyResponse"},
  {ErrorCode::IndexOutOfRange, "IndexOutOfRange"},
  {ErrorCode::ServiceUnavailable, "ServiceUnavailable"},
  {ErrorCode::NotaryUnavailable, "NotaryUnavailable"},
  {ErrorCode::BadConfig, "BadConfig"},
}};

} // namespace

std::string_view to_string(ErrorCode code) {
  for (const auto& [c, name] : names)
    if (c == code)
      return name;
  return "Unknown";
}

bool error_code_from_string(std::string_view name, ErrorCode& out) {
  for (const auto& [c, n] : names) {
    if (n == name) {
      out = c;
      return true;
    }
  }
  return false;
}

} // namespace hotproof
