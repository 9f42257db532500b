// Copyright (c) The hotproof authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include "hotproof/enclave.hpp"
#include "hotproof/error.hpp"

#include <iosfwd>
#include <string>

namespace hotproof::cli {

/// Process exit codes.
enum Exit : int {
  exit_ok = 0,
  exit_failure = 1,
  exit_config = 2,
  exit_no_route = 3,
  exit_notary_unavailable = 4,
  exit_service_unavailable = 5,
  exit_refused = 6,
  exit_delivery = 10,
  exit_hardware_quote = 11,
  exit_software_binding = 12,
  exit_freshness = 13,
};

int exit_code_for(ErrorCode code);

inline constexpr const char* default_identity = "lnd-enclave-v1.0-audited";
inline constexpr const char* default_subject = "localhost";

/// All key material is derived from one seed as from_seed(seed + "/" + role).
SigningKey role_key(const std::string& seed, const std::string& role);
enclave::Vendor vendor_for(const std::string& seed);
enclave::Platform platform_for(const std::string& seed, enclave::TcbStatus tcb);

/// Runs one subcommand. Output goes to out, diagnostics to err.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace hotproof::cli
