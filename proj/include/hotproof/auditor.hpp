// Copyright (c) The hotproof authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include "hotproof/enclave.hpp"
#include "hotproof/prover.hpp"
#include "hotproof/transcript.hpp"

#include <mutex>
#include <optional>
#include <set>

namespace hotproof::auditor {

enum class Stage { Delivery, HardwareQuote, SoftwareBinding, Freshness, Accepted };

std::string_view to_string(Stage s);

struct AuditPolicy {
  std::set<Hash32> trusted_measurements;
  enclave::VendorTrustAnchor vendor_anchor;
  PublicKey notary_pubkey;
  transcript::ServerIdentity expected_server;
  std::uint64_t max_proof_age_seconds = transcript::default_max_age_seconds;
  std::uint64_t max_freshness_age_blocks = 6;
  PublicKey pinned_oracle_key;
  std::uint64_t direct_window_seconds = 120;

  nlohmann::ordered_json to_json() const;
  /// Throws BadConfig when trusted_measurements is empty, ParseError on shape.
  static AuditPolicy from_json(const nlohmann::json& j);
};

struct AuditVerdict {
  bool accepted = false;
  Stage stage = Stage::Delivery;
  std::string reason;
  std::optional<ln::BalanceReport> balance;
  std::optional<std::uint64_t> threshold_sat;
  std::optional<std::uint64_t> notarized_time;
  std::optional<Hash32> measurement;
};

/// Stages in order: Delivery, HardwareQuote, SoftwareBinding, Freshness. The
/// verdict names the first stage that fails. When own_oracle is given its tip
/// bounds the evidence age and every funding outpoint is re-queried.
AuditVerdict verify_hot_proof(const prover::ProofBundle& bundle, const AuditPolicy& policy, std::uint64_t now,
                              oracle::OracleClient* own_oracle = nullptr);

/// Pure check of a direct attestation against a nonce the caller issued.
AuditVerdict verify_direct(const enclave::DirectAttestation& att, const Hash32& expected_nonce,
                           const AuditPolicy& policy, std::uint64_t now);

/// One-time nonces. Consumption is atomic per nonce.
class NonceRegistry {
public:
  Hash32 issue();
  /// True once per issued nonce.
  bool consume(const Hash32& nonce);

private:
  std::mutex mutex_;
  std::set<Hash32> outstanding_;
};

/// Auditor-side session for the direct variant.
class DirectAuditor {
public:
  explicit DirectAuditor(AuditPolicy policy) : policy_(std::move(policy)) {}

  Hash32 issue_nonce() { return nonces_.issue(); }
  /// Consumes expected_nonce; a second call with it yields NonceMismatch.
  AuditVerdict verify(const enclave::DirectAttestation& att, const Hash32& expected_nonce, std::uint64_t now);

private:
  AuditPolicy policy_;
  NonceRegistry nonces_;
};

/// Deterministic {accepted, stage, reason, balance?, threshold_sat?,
/// notarized_time?, measurement?}.
std::string render_audit_record(const AuditVerdict& verdict);

} // namespace hotproof::auditor
