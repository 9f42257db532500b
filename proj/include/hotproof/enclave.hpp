// Copyright (c) The hotproof authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include "hotproof/chain_oracle.hpp"
#include "hotproof/clock.hpp"
#include "hotproof/crypto.hpp"
#include "hotproof/ln_core.hpp"

#include <functional>
#include <set>
#include <string>
#include <vector>

namespace hotproof::enclave {

enum class TcbStatus { UpToDate, OutOfDate, Revoked };

std::string_view to_string(TcbStatus s);
TcbStatus tcb_status_from_string(std::string_view s);

/// Measured configuration. Everything here is folded into the measurement, so
/// an auditor allowlisting a measurement also pins the oracle key and limits.
struct EnclavePolicy {
  double max_pending_htlc_fraction = 1.0;
  PublicKey pinned_oracle_key;

  /// Sorted-key compact JSON.
  std::string canonical_bytes() const;
};

/// Policy config file: {max_pending_htlc_fraction, tcb_status, pinned_oracle_key?}.
/// tcb_status configures the simulated platform and is not measured.
struct PolicyConfig {
  EnclavePolicy policy;
  TcbStatus tcb_status = TcbStatus::UpToDate;

  static PolicyConfig from_json(const nlohmann::json& j, const PublicKey& default_oracle_key);
};

/// H(u32 len(code_identity) || code_identity || canonical policy bytes)
Hash32 measure(std::string_view code_identity, const EnclavePolicy& policy);

struct PlatformCert {
  PublicKey platform_key;
  Bytes vendor_signature;

  /// platform key (32 bytes) || vendor signature (64 bytes)
  Bytes serialize() const;
  static PlatformCert parse(ByteView data);
  Bytes signed_bytes() const;
  std::string key_id() const { return platform_key.key_id(); }
  bool operator==(const PlatformCert&) const = default;
};

struct VendorTrustAnchor {
  PublicKey vendor_root_pubkey;
  std::set<std::string> revoked_platform_key_ids;

  /// {vendor_root_pubkey, revoked: []}
  nlohmann::json to_json() const;
  static VendorTrustAnchor from_json(const nlohmann::json& j);
};

/// The simulated hardware vendor: owns the root key that certifies platforms.
class Vendor {
public:
  explicit Vendor(SigningKey root) : root_(std::move(root)) {}

  PlatformCert certify(const PublicKey& platform_key) const;
  VendorTrustAnchor anchor() const { return {root_.public_key(), {}}; }

private:
  SigningKey root_;
};

/// One simulated TEE-capable machine.
struct Platform {
  SigningKey platform_key;
  PlatformCert cert;
  TcbStatus tcb_status = TcbStatus::UpToDate;
  Hash32 seal_secret;

  static Platform provision(const Vendor& vendor, std::string_view seed,
                            TcbStatus tcb = TcbStatus::UpToDate);
};

struct AttestationQuote {
  Hash32 mrenclave;
  TcbStatus tcb_status = TcbStatus::UpToDate;
  Hash32 report_data;
  Bytes platform_signature;
  PlatformCert platform_cert;

  /// mrenclave || tcb byte || report_data
  Bytes signed_bytes() const;
  /// {mrenclave_hex, tcb_status, report_data_hex, platform_signature_b64, platform_cert_b64}
  nlohmann::json to_json() const;
  static AttestationQuote from_json(const nlohmann::json& j);
  /// Compact sorted-key JSON; base64 of this is the package's "quote" field.
  std::string wire() const { return to_json().dump(); }
  static AttestationQuote from_wire(std::string_view wire);
  bool operator==(const AttestationQuote&) const = default;
};

enum class QuoteRejection {
  None,
  BadCertChain,
  PlatformRevoked,
  BadPlatformSignature,
  TcbOutOfDate,
  TcbRevoked,
};

std::string_view to_string(QuoteRejection r);

struct QuoteVerdict {
  bool genuine = false;
  QuoteRejection reason = QuoteRejection::None;
};

/// The vendor verification service: cert roots at the anchor, platform key
/// not revoked, signature valid, TCB up to date. Reports the first failure.
QuoteVerdict verify_quote(const AttestationQuote& quote, const VendorTrustAnchor& anchor);

struct FreshnessEvidence {
  oracle::BlockTip tip;
  std::vector<oracle::OutpointStatus> outpoint_statuses;
  /// Tip statement first, then one outspend statement per status, in order.
  std::vector<oracle::OracleStatement> oracle_statements;
  std::uint64_t checked_at = 0;

  nlohmann::json to_json() const;
  static FreshnessEvidence from_json(const nlohmann::json& j);
  /// Sorted-key compact JSON; hashed into the quote's report data.
  std::string canonical_bytes() const { return to_json().dump(); }
  bool operator==(const FreshnessEvidence&) const = default;
};

/// H(report bytes || H(canonical freshness bytes))
Hash32 report_binding(std::string_view report_bytes, const FreshnessEvidence& freshness);
Hash32 report_binding(std::string_view report_bytes, std::string_view freshness_canonical);

struct AttestedPayload {
  std::string balance_report;
  FreshnessEvidence freshness;
  AttestationQuote quote;
};

struct DirectAttestation {
  std::string balance_report;
  Hash32 nonce;
  std::uint64_t timestamp = 0;
  Bytes signature;
  PublicKey enclave_report_pubkey;
  AttestationQuote binding_quote;

  nlohmann::json to_json() const;
  static DirectAttestation from_json(const nlohmann::json& j);
};

/// u32 len(report) || report || nonce (32 bytes) || u64 timestamp, big-endian.
Bytes direct_signing_message(std::string_view report, const Hash32& nonce, std::uint64_t timestamp);
bool verify_direct_signature(const DirectAttestation& att);

struct ThresholdAttestation {
  std::uint64_t threshold_sat = 0;
  bool satisfied = true;
  Hash32 nonce;
  oracle::OracleStatement tip_statement;
  AttestationQuote quote;

  nlohmann::ordered_json to_json() const;
  static ThresholdAttestation from_json(const nlohmann::json& j);
  /// Pretty, fixed key order; what the prover serves.
  std::string serialize() const { return to_json().dump(2) + "\n"; }
};

/// Sorted-key compact JSON {kind, nonce, threshold_sat, tip_hash}.
std::string threshold_statement(std::uint64_t threshold_sat, const Hash32& nonce,
                                const Hash32& tip_hash);

using hotproof::Clock;
using hotproof::system_now;

/// A loaded enclave. Confined to one owner; calls are not internally
/// synchronized.
class Enclave {
public:
  static Enclave load(std::string code_identity, EnclavePolicy policy, Platform platform,
                      Clock clock = system_now);

  const Hash32& measurement() const { return measurement_; }
  const std::string& code_identity() const { return code_identity_; }
  const EnclavePolicy& policy() const { return policy_; }
  const PublicKey& report_public_key() const { return report_key_.public_key(); }

  AttestationQuote generate_quote(const Hash32& report_data) const;

  /// Throws StaleState, OracleUnavailable, BadOracleSignature or
  /// HtlcPolicyViolation. Never returns partial evidence.
  FreshnessEvidence check_freshness(oracle::OracleClient& oracle,
                                    const std::vector<ln::ChannelState>& channels) const;

  AttestedPayload attest_balance(const std::vector<ln::ChannelState>& channels,
                                 oracle::OracleClient& oracle) const;

  DirectAttestation sign_direct(const std::vector<ln::ChannelState>& channels, ByteView nonce,
                                std::uint64_t now, oracle::OracleClient& oracle) const;

  /// Emitted only if aggregate settled local balance > threshold_sat; otherwise
  /// ThresholdNotMet and nothing signed.
  ThresholdAttestation attest_threshold(const std::vector<ln::ChannelState>& channels,
                                        std::uint64_t threshold_sat, ByteView nonce,
                                        oracle::OracleClient& oracle) const;

private:
  Enclave(std::string code_identity, EnclavePolicy policy, Platform platform, Clock clock);

  std::string code_identity_;
  EnclavePolicy policy_;
  Platform platform_;
  Clock clock_;
  Hash32 measurement_;
  SigningKey report_key_;
};

} // namespace hotproof::enclave
