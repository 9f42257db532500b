// Copyright (c) The hotproof authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include "hotproof/clock.hpp"
#include "hotproof/enclave.hpp"
#include "hotproof/http.hpp"
#include "hotproof/transcript.hpp"

#include <memory>
#include <mutex>
#include <optional>

namespace hotproof::prover {

inline constexpr std::string_view channels_path = "/v1/balance/channels";
inline constexpr std::string_view balance_path = "/v1/attested/balance";
inline constexpr std::string_view threshold_path = "/v1/attested/threshold";
inline constexpr std::string_view direct_path = "/v1/attested/direct";

/// The attested balance package. balance_report holds the canonical report
/// bytes; on the wire it is embedded as a JSON object.
struct AttestationPackage {
  std::string balance_report;
  enclave::AttestationQuote quote;
  std::vector<enclave::PlatformCert> cert_chain;
  enclave::FreshnessEvidence freshness;

  static AttestationPackage from_payload(const enclave::AttestedPayload& payload);
  nlohmann::ordered_json to_json() const;
  /// Re-derives balance_report by canonical re-serialization of the embedded
  /// object. Throws ParseError.
  static AttestationPackage from_json(const nlohmann::ordered_json& j);
  std::string serialize() const { return to_json().dump(2) + "\n"; }
};

/// Path plus sorted query, the string the server signs as request_path.
std::string request_target(const http::Request& request);

/// Headers carrying the server's half of the session.
inline constexpr const char* header_session_time = "X-Session-Time";
inline constexpr const char* header_session_sig = "X-Session-Signature";
inline constexpr const char* header_subject = "X-Server-Subject";
inline constexpr const char* header_pubkey = "X-Server-Pubkey";

/// The prover's node: channel set, enclave and API server identity.
/// Requests read a snapshot of the channel set; enclave calls are serialized.
class ProverNode {
public:
  ProverNode(std::vector<ln::ChannelState> channels, enclave::Enclave enclave,
             std::shared_ptr<oracle::OracleClient> oracle, SigningKey server_key, std::string subject,
             Clock clock = system_now);

  http::Response handle(const http::Request& request);

  transcript::ServerIdentity identity() const;
  std::vector<ln::ChannelState> channels() const;
  void set_channels(std::vector<ln::ChannelState> channels);
  void set_available(bool available);
  /// Applied to every balance package after the enclave produced it.
  void set_tamper(std::function<void(AttestationPackage&)> tamper);
  const enclave::Enclave& enclave() const { return enclave_; }

private:
  http::Response serve(const http::Request& request);
  http::Response sign(const http::Request& request, std::string body);

  mutable std::mutex state_mutex_;
  std::vector<ln::ChannelState> channels_;
  bool available_ = true;
  std::function<void(AttestationPackage&)> tamper_;

  std::mutex enclave_mutex_;
  enclave::Enclave enclave_;
  std::shared_ptr<oracle::OracleClient> oracle_;
  SigningKey server_key_;
  std::string subject_;
  Clock clock_;
};

struct ProofBundle {
  transcript::TranscriptProof transcript_proof;
  nlohmann::ordered_json package;

  /// {transcript_proof, package}
  nlohmann::ordered_json to_json() const;
  static ProofBundle from_json(const nlohmann::ordered_json& j);
  std::string serialize() const { return to_json().dump(2) + "\n"; }
  static ProofBundle parse(std::string_view text);
  /// The served bytes the transcript must reproduce.
  std::string package_bytes() const { return package.dump(2) + "\n"; }
};

using Fetch = std::function<std::optional<http::Response>(const http::Request&)>;
using NotarizeFn = std::function<transcript::NotaryAttestation(
  const transcript::TranscriptCommitment&, const Hash32&, const std::string&)>;

/// Fetches, commits, notarizes and reveals everything. Propagates the node's
/// error, NotaryUnavailable from the notary.
ProofBundle build_proof_bundle(const Fetch& node, const NotarizeFn& notary, const http::Request& request);
ProofBundle build_proof_bundle(const std::string& node_url, const std::string& notary_url,
                               const http::Request& request);

/// GET request for the balance package, or the threshold package when a
/// threshold is given.
http::Request attested_request(std::optional<std::uint64_t> threshold_sat = std::nullopt,
                               std::optional<Hash32> nonce = std::nullopt);

} // namespace hotproof::prover
