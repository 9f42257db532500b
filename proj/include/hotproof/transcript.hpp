// Copyright (c) The hotproof authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include "hotproof/clock.hpp"
#include "hotproof/crypto.hpp"
#include "hotproof/http.hpp"

#include <json.hpp>

#include <mutex>
#include <set>
#include <string>
#include <vector>

namespace hotproof::transcript {

constexpr std::size_t record_size = 16 * 1024;

/// H(cert_pubkey || subject)
Hash32 server_fingerprint(const PublicKey& cert_pubkey, std::string_view subject);

struct ServerIdentity {
  PublicKey cert_pubkey;
  Hash32 cert_fingerprint;
  std::string subject;

  static ServerIdentity make(const PublicKey& cert_pubkey, std::string subject);
  bool consistent() const { return cert_fingerprint == server_fingerprint(cert_pubkey, subject); }
  bool operator==(const ServerIdentity&) const = default;
};

/// Fixed-size records, the last one ragged. Throws EmptyResponse.
std::vector<std::string> split_records(std::string_view response);

Hash32 leaf_hash(std::uint64_t index, std::string_view record);
Hash32 node_hash(const Hash32& left, const Hash32& right);
/// Leaves H(0x00 || u64 index || record), nodes H(0x01 || l || r), an odd
/// trailing node is promoted to the next level unchanged.
Hash32 merkle_root(const std::vector<std::string>& records);
/// Sibling hashes bottom-up; levels where the node is promoted contribute none.
std::vector<Hash32> merkle_path(const std::vector<std::string>& records, std::size_t index);
bool verify_merkle_path(const Hash32& root, std::uint64_t record_count, std::uint64_t index,
                        std::string_view record, const std::vector<Hash32>& path);

/// Bytes the server signs for a session.
Bytes session_signed_bytes(const Hash32& fingerprint, std::string_view request_path,
                           const Hash32& merkle_root, std::uint64_t session_time);
Bytes sign_session(const SigningKey& server_key, const Hash32& fingerprint,
                   std::string_view request_path, const Hash32& merkle_root,
                   std::uint64_t session_time);

struct SessionTranscript {
  ServerIdentity server;
  std::string request_path;
  std::vector<std::string> records;
  std::uint64_t session_time = 0;
  Bytes server_session_sig;

  std::string response() const;
};

SessionTranscript record_session(const SigningKey& server_key, const std::string& subject,
                                 const std::string& request_path, std::string_view response,
                                 std::uint64_t session_time);

struct TranscriptCommitment {
  Hash32 merkle_root;
  std::uint64_t record_count = 0;

  bool operator==(const TranscriptCommitment&) const = default;
};

TranscriptCommitment commit_transcript(const SessionTranscript& transcript);

struct NotaryAttestation {
  TranscriptCommitment commitment;
  Hash32 server_fingerprint;
  std::string request_path;
  std::uint64_t notarized_time = 0;
  Bytes notary_sig;

  Bytes signed_bytes() const;
  /// {merkle_root_hex, record_count, server_fingerprint_hex, request_path,
  ///  notarized_time, notary_sig_b64}
  nlohmann::ordered_json to_json() const;
  static NotaryAttestation from_json(const nlohmann::json& j);
  bool operator==(const NotaryAttestation&) const = default;
};

NotaryAttestation notarize(const TranscriptCommitment& commitment, const Hash32& server_fingerprint,
                           const std::string& request_path, const SigningKey& notary_key,
                           std::uint64_t now);
bool verify_notary_signature(const NotaryAttestation& att, const PublicKey& notary_pubkey);

struct RevealedRecord {
  std::uint64_t index = 0;
  std::string record;
  std::vector<Hash32> path;

  bool operator==(const RevealedRecord&) const = default;
};

struct TranscriptProof {
  NotaryAttestation notary_attestation;
  ServerIdentity server;
  std::uint64_t session_time = 0;
  Bytes server_session_sig;
  std::vector<RevealedRecord> revealed;

  /// {notary_attestation, server:{subject, cert_pubkey_b64, fingerprint_hex},
  ///  session_time, server_session_sig_b64, revealed:[{index, record_b64, path}]}
  nlohmann::ordered_json to_json() const;
  static TranscriptProof from_json(const nlohmann::json& j);
  bool operator==(const TranscriptProof&) const = default;
};

/// Throws IndexOutOfRange.
TranscriptProof reveal(const SessionTranscript& transcript, const NotaryAttestation& attestation,
                       const std::set<std::size_t>& indices);

enum class TranscriptRejection { None, BadNotarySig, ServerMismatch, BadServerSig, BadMerklePath, Expired };

std::string_view to_string(TranscriptRejection r);

struct TranscriptVerdict {
  bool valid = false;
  TranscriptRejection reason = TranscriptRejection::None;
  std::vector<RevealedRecord> records;
  std::uint64_t notarized_time = 0;
};

constexpr std::uint64_t default_max_age_seconds = 300;

/// Reports the first failing check, in the order of TranscriptRejection.
TranscriptVerdict verify_transcript_proof(const TranscriptProof& proof, const PublicKey& notary_pubkey,
                                          const ServerIdentity& expected_server,
                                          std::uint64_t max_age_seconds, std::uint64_t now);

/// The notary service. Signing is serialized on one mutex.
class Notary {
public:
  explicit Notary(SigningKey key, Clock clock = system_now)
    : key_(std::move(key)), clock_(std::move(clock)) {}

  NotaryAttestation notarize(const TranscriptCommitment& commitment, const Hash32& server_fingerprint,
                             const std::string& request_path);
  const PublicKey& public_key() const { return key_.public_key(); }

private:
  std::mutex mutex_;
  SigningKey key_;
  Clock clock_;
};

/// POST /notarize {merkle_root_hex, record_count, server_fingerprint_hex,
/// request_path} -> NotaryAttestation JSON.
http::Response handle_notary_request(Notary& notary, const http::Request& request);

/// Throws NotaryUnavailable when the service cannot be reached or refuses.
NotaryAttestation request_notarization(const std::string& notary_url, const TranscriptCommitment& commitment,
                                       const Hash32& server_fingerprint, const std::string& request_path);

} // namespace hotproof::transcript
