// Copyright (c) The hotproof authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "hotproof/transcript.hpp"
#include "hotproof/error.hpp"

namespace hotproof::transcript {

namespace {

constexpr std::string_view session_domain = "hotproof/session/v1";
constexpr std::string_view notary_domain = "hotproof/notary/v1";

template <typename Fn>
auto json_guard(const char* what, Fn&& fn) {
  try {
    return fn();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string(what) + ": " + e.what());
  }
}

std::vector<Hash32> leaves(const std::vector<std::string>& records) {
  std::vector<Hash32> level;
  level.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i)
    level.push_back(leaf_hash(i, records[i]));
  return level;
}

std::vector<Hash32> next_level(const std::vector<Hash32>& level) {
  std::vector<Hash32> up;
  up.reserve((level.size() + 1) / 2);
  for (std::size_t i = 0; i + 1 < level.size(); i += 2)
    up.push_back(node_hash(level[i], level[i + 1]));
  if (level.size() % 2 == 1)
    up.push_back(level.back());
  return up;
}

} // namespace

Hash32 server_fingerprint(const PublicKey& cert_pubkey, std::string_view subject) {
  ByteWriter w;
  w.raw(cert_pubkey.view()).raw(as_bytes(subject));
  return sha256(w.bytes());
}

ServerIdentity ServerIdentity::make(const PublicKey& cert_pubkey, std::string subject) {
  return {cert_pubkey, server_fingerprint(cert_pubkey, subject), std::move(subject)};
}

std::vector<std::string> split_records(std::string_view response) {
  if (response.empty())
    throw Error(ErrorCode::EmptyResponse, "nothing to record");
  std::vector<std::string> out;
  for (std::size_t pos = 0; pos < response.size(); pos += record_size)
    out.emplace_back(response.substr(pos, record_size));
  return out;
}

Hash32 leaf_hash(std::uint64_t index, std::string_view record) {
  ByteWriter w;
  w.u8(0x00).u64(index).raw(as_bytes(record));
  return sha256(w.bytes());
}

Hash32 node_hash(const Hash32& left, const Hash32& right) {
  ByteWriter w;
  w.u8(0x01).raw(left).raw(right);
  return sha256(w.bytes());
}

Hash32 merkle_root(const std::vector<std::string>& records) {
  if (records.empty())
    throw Error(ErrorCode::EmptyResponse, "no records to commit");
  auto level = leaves(records);
  while (level.size() > 1)
    level = next_level(level);
  return level.front();
}

std::vector<Hash32> merkle_path(const std::vector<std::string>& records, std::size_t index) {
  if (index >= records.size())
    throw Error(ErrorCode::IndexOutOfRange, std::to_string(index));
  std::vector<Hash32> path;
  auto level = leaves(records);
  while (level.size() > 1) {
    const auto sibling = index ^ 1;
    if (sibling < level.size())
      path.push_back(level[sibling]);
    level = next_level(level);
    index /= 2;
  }
  return path;
}

bool verify_merkle_path(const Hash32& root, std::uint64_t record_count, std::uint64_t index,
                        std::string_view record, const std::vector<Hash32>& path) {
  if (index >= record_count)
    return false;
  auto h = leaf_hash(index, record);
  std::size_t used = 0;
  for (std::uint64_t n = record_count; n > 1; n = (n + 1) / 2, index /= 2) {
    if (index % 2 == 1 || index + 1 < n) {
      if (used == path.size())
        return false;
      h = index % 2 == 1 ? node_hash(path[used], h) : node_hash(h, path[used]);
      ++used;
    }
  }
  return used == path.size() && h == root;
}

Bytes session_signed_bytes(const Hash32& fingerprint, std::string_view request_path,
                           const Hash32& merkle_root, std::uint64_t session_time) {
  ByteWriter w;
  w.prefixed(session_domain).raw(fingerprint).prefixed(request_path).raw(merkle_root).u64(session_time);
  return std::move(w).bytes();
}

Bytes sign_session(const SigningKey& server_key, const Hash32& fingerprint, std::string_view request_path,
                   const Hash32& merkle_root, std::uint64_t session_time) {
  return server_key.sign(session_signed_bytes(fingerprint, request_path, merkle_root, session_time));
}

std::string SessionTranscript::response() const {
  std::string out;
  for (const auto& r : records)
    out += r;
  return out;
}

SessionTranscript record_session(const SigningKey& server_key, const std::string& subject,
                                 const std::string& request_path, std::string_view response,
                                 std::uint64_t session_time) {
  SessionTranscript t;
  t.server = ServerIdentity::make(server_key.public_key(), subject);
  t.request_path = request_path;
  t.records = split_records(response);
  t.session_time = session_time;
  t.server_session_sig =
    sign_session(server_key, t.server.cert_fingerprint, request_path, merkle_root(t.records), session_time);
  return t;
}

TranscriptCommitment commit_transcript(const SessionTranscript& transcript) {
  return {merkle_root(transcript.records), transcript.records.size()};
}

Bytes NotaryAttestation::signed_bytes() const {
  ByteWriter w;
  w.prefixed(notary_domain)
    .raw(commitment.merkle_root)
    .u64(commitment.record_count)
    .raw(server_fingerprint)
    .prefixed(request_path)
    .u64(notarized_time);
  return std::move(w).bytes();
}

nlohmann::ordered_json NotaryAttestation::to_json() const {
  nlohmann::ordered_json j;
  j["merkle_root_hex"] = to_hex(commitment.merkle_root);
  j["record_count"] = commitment.record_count;
  j["server_fingerprint_hex"] = to_hex(server_fingerprint);
  j["request_path"] = request_path;
  j["notarized_time"] = notarized_time;
  j["notary_sig_b64"] = to_base64(notary_sig);
  return j;
}

NotaryAttestation NotaryAttestation::from_json(const nlohmann::json& j) {
  return json_guard("notary attestation", [&] {
    NotaryAttestation a;
    a.commitment.merkle_root = hash_from_hex(j.at("merkle_root_hex").get<std::string>());
    a.commitment.record_count = j.at("record_count").get<std::uint64_t>();
    a.server_fingerprint = hash_from_hex(j.at("server_fingerprint_hex").get<std::string>());
    a.request_path = j.at("request_path").get<std::string>();
    a.notarized_time = j.at("notarized_time").get<std::uint64_t>();
    a.notary_sig = from_base64(j.at("notary_sig_b64").get<std::string>());
    return a;
  });
}

NotaryAttestation notarize(const TranscriptCommitment& commitment, const Hash32& server_fingerprint,
                           const std::string& request_path, const SigningKey& notary_key,
                           std::uint64_t now) {
  NotaryAttestation a{commitment, server_fingerprint, request_path, now, {}};
  a.notary_sig = notary_key.sign(a.signed_bytes());
  return a;
}

bool verify_notary_signature(const NotaryAttestation& att, const PublicKey& notary_pubkey) {
  return verify_signature(notary_pubkey, att.signed_bytes(), att.notary_sig);
}

nlohmann::ordered_json TranscriptProof::to_json() const {
  nlohmann::ordered_json j;
  j["notary_attestation"] = notary_attestation.to_json();
  j["server"] = {{"subject", server.subject},
                 {"cert_pubkey_b64", to_base64(server.cert_pubkey.view())},
                 {"fingerprint_hex", to_hex(server.cert_fingerprint)}};
  j["session_time"] = session_time;
  j["server_session_sig_b64"] = to_base64(server_session_sig);
  auto revealed_json = nlohmann::ordered_json::array();
  for (const auto& r : revealed) {
    auto path = nlohmann::ordered_json::array();
    for (const auto& h : r.path)
      path.push_back(to_hex(h));
    revealed_json.push_back({{"index", r.index}, {"record_b64", to_base64(r.record)}, {"path", path}});
  }
  j["revealed"] = revealed_json;
  return j;
}

TranscriptProof TranscriptProof::from_json(const nlohmann::json& j) {
  return json_guard("transcript proof", [&] {
    TranscriptProof p;
    p.notary_attestation = NotaryAttestation::from_json(j.at("notary_attestation"));
    const auto& s = j.at("server");
    p.server.subject = s.at("subject").get<std::string>();
    p.server.cert_pubkey = PublicKey::from_bytes(from_base64(s.at("cert_pubkey_b64").get<std::string>()));
    p.server.cert_fingerprint = hash_from_hex(s.at("fingerprint_hex").get<std::string>());
    p.session_time = j.at("session_time").get<std::uint64_t>();
    p.server_session_sig = from_base64(j.at("server_session_sig_b64").get<std::string>());
    for (const auto& r : j.at("revealed")) {
      RevealedRecord rec;
      rec.index = r.at("index").get<std::uint64_t>();
      rec.record = hotproof::to_string(ByteView(from_base64(r.at("record_b64").get<std::string>())));
      for (const auto& h : r.at("path"))
        rec.path.push_back(hash_from_hex(h.get<std::string>()));
      p.revealed.push_back(std::move(rec));
    }
    return p;
  });
}

TranscriptProof reveal(const SessionTranscript& transcript, const NotaryAttestation& attestation,
                       const std::set<std::size_t>& indices) {
  for (auto i : indices)
    if (i >= transcript.records.size())
      throw Error(ErrorCode::IndexOutOfRange,
                  std::to_string(i) + " >= " + std::to_string(transcript.records.size()));
  TranscriptProof p;
  p.notary_attestation = attestation;
  p.server = transcript.server;
  p.session_time = transcript.session_time;
  p.server_session_sig = transcript.server_session_sig;
  for (auto i : indices)
    p.revealed.push_back({i, transcript.records[i], merkle_path(transcript.records, i)});
  return p;
}

std::string_view to_string(TranscriptRejection r) {
  switch (r) {
    case TranscriptRejection::None:
      return "None";
    case TranscriptRejection::BadNotarySig:
      return "BadNotarySig";
    case TranscriptRejection::ServerMismatch:
      return "ServerMismatch";
    case TranscriptRejection::BadServerSig:
      return "BadServerSig";
    case TranscriptRejection::BadMerklePath:
      return "BadMerklePath";
    case TranscriptRejection::Expired:
      return "Expired";
  }
  return "?";
}

TranscriptVerdict verify_transcript_proof(const TranscriptProof& proof, const PublicKey& notary_pubkey,
                                          const ServerIdentity& expected_server,
                                          std::uint64_t max_age_seconds, std::uint64_t now) {
  const auto& att = proof.notary_attestation;
  auto reject = [](TranscriptRejection r) { return TranscriptVerdict{false, r, {}, 0}; };

  if (!verify_notary_signature(att, notary_pubkey))
    return reject(TranscriptRejection::BadNotarySig);

  if (!expected_server.consistent() || !proof.server.consistent() ||
      proof.server.cert_fingerprint != expected_server.cert_fingerprint ||
      att.server_fingerprint != expected_server.cert_fingerprint)
    return reject(TranscriptRejection::ServerMismatch);

  if (!verify_signature(proof.server.cert_pubkey,
                        session_signed_bytes(att.server_fingerprint, att.request_path,
                                             att.commitment.merkle_root, proof.session_time),
                        proof.server_session_sig))
    return reject(TranscriptRejection::BadServerSig);

  std::set<std::uint64_t> seen;
  for (const auto& r : proof.revealed) {
    if (!seen.insert(r.index).second ||
        !verify_merkle_path(att.commitment.merkle_root, att.commitment.record_count, r.index, r.record, r.path))
      return reject(TranscriptRejection::BadMerklePath);
  }

  if (now > att.notarized_time && now - att.notarized_time > max_age_seconds)
    return reject(TranscriptRejection::Expired);
  // An old signed session notarized late is just as stale.
  const auto gap = att.notarized_time > proof.session_time ? att.notarized_time - proof.session_time
                                                           : proof.session_time - att.notarized_time;
  if (gap > max_age_seconds)
    return reject(TranscriptRejection::Expired);

  return {true, TranscriptRejection::None, proof.revealed, att.notarized_time};
}

} // namespace hotproof::transcript
