// Copyright (c) The hotproof authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "hotproof/prover.hpp"
#include "hotproof/error.hpp"

#include <algorithm>
#include <cctype>

namespace hotproof::prover {

namespace {

http::Response enclave_error(const Error& e) {
  switch (e.code()) {
    case ErrorCode::StaleState:
    case ErrorCode::OracleUnavailable:
    case ErrorCode::BadOracleSignature:
    case ErrorCode::HtlcPolicyViolation:
      return http::error_response(503, e);
    case ErrorCode::ThresholdNotMet:
      return http::error_response(403, e);
    default:
      return http::error_response(400, e);
  }
}

Bytes query_bytes(const http::Request& request, const std::string& key) {
  auto it = request.query.find(key);
  if (it == request.query.end())
    throw Error(ErrorCode::InvalidArgument, "missing query parameter " + key);
  return from_hex(it->second);
}

std::uint64_t query_u64(const http::Request& request, const std::string& key) {
  auto it = request.query.find(key);
  if (it == request.query.end())
    throw Error(ErrorCode::InvalidArgument, "missing query parameter " + key);
  const auto& v = it->second;
  if (v.empty() || v.size() > 19 || !std::all_of(v.begin(), v.end(), [](unsigned char c) { return std::isdigit(c); }))
    throw Error(ErrorCode::InvalidArgument, key + " must be a decimal integer");
  return std::stoull(v);
}

std::optional<std::string> find_header(const http::Response& r, std::string_view name) {
  for (const auto& [k, v] : r.headers)
    if (std::equal(k.begin(), k.end(), name.begin(), name.end(),
                   [](char a, char b) { return std::tolower(a) == std::tolower(b); }))
      return v;
  return std::nullopt;
}

} // namespace

AttestationPackage AttestationPackage::from_payload(const enclave::AttestedPayload& payload) {
  return {payload.balance_report, payload.quote, {payload.quote.platform_cert}, payload.freshness};
}

nlohmann::ordered_json AttestationPackage::to_json() const {
  nlohmann::ordered_json j;
  j["balance_report"] = nlohmann::ordered_json::parse(balance_report);
  auto chain = nlohmann::ordered_json::array();
  for (const auto& c : cert_chain)
    chain.push_back(to_base64(c.serialize()));
  nlohmann::ordered_json payload;
  payload["quote"] = to_base64(quote.wire());
  payload["cert_chain"] = chain;
  payload["freshness"] = freshness.to_json();
  j["tee_attestation_payload"] = payload;
  return j;
}

AttestationPackage AttestationPackage::from_json(const nlohmann::ordered_json& j) {
  try {
    AttestationPackage p;
    p.balance_report = ln::to_canonical_json(ln::balance_report_from_json(j.at("balance_report")));
    const auto& payload = j.at("tee_attestation_payload");
    p.quote = enclave::AttestationQuote::from_wire(
      hotproof::to_string(ByteView(from_base64(payload.at("quote").get<std::string>()))));
    for (const auto& c : payload.at("cert_chain"))
      p.cert_chain.push_back(enclave::PlatformCert::parse(from_base64(c.get<std::string>())));
    p.freshness = enclave::FreshnessEvidence::from_json(nlohmann::json(payload.at("freshness")));
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("attestation package: ") + e.what());
  }
}

std::string request_target(const http::Request& request) {
  std::string out = request.path;
  char sep = '?';
  for (const auto& [k, v] : request.query) {
    out += sep + k + "=" + v;
    sep = '&';
  }
  return out;
}

ProverNode::ProverNode(std::vector<ln::ChannelState> channels, enclave::Enclave enclave,
                       std::shared_ptr<oracle::OracleClient> oracle, SigningKey server_key, std::string subject,
                       Clock clock)
  : channels_(std::move(channels)),
    enclave_(std::move(enclave)),
    oracle_(std::move(oracle)),
    server_key_(std::move(server_key)),
    subject_(std::move(subject)),
    clock_(std::move(clock)) {}

transcript::ServerIdentity ProverNode::identity() const {
  return transcript::ServerIdentity::make(server_key_.public_key(), subject_);
}

std::vector<ln::ChannelState> ProverNode::channels() const {
  std::lock_guard lock(state_mutex_);
  return channels_;
}

void ProverNode::set_channels(std::vector<ln::ChannelState> channels) {
  std::lock_guard lock(state_mutex_);
  channels_ = std::move(channels);
}

void ProverNode::set_available(bool available) {
  std::lock_guard lock(state_mutex_);
  available_ = available;
}

void ProverNode::set_tamper(std::function<void(AttestationPackage&)> tamper) {
  std::lock_guard lock(state_mutex_);
  tamper_ = std::move(tamper);
}

http::Response ProverNode::sign(const http::Request& request, std::string body) {
  http::Response r;
  const auto target = request_target(request);
  const auto now = clock_();
  const auto id = identity();
  const auto root = transcript::merkle_root(transcript::split_records(body));
  r.headers[header_session_time] = std::to_string(now);
  r.headers[header_session_sig] =
    to_base64(transcript::sign_session(server_key_, id.cert_fingerprint, target, root, now));
  r.headers[header_subject] = subject_;
  r.headers[header_pubkey] = id.cert_pubkey.hex();
  r.body = std::move(body);
  return r;
}

http::Response ProverNode::handle(const http::Request& request) {
  try {
    return serve(request);
  } catch (const Error& e) {
    return enclave_error(e);
  }
}

http::Response ProverNode::serve(const http::Request& request) {
  std::vector<ln::ChannelState> snapshot;
  std::function<void(AttestationPackage&)> tamper;
  {
    std::lock_guard lock(state_mutex_);
    if (!available_)
      return http::error_response(503, ErrorCode::ServiceUnavailable, "node offline");
    snapshot = channels_;
    tamper = tamper_;
  }
  if (request.method != "GET")
    return http::error_response(404, ErrorCode::InvalidArgument, "no route " + request.path);

  if (request.path == channels_path)
    return sign(request, ln::to_canonical_json(ln::aggregate_balance_report(snapshot)));

  if (request.path == balance_path) {
    std::unique_lock lock(enclave_mutex_);
    auto package = AttestationPackage::from_payload(enclave_.attest_balance(snapshot, *oracle_));
    lock.unlock();
    if (tamper)
      tamper(package);
    return sign(request, package.serialize());
  }

  if (request.path == threshold_path) {
    const auto threshold = query_u64(request, "threshold_sat");
    const auto nonce = query_bytes(request, "nonce");
    std::lock_guard lock(enclave_mutex_);
    return sign(request, enclave_.attest_threshold(snapshot, threshold, nonce, *oracle_).serialize());
  }

  if (request.path == direct_path) {
    const auto nonce = query_bytes(request, "nonce");
    std::lock_guard lock(enclave_mutex_);
    auto att = enclave_.sign_direct(snapshot, nonce, clock_(), *oracle_);
    return sign(request, att.to_json().dump(2) + "\n");
  }

  return http::error_response(404, ErrorCode::InvalidArgument, "no route " + request.path);
}

nlohmann::ordered_json ProofBundle::to_json() const {
  nlohmann::ordered_json j;
  j["transcript_proof"] = transcript_proof.to_json();
  j["package"] = package;
  return j;
}

ProofBundle ProofBundle::from_json(const nlohmann::ordered_json& j) {
  try {
    ProofBundle b;
    b.transcript_proof = transcript::TranscriptProof::from_json(nlohmann::json(j.at("transcript_proof")));
    b.package = j.at("package");
    return b;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("proof bundle: ") + e.what());
  }
}

ProofBundle ProofBundle::parse(std::string_view text) {
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("proof bundle: ") + e.what());
  }
  return from_json(j);
}

ProofBundle build_proof_bundle(const Fetch& node, const NotarizeFn& notary, const http::Request& request) {
  auto res = node(request);
  if (!res)
    throw Error(ErrorCode::ServiceUnavailable, "cannot reach prover node");
  if (res->status != 200)
    throw http::error_from_response(*res);

  auto time = find_header(*res, header_session_time);
  auto sig = find_header(*res, header_session_sig);
  auto subject = find_header(*res, header_subject);
  auto pubkey = find_header(*res, header_pubkey);
  if (!time || !sig || !subject || !pubkey)
    throw Error(ErrorCode::ParseError, "response lacks session headers");

  transcript::SessionTranscript t;
  t.server = transcript::ServerIdentity::make(PublicKey::from_hex(*pubkey), *subject);
  t.request_path = request_target(request);
  t.records = transcript::split_records(res->body);
  try {
    t.session_time = std::stoull(*time);
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::ParseError, "bad session time " + *time);
  }
  t.server_session_sig = from_base64(*sig);

  const auto commitment = transcript::commit_transcript(t);
  const auto attestation = notary(commitment, t.server.cert_fingerprint, t.request_path);

  std::set<std::size_t> all;
  for (std::size_t i = 0; i < t.records.size(); ++i)
    all.insert(i);

  ProofBundle b;
  b.transcript_proof = transcript::reveal(t, attestation, all);
  try {
    b.package = nlohmann::ordered_json::parse(res->body);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("package: ") + e.what());
  }
  return b;
}

ProofBundle build_proof_bundle(const std::string& node_url, const std::string& notary_url,
                               const http::Request& request) {
  return build_proof_bundle(
    [&](const http::Request& r) { return http::send(node_url, r); },
    [&](const transcript::TranscriptCommitment& c, const Hash32& fp, const std::string& path) {
      return transcript::request_notarization(notary_url, c, fp, path);
    },
    request);
}

http::Request attested_request(std::optional<std::uint64_t> threshold_sat, std::optional<Hash32> nonce) {
  http::Request r;
  r.method = "GET";
  if (!threshold_sat) {
    r.path = balance_path;
    return r;
  }
  r.path = threshold_path;
  r.query["threshold_sat"] = std::to_string(*threshold_sat);
  r.query["nonce"] = to_hex(nonce ? *nonce : hash_from_bytes(random_bytes(32)));
  return r;
}

} // namespace hotproof::prover
