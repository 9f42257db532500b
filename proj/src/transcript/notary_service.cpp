// Copyright (c) The hotproof authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "hotproof/error.hpp"
#include "hotproof/transcript.hpp"

namespace hotproof::transcript {

NotaryAttestation Notary::notarize(const TranscriptCommitment& commitment, const Hash32& server_fingerprint,
                                   const std::string& request_path) {
  std::lock_guard lock(mutex_);
  return transcript::notarize(commitment, server_fingerprint, request_path, key_, clock_());
}

http::Response handle_notary_request(Notary& notary, const http::Request& request) {
  if (request.method != "POST" || request.path != "/notarize")
    return http::error_response(404, ErrorCode::InvalidArgument, "no route " + request.path);
  TranscriptCommitment c;
  Hash32 fingerprint;
  std::string path;
  try {
    auto j = nlohmann::json::parse(request.body);
    c.merkle_root = hash_from_hex(j.at("merkle_root_hex").get<std::string>());
    c.record_count = j.at("record_count").get<std::uint64_t>();
    fingerprint = hash_from_hex(j.at("server_fingerprint_hex").get<std::string>());
    path = j.at("request_path").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    return http::error_response(400, ErrorCode::ParseError, e.what());
  }
  if (c.record_count == 0)
    return http::error_response(400, ErrorCode::EmptyResponse, "record_count must be positive");
  http::Response r;
  r.body = notary.notarize(c, fingerprint, path).to_json().dump() + "\n";
  return r;
}

NotaryAttestation request_notarization(const std::string& notary_url, const TranscriptCommitment& commitment,
                                       const Hash32& server_fingerprint, const std::string& request_path) {
  nlohmann::ordered_json body;
  body["merkle_root_hex"] = to_hex(commitment.merkle_root);
  body["record_count"] = commitment.record_count;
  body["server_fingerprint_hex"] = to_hex(server_fingerprint);
  body["request_path"] = request_path;
  auto res = http::send(notary_url, {"POST", "/notarize", {}, body.dump()});
  if (!res)
    throw Error(ErrorCode::NotaryUnavailable, "cannot reach " + notary_url);
  if (res->status != 200)
    throw Error(ErrorCode::NotaryUnavailable, http::error_from_response(*res).what());
  try {
    return NotaryAttestation::from_json(nlohmann::json::parse(res->body));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::NotaryUnavailable, std::string("unparseable notary reply: ") + e.what());
  } catch (const Error& e) {
    throw Error(ErrorCode::NotaryUnavailable, std::string("unparseable notary reply: ") + e.what());
  }
}

} // namespace hotproof::transcript
