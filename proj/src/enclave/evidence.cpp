// Copyright (c) The hotproof authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "hotproof/enclave.hpp"
#include "hotproof/error.hpp"

namespace hotproof::enclave {

namespace {

template <typename Fn>
auto json_guard(const char* what, Fn&& fn) {
  try {
    return fn();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string(what) + ": " + e.what());
  }
}

nlohmann::json status_to_json(const oracle::OutpointStatus& s) {
  return {{"outpoint", ln::outpoint_to_json(s.outpoint)},
          {"spent", s.spent},
          {"as_of", oracle::to_json(s.as_of)}};
}

} // namespace

nlohmann::json FreshnessEvidence::to_json() const {
  auto statuses = nlohmann::json::array();
  for (const auto& s : outpoint_statuses)
    statuses.push_back(status_to_json(s));
  auto statements = nlohmann::json::array();
  for (const auto& s : oracle_statements)
    statements.push_back(oracle::to_json(s));
  return {{"tip", oracle::to_json(tip)},
          {"outpoint_statuses", statuses},
          {"oracle_statements", statements},
          {"checked_at", checked_at}};
}

FreshnessEvidence FreshnessEvidence::from_json(const nlohmann::json& j) {
  return json_guard("freshness evidence", [&] {
    FreshnessEvidence f;
    f.tip = oracle::tip_from_json(j.at("tip"));
    for (const auto& s : j.at("outpoint_statuses"))
      f.outpoint_statuses.push_back({ln::outpoint_from_json(s.at("outpoint")),
                                     s.at("spent").get<bool>(),
                                     oracle::tip_from_json(s.at("as_of"))});
    for (const auto& s : j.at("oracle_statements"))
      f.oracle_statements.push_back(oracle::statement_from_json(s));
    f.checked_at = j.at("checked_at").get<std::uint64_t>();
    return f;
  });
}

Hash32 report_binding(std::string_view report_bytes, std::string_view freshness_canonical) {
  const auto inner = sha256(freshness_canonical);
  ByteWriter w;
  w.raw(as_bytes(report_bytes)).raw(inner);
  return sha256(w.bytes());
}

Hash32 report_binding(std::string_view report_bytes, const FreshnessEvidence& freshness) {
  return report_binding(report_bytes, freshness.canonical_bytes());
}

Bytes direct_signing_message(std::string_view report, const Hash32& nonce, std::uint64_t timestamp) {
  ByteWriter w;
  w.prefixed(report).raw(nonce).u64(timestamp);
  return std::move(w).bytes();
}

bool verify_direct_signature(const DirectAttestation& att) {
  return verify_signature(att.enclave_report_pubkey,
                          direct_signing_message(att.balance_report, att.nonce, att.timestamp),
                          att.signature);
}

nlohmann::json DirectAttestation::to_json() const {
  return {{"balance_report_b64", to_base64(balance_report)},
          {"nonce_hex", to_hex(nonce)},
          {"timestamp", timestamp},
          {"signature_b64", to_base64(signature)},
          {"enclave_report_pubkey_hex", enclave_report_pubkey.hex()},
          {"binding_quote", binding_quote.to_json()}};
}

DirectAttestation DirectAttestation::from_json(const nlohmann::json& j) {
  return json_guard("direct attestation", [&] {
    DirectAttestation a;
    a.balance_report = hotproof::to_string(ByteView(from_base64(j.at("balance_report_b64").get<std::string>())));
    a.nonce = hash_from_hex(j.at("nonce_hex").get<std::string>());
    a.timestamp = j.at("timestamp").get<std::uint64_t>();
    a.signature = from_base64(j.at("signature_b64").get<std::string>());
    a.enclave_report_pubkey = PublicKey::from_hex(j.at("enclave_report_pubkey_hex").get<std::string>());
    a.binding_quote = AttestationQuote::from_json(j.at("binding_quote"));
    return a;
  });
}

std::string threshold_statement(std::uint64_t threshold_sat, const Hash32& nonce,
                                const Hash32& tip_hash) {
  return nlohmann::json{{"kind", "threshold"},
                        {"threshold_sat", threshold_sat},
                        {"nonce", to_hex(nonce)},
                        {"tip_hash", to_hex(tip_hash)}}
    .dump();
}

nlohmann::ordered_json ThresholdAttestation::to_json() const {
  nlohmann::ordered_json j;
  j["threshold_sat"] = threshold_sat;
  j["satisfied"] = satisfied;
  j["nonce_hex"] = to_hex(nonce);
  j["tip_statement"] = oracle::to_json(tip_statement);
  j["quote"] = quote.to_json();
  return j;
}

ThresholdAttestation ThresholdAttestation::from_json(const nlohmann::json& j) {
  return json_guard("threshold attestation", [&] {
    ThresholdAttestation t;
    t.threshold_sat = j.at("threshold_sat").get<std::uint64_t>();
    t.satisfied = j.at("satisfied").get<bool>();
    t.nonce = hash_from_hex(j.at("nonce_hex").get<std::string>());
    t.tip_statement = oracle::statement_from_json(j.at("tip_statement"));
    t.quote = AttestationQuote::from_json(j.at("quote"));
    return t;
  });
}

} // namespace hotproof::enclave
