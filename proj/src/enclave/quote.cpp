// Copyright (c) The hotproof authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "hotproof/enclave.hpp"
#include "hotproof/error.hpp"

namespace hotproof::enclave {

namespace {

constexpr std::string_view cert_domain = "hotproof/platform-cert/v1";

template <typename Fn>
auto json_guard(const char* what, Fn&& fn) {
  try {
    return fn();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string(what) + ": " + e.what());
  }
}

} // namespace

std::string_view to_string(TcbStatus s) {
  switch (s) {
    case TcbStatus::UpToDate:
      return "UpToDate";
    case TcbStatus::OutOfDate:
      return "OutOfDate";
    case TcbStatus::Revoked:
      return "Revoked";
  }
  return "?";
}

TcbStatus tcb_status_from_string(std::string_view s) {
  if (s == "UpToDate")
    return TcbStatus::UpToDate;
  if (s == "OutOfDate")
    return TcbStatus::OutOfDate;
  if (s == "Revoked")
    return TcbStatus::Revoked;
  throw Error(ErrorCode::ParseError, "unknown tcb status " + std::string(s));
}

std::string_view to_string(QuoteRejection r) {
  switch (r) {
    case QuoteRejection::None:
      return "None";
    case QuoteRejection::BadCertChain:
      return "BadCertChain";
    case QuoteRejection::PlatformRevoked:
      return "PlatformRevoked";
    case QuoteRejection::BadPlatformSignature:
      return "BadPlatformSignature";
    case QuoteRejection::TcbOutOfDate:
      return "TcbOutOfDate";
    case QuoteRejection::TcbRevoked:
      return "TcbRevoked";
  }
  return "?";
}

std::string EnclavePolicy::canonical_bytes() const {
  return nlohmann::json{{"max_pending_htlc_fraction", max_pending_htlc_fraction},
                        {"pinned_oracle_key", pinned_oracle_key.hex()}}
    .dump();
}

PolicyConfig PolicyConfig::from_json(const nlohmann::json& j, const PublicKey& default_oracle_key) {
  return json_guard("policy config", [&] {
    PolicyConfig c;
    c.policy.max_pending_htlc_fraction = j.value("max_pending_htlc_fraction", 1.0);
    if (!(c.policy.max_pending_htlc_fraction >= 0.0))
      throw Error(ErrorCode::BadConfig, "max_pending_htlc_fraction must be non-negative");
    c.policy.pinned_oracle_key = j.contains("pinned_oracle_key")
                                   ? PublicKey::from_hex(j["pinned_oracle_key"].get<std::string>())
                                   : default_oracle_key;
    c.tcb_status = tcb_status_from_string(j.value("tcb_status", std::string("UpToDate")));
    return c;
  });
}

Hash32 measure(std::string_view code_identity, const EnclavePolicy& policy) {
  ByteWriter w;
  w.prefixed(code_identity).raw(as_bytes(policy.canonical_bytes()));
  return sha256(w.bytes());
}

Bytes PlatformCert::signed_bytes() const {
  ByteWriter w;
  w.prefixed(cert_domain).raw(platform_key.view());
  return std::move(w).bytes();
}

Bytes PlatformCert::serialize() const {
  ByteWriter w;
  w.raw(platform_key.view()).raw(vendor_signature);
  return std::move(w).bytes();
}

PlatformCert PlatformCert::parse(ByteView data) {
  if (data.size() != 32 + 64)
    throw Error(ErrorCode::ParseError, "platform cert must be 96 bytes");
  PlatformCert c;
  c.platform_key = PublicKey::from_bytes(data.first(32));
  c.vendor_signature.assign(data.begin() + 32, data.end());
  return c;
}

nlohmann::json VendorTrustAnchor::to_json() const {
  return {{"vendor_root_pubkey", vendor_root_pubkey.hex()},
          {"revoked", std::vector<std::string>(revoked_platform_key_ids.begin(),
                                               revoked_platform_key_ids.end())}};
}

VendorTrustAnchor VendorTrustAnchor::from_json(const nlohmann::json& j) {
  return json_guard("vendor trust anchor", [&] {
    VendorTrustAnchor a;
    a.vendor_root_pubkey = PublicKey::from_hex(j.at("vendor_root_pubkey").get<std::string>());
    for (const auto& id : j.value("revoked", nlohmann::json::array()))
      a.revoked_platform_key_ids.insert(id.get<std::string>());
    return a;
  });
}

PlatformCert Vendor::certify(const PublicKey& platform_key) const {
  PlatformCert c{platform_key, {}};
  c.vendor_signature = root_.sign(c.signed_bytes());
  return c;
}

Platform Platform::provision(const Vendor& vendor, std::string_view seed, TcbStatus tcb) {
  auto key = SigningKey::from_seed(std::string(seed) + "/platform-key");
  auto cert = vendor.certify(key.public_key());
  return Platform{std::move(key), std::move(cert), tcb, sha256(std::string(seed) + "/seal")};
}

Bytes AttestationQuote::signed_bytes() const {
  ByteWriter w;
  w.raw(mrenclave).u8(static_cast<std::uint8_t>(tcb_status)).raw(report_data);
  return std::move(w).bytes();
}

nlohmann::json AttestationQuote::to_json() const {
  return {{"mrenclave_hex", to_hex(mrenclave)},
          {"tcb_status", std::string(to_string(tcb_status))},
          {"report_data_hex", to_hex(report_data)},
          {"platform_signature_b64", to_base64(platform_signature)},
          {"platform_cert_b64", to_base64(platform_cert.serialize())}};
}

AttestationQuote AttestationQuote::from_json(const nlohmann::json& j) {
  return json_guard("quote", [&] {
    AttestationQuote q;
    q.mrenclave = hash_from_hex(j.at("mrenclave_hex").get<std::string>());
    q.tcb_status = tcb_status_from_string(j.at("tcb_status").get<std::string>());
    q.report_data = hash_from_hex(j.at("report_data_hex").get<std::string>());
    q.platform_signature = from_base64(j.at("platform_signature_b64").get<std::string>());
    q.platform_cert = PlatformCert::parse(from_base64(j.at("platform_cert_b64").get<std::string>()));
    return q;
  });
}

AttestationQuote AttestationQuote::from_wire(std::string_view wire) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(wire);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, std::string("quote: ") + e.what());
  }
  return from_json(j);
}

QuoteVerdict verify_quote(const AttestationQuote& quote, const VendorTrustAnchor& anchor) {
  const auto& cert = quote.platform_cert;
  if (!verify_signature(anchor.vendor_root_pubkey, cert.signed_bytes(), cert.vendor_signature))
    return {false, QuoteRejection::BadCertChain};
  if (anchor.revoked_platform_key_ids.count(cert.key_id()))
    return {false, QuoteRejection::PlatformRevoked};
  if (!verify_signature(cert.platform_key, quote.signed_bytes(), quote.platform_signature))
    return {false, QuoteRejection::BadPlatformSignature};
  if (quote.tcb_status == TcbStatus::OutOfDate)
    return {false, QuoteRejection::TcbOutOfDate};
  if (quote.tcb_status == TcbStatus::Revoked)
    return {false, QuoteRejection::TcbRevoked};
  return {true, QuoteRejection::None};
}

} // namespace hotproof::enclave
