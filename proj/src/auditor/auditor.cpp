// Copyright (c) The hotproof authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "hotproof/auditor.hpp"
#include "hotproof/error.hpp"

namespace hotproof::auditor {

namespace {

AuditVerdict reject(Stage stage, std::string reason) {
  AuditVerdict v;
  v.stage = stage;
  v.reason = std::move(reason);
  return v;
}

std::optional<AuditVerdict> check_delivery(const prover::ProofBundle& bundle, const AuditPolicy& policy,
                                           std::uint64_t now, const std::string& expected_target) {
  const auto& proof = bundle.transcript_proof;
  auto tv = transcript::verify_transcript_proof(proof, policy.notary_pubkey, policy.expected_server,
                                                policy.max_proof_age_seconds, now);
  if (!tv.valid)
    return reject(Stage::Delivery, std::string(transcript::to_string(tv.reason)));
  if (proof.notary_attestation.request_path != expected_target)
    return reject(Stage::Delivery, "RequestPathMismatch");

  std::string served;
  for (std::size_t i = 0; i < tv.records.size(); ++i) {
    if (tv.records[i].index != i)
      return reject(Stage::Delivery, "IncompleteReveal");
    served += tv.records[i].record;
  }
  if (tv.records.size() != proof.notary_attestation.commitment.record_count)
    return reject(Stage::Delivery, "IncompleteReveal");
  if (served != bundle.package_bytes())
    return reject(Stage::Delivery, "PackageMismatch");
  return std::nullopt;
}

std::optional<AuditVerdict> check_quote(const enclave::AttestationQuote& quote, const AuditPolicy& policy) {
  auto qv = enclave::verify_quote(quote, policy.vendor_anchor);
  if (!qv.genuine)
    return reject(Stage::HardwareQuote, std::string(enclave::to_string(qv.reason)));
  return std::nullopt;
}

std::optional<AuditVerdict> check_tip_age(const oracle::BlockTip& tip, const AuditPolicy& policy,
                                          oracle::OracleClient* own_oracle) {
  if (!own_oracle)
    return std::nullopt;
  oracle::BlockTip own;
  try {
    auto stmt = own_oracle->tip();
    if (!oracle::verify_statement(stmt, policy.pinned_oracle_key))
      return reject(Stage::Freshness, "AuditorOracleUntrusted");
    own = oracle::parse_tip_payload(stmt);
  } catch (const Error& e) {
    return reject(Stage::Freshness, std::string("AuditorOracleUnavailable: ") + e.what());
  }
  if (own.height > tip.height && own.height - tip.height > policy.max_freshness_age_blocks)
    return reject(Stage::Freshness, "TipTooOld");
  return std::nullopt;
}

AuditVerdict verify_balance(const prover::ProofBundle& bundle, const AuditPolicy& policy, std::uint64_t now,
                            oracle::OracleClient* own_oracle) {
  if (auto r = check_delivery(bundle, policy, now, std::string(prover::balance_path)))
    return *r;
  prover::AttestationPackage pkg;
  ln::BalanceReport report;
  try {
    pkg = prover::AttestationPackage::from_json(bundle.package);
    report = ln::parse_balance_report(pkg.balance_report);
  } catch (const Error& e) {
    return reject(Stage::Delivery, std::string("MalformedPackage: ") + e.what());
  }

  if (auto r = check_quote(pkg.quote, policy))
    return *r;
  if (pkg.cert_chain.empty() || pkg.cert_chain.front() != pkg.quote.platform_cert)
    return reject(Stage::HardwareQuote, "CertChainMismatch");

  if (!policy.trusted_measurements.count(pkg.quote.mrenclave))
    return reject(Stage::SoftwareBinding, "UnknownMeasurement");
  if (enclave::report_binding(pkg.balance_report, pkg.freshness) != pkg.quote.report_data)
    return reject(Stage::SoftwareBinding, "BindingMismatch");

  const auto& ev = pkg.freshness;
  if (ev.oracle_statements.size() != ev.outpoint_statuses.size() + 1)
    return reject(Stage::Freshness, "EvidenceIncomplete");
  try {
    const auto& tip_stmt = ev.oracle_statements.front();
    if (!oracle::verify_statement(tip_stmt, policy.pinned_oracle_key) || oracle::parse_tip_payload(tip_stmt) != ev.tip)
      return reject(Stage::Freshness, "BadOracleSignature");
    for (std::size_t i = 0; i < ev.outpoint_statuses.size(); ++i) {
      const auto& stmt = ev.oracle_statements[i + 1];
      const auto& status = ev.outpoint_statuses[i];
      if (!oracle::verify_statement(stmt, policy.pinned_oracle_key) || oracle::parse_outspend_payload(stmt) != status)
        return reject(Stage::Freshness, "BadOracleSignature");
      if (status.as_of.height < ev.tip.height)
        return reject(Stage::Freshness, "InconsistentEvidence");
      if (status.spent)
        return reject(Stage::Freshness, "StaleState");
    }
  } catch (const Error& e) {
    return reject(Stage::Freshness, std::string("BadOracleSignature: ") + e.what());
  }
  if (auto r = check_tip_age(ev.tip, policy, own_oracle))
    return *r;
  if (own_oracle) {
    for (const auto& s : ev.outpoint_statuses) {
      try {
        auto stmt = own_oracle->outspend(s.outpoint);
        if (!oracle::verify_statement(stmt, policy.pinned_oracle_key))
          return reject(Stage::Freshness, "AuditorOracleUntrusted");
        if (oracle::parse_outspend_payload(stmt).spent)
          return reject(Stage::Freshness, "StaleState");
      } catch (const Error& e) {
        return reject(Stage::Freshness, std::string("StaleState: ") + e.what());
      }
    }
  }

  AuditVerdict v;
  v.accepted = true;
  v.stage = Stage::Accepted;
  v.reason = "Accepted";
  v.balance = report;
  v.notarized_time = bundle.transcript_proof.notary_attestation.notarized_time;
  v.measurement = pkg.quote.mrenclave;
  return v;
}

AuditVerdict verify_threshold(const prover::ProofBundle& bundle, const AuditPolicy& policy, std::uint64_t now,
                              oracle::OracleClient* own_oracle) {
  enclave::ThresholdAttestation t;
  try {
    t = enclave::ThresholdAttestation::from_json(nlohmann::json(bundle.package));
  } catch (const Error& e) {
    return reject(Stage::Delivery, std::string("MalformedPackage: ") + e.what());
  }
  http::Request expected;
  expected.path = prover::threshold_path;
  expected.query["threshold_sat"] = std::to_string(t.threshold_sat);
  expected.query["nonce"] = to_hex(t.nonce);
  if (auto r = check_delivery(bundle, policy, now, prover::request_target(expected)))
    return *r;
  if (!t.satisfied)
    return reject(Stage::Delivery, "MalformedPackage: not satisfied");

  if (auto r = check_quote(t.quote, policy))
    return *r;

  if (!policy.trusted_measurements.count(t.quote.mrenclave))
    return reject(Stage::SoftwareBinding, "UnknownMeasurement");
  oracle::BlockTip tip;
  try {
    tip = oracle::parse_tip_payload(t.tip_statement);
  } catch (const Error&) {
    return reject(Stage::SoftwareBinding, "BindingMismatch");
  }
  if (sha256(enclave::threshold_statement(t.threshold_sat, t.nonce, tip.block_hash)) != t.quote.report_data)
    return reject(Stage::SoftwareBinding, "BindingMismatch");

  if (!oracle::verify_statement(t.tip_statement, policy.pinned_oracle_key))
    return reject(Stage::Freshness, "BadOracleSignature");
  if (auto r = check_tip_age(tip, policy, own_oracle))
    return *r;

  AuditVerdict v;
  v.accepted = true;
  v.stage = Stage::Accepted;
  v.reason = "Accepted";
  v.threshold_sat = t.threshold_sat;
  v.notarized_time = bundle.transcript_proof.notary_attestation.notarized_time;
  v.measurement = t.quote.mrenclave;
  return v;
}

} // namespace

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::Delivery:
      return "Delivery";
    case Stage::HardwareQuote:
      return "HardwareQuote";
    case Stage::SoftwareBinding:
      return "SoftwareBinding";
    case Stage::Freshness:
      return "Freshness";
    case Stage::Accepted:
      return "Accepted";
  }
  return "?";
}

nlohmann::ordered_json AuditPolicy::to_json() const {
  nlohmann::ordered_json j;
  auto trusted = nlohmann::ordered_json::array();
  for (const auto& m : trusted_measurements)
    trusted.push_back(to_hex(m));
  j["trusted_measurements"] = trusted;
  j["vendor_anchor"] = vendor_anchor.to_json();
  j["notary_pubkey"] = notary_pubkey.hex();
  j["expected_server"] = {{"subject", expected_server.subject}, {"cert_pubkey", expected_server.cert_pubkey.hex()}};
  j["max_proof_age_seconds"] = max_proof_age_seconds;
  j["max_freshness_age_blocks"] = max_freshness_age_blocks;
  j["pinned_oracle_key"] = pinned_oracle_key.hex();
  j["direct_window_seconds"] = direct_window_seconds;
  return j;
}

AuditPolicy AuditPolicy::from_json(const nlohmann::json& j) {
  AuditPolicy p;
  try {
    for (const auto& m : j.at("trusted_measurements"))
      p.trusted_measurements.insert(hash_from_hex(m.get<std::string>()));
    p.vendor_anchor = enclave::VendorTrustAnchor::from_json(j.at("vendor_anchor"));
    p.notary_pubkey = PublicKey::from_hex(j.at("notary_pubkey").get<std::string>());
    const auto& s = j.at("expected_server");
    p.expected_server = transcript::ServerIdentity::make(PublicKey::from_hex(s.at("cert_pubkey").get<std::string>()),
                                                         s.at("subject").get<std::string>());
    p.max_proof_age_seconds = j.value("max_proof_age_seconds", p.max_proof_age_seconds);
    p.max_freshness_age_blocks = j.value("max_freshness_age_blocks", p.max_freshness_age_blocks);
    p.pinned_oracle_key = PublicKey::from_hex(j.at("pinned_oracle_key").get<std::string>());
    p.direct_window_seconds = j.value("direct_window_seconds", p.direct_window_seconds);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("audit policy: ") + e.what());
  }
  if (p.trusted_measurements.empty())
    throw Error(ErrorCode::BadConfig, "audit policy trusts no measurement");
  return p;
}

AuditVerdict verify_hot_proof(const prover::ProofBundle& bundle, const AuditPolicy& policy, std::uint64_t now,
                              oracle::OracleClient* own_oracle) {
  if (bundle.package.is_object() && bundle.package.contains("threshold_sat"))
    return verify_threshold(bundle, policy, now, own_oracle);
  return verify_balance(bundle, policy, now, own_oracle);
}

AuditVerdict verify_direct(const enclave::DirectAttestation& att, const Hash32& expected_nonce,
                           const AuditPolicy& policy, std::uint64_t now) {
  if (att.nonce != expected_nonce)
    return reject(Stage::Delivery, "NonceMismatch");
  const auto age = now >= att.timestamp ? now - att.timestamp : att.timestamp - now;
  if (age > policy.direct_window_seconds)
    return reject(Stage::Delivery, "Expired");

  if (!enclave::verify_quote(att.binding_quote, policy.vendor_anchor).genuine)
    return reject(Stage::HardwareQuote, "QuoteInvalid");

  if (!policy.trusted_measurements.count(att.binding_quote.mrenclave))
    return reject(Stage::SoftwareBinding, "UnknownMeasurement");
  if (att.binding_quote.report_data != sha256(att.enclave_report_pubkey.view()) || !enclave::verify_direct_signature(att))
    return reject(Stage::SoftwareBinding, "BadSignature");

  AuditVerdict v;
  try {
    v.balance = ln::parse_balance_report(att.balance_report);
  } catch (const Error&) {
    return reject(Stage::SoftwareBinding, "BadSignature");
  }
  v.accepted = true;
  v.stage = Stage::Accepted;
  v.reason = "Accepted";
  v.measurement = att.binding_quote.mrenclave;
  return v;
}

Hash32 NonceRegistry::issue() {
  auto n = hash_from_bytes(random_bytes(32));
  std::lock_guard lock(mutex_);
  outstanding_.insert(n);
  return n;
}

bool NonceRegistry::consume(const Hash32& nonce) {
  std::lock_guard lock(mutex_);
  return outstanding_.erase(nonce) == 1;
}

AuditVerdict DirectAuditor::verify(const enclave::DirectAttestation& att, const Hash32& expected_nonce,
                                   std::uint64_t now) {
  if (!nonces_.consume(expected_nonce))
    return reject(Stage::Delivery, "NonceMismatch");
  return verify_direct(att, expected_nonce, policy_, now);
}

std::string render_audit_record(const AuditVerdict& verdict) {
  nlohmann::ordered_json j;
  j["accepted"] = verdict.accepted;
  j["stage"] = std::string(to_string(verdict.stage));
  j["reason"] = verdict.reason;
  if (verdict.balance)
    j["balance"] = ln::to_ordered_json(*verdict.balance);
  if (verdict.threshold_sat)
    j["threshold_sat"] = *verdict.threshold_sat;
  if (verdict.notarized_time)
    j["notarized_time"] = *verdict.notarized_time;
  if (verdict.measurement)
    j["measurement"] = to_hex(*verdict.measurement);
  return j.dump(2) + "\n";
}

} // namespace hotproof::auditor
