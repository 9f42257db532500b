// Copyright (c) The hotproof authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "hotproof/enclave.hpp"
#include "hotproof/error.hpp"

namespace hotproof::enclave {

namespace {

Hash32 nonce_from(ByteView nonce) {
  if (nonce.size() != 32)
    throw Error(ErrorCode::BadNonceLength,
                "nonce must be 32 bytes, got " + std::to_string(nonce.size()));
  return hash_from_bytes(nonce);
}

SigningKey derive_report_key(const Hash32& seal_secret, const Hash32& measurement) {
  ByteWriter w;
  w.raw(seal_secret).raw(measurement);
  return SigningKey::from_seed(to_hex(sha256(w.bytes())));
}

void check_htlc_policy(const ln::ChannelState& c, double max_pending_fraction) {
  std::uint64_t offered = 0, pending = 0;
  for (const auto& h : c.htlcs) {
    pending += h.amount_msat;
    if (h.direction == ln::HtlcDirection::Offered)
      offered += h.amount_msat;
  }
  if (offered > c.local_msat)
    throw Error(ErrorCode::HtlcPolicyViolation,
                c.channel_id + ": offered htlcs exceed the local balance");
  const long double limit =
    static_cast<long double>(max_pending_fraction) * static_cast<long double>(c.capacity_sat) * 1000.0L;
  if (static_cast<long double>(pending) > limit)
    throw Error(ErrorCode::HtlcPolicyViolation,
                c.channel_id + ": pending htlcs exceed the configured fraction of capacity");
}

} // namespace

Enclave::Enclave(std::string code_identity, EnclavePolicy policy, Platform platform, Clock clock)
  : code_identity_(std::move(code_identity)),
    policy_(std::move(policy)),
    platform_(std::move(platform)),
    clock_(std::move(clock)),
    measurement_(measure(code_identity_, policy_)),
    report_key_(derive_report_key(platform_.seal_secret, measurement_)) {}

Enclave Enclave::load(std::string code_identity, EnclavePolicy policy, Platform platform,
                      Clock clock) {
  return Enclave(std::move(code_identity), std::move(policy), std::move(platform), std::move(clock));
}

AttestationQuote Enclave::generate_quote(const Hash32& report_data) const {
  AttestationQuote q;
  q.mrenclave = measurement_;
  q.tcb_status = platform_.tcb_status;
  q.report_data = report_data;
  q.platform_cert = platform_.cert;
  q.platform_signature = platform_.platform_key.sign(q.signed_bytes());
  return q;
}

FreshnessEvidence Enclave::check_freshness(oracle::OracleClient& oracle,
                                           const std::vector<ln::ChannelState>& channels) const {
  const auto& pinned = policy_.pinned_oracle_key;
  FreshnessEvidence ev;

  auto tip_stmt = oracle.tip();
  if (!oracle::verify_statement(tip_stmt, pinned))
    throw Error(ErrorCode::BadOracleSignature, "tip statement does not verify under the pinned key");
  ev.tip = oracle::parse_tip_payload(tip_stmt);
  ev.oracle_statements.push_back(std::move(tip_stmt));

  for (const auto& c : channels) {
    if (c.phase == ln::ChannelPhase::Closed)
      continue;
    oracle::OracleStatement stmt;
    try {
      stmt = oracle.outspend(c.funding_outpoint);
    } catch (const Error& e) {
      // Unknown to the chain: cannot prove it is unspent, so fail closed.
      if (e.code() == ErrorCode::UnknownOutpoint)
        throw Error(ErrorCode::StaleState, c.funding_outpoint.to_string() + " (unknown outpoint)");
      throw;
    }
    if (!oracle::verify_statement(stmt, pinned))
      throw Error(ErrorCode::BadOracleSignature, "outspend statement does not verify under the pinned key");
    auto status = oracle::parse_outspend_payload(stmt);
    if (status.outpoint != c.funding_outpoint || status.as_of.height < ev.tip.height)
      throw Error(ErrorCode::BadOracleSignature, "outspend statement does not answer the query");
    if (status.spent)
      throw Error(ErrorCode::StaleState, c.funding_outpoint.to_string() + " is spent");
    ev.outpoint_statuses.push_back(status);
    ev.oracle_statements.push_back(std::move(stmt));
  }

  for (const auto& c : channels)
    if (c.phase != ln::ChannelPhase::Closed)
      check_htlc_policy(c, policy_.max_pending_htlc_fraction);

  ev.checked_at = clock_();
  return ev;
}

AttestedPayload Enclave::attest_balance(const std::vector<ln::ChannelState>& channels,
                                        oracle::OracleClient& oracle) const {
  auto report = ln::to_canonical_json(ln::aggregate_balance_report(channels));
  auto freshness = check_freshness(oracle, channels);
  auto quote = generate_quote(report_binding(report, freshness));
  return {std::move(report), std::move(freshness), std::move(quote)};
}

DirectAttestation Enclave::sign_direct(const std::vector<ln::ChannelState>& channels,
                                       ByteView nonce, std::uint64_t now,
                                       oracle::OracleClient& oracle) const {
  DirectAttestation att;
  att.nonce = nonce_from(nonce);
  att.balance_report = ln::to_canonical_json(ln::aggregate_balance_report(channels));
  check_freshness(oracle, channels);
  att.timestamp = now;
  att.signature = report_key_.sign(direct_signing_message(att.balance_report, att.nonce, now));
  att.enclave_report_pubkey = report_key_.public_key();
  att.binding_quote = generate_quote(sha256(att.enclave_report_pubkey.view()));
  return att;
}

ThresholdAttestation Enclave::attest_threshold(const std::vector<ln::ChannelState>& channels,
                                               std::uint64_t threshold_sat, ByteView nonce,
                                               oracle::OracleClient& oracle) const {
  const auto n = nonce_from(nonce);
  const auto report = ln::aggregate_balance_report(channels);
  auto freshness = check_freshness(oracle, channels);
  if (!(report.local_balance.sat > threshold_sat))
    throw Error(ErrorCode::ThresholdNotMet, "refused");

  ThresholdAttestation t;
  t.threshold_sat = threshold_sat;
  t.satisfied = true;
  t.nonce = n;
  t.tip_statement = freshness.oracle_statements.front();
  t.quote = generate_quote(sha256(threshold_statement(threshold_sat, n, freshness.tip.block_hash)));
  return t;
}

} // namespace hotproof::enclave
