// Copyright (c) The hotproof authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include "hotproof/auditor.hpp"
#include "hotproof/prover.hpp"
#include "test_support.hpp"

#include <atomic>
#include <memory>

namespace hotproof::testing {

inline constexpr std::uint64_t harness_t0 = 1'750'000'000;
inline constexpr const char* audited_identity = "lnd-enclave-v1.0-audited";

struct HarnessOptions {
  enclave::TcbStatus tcb = enclave::TcbStatus::UpToDate;
  std::string identity = audited_identity;
  double max_pending_htlc_fraction = 1.0;
};

/// Vendor, oracle, enclave, node, notary and audit policy wired in-process,
/// all on one adjustable clock.
struct Harness {
  std::shared_ptr<std::atomic<std::uint64_t>> now = std::make_shared<std::atomic<std::uint64_t>>(harness_t0);
  Clock clock = [n = now] { return n->load(); };
  enclave::Vendor vendor{SigningKey::from_seed("h/vendor")};
  SigningKey oracle_key = SigningKey::from_seed("h/oracle");
  SigningKey server_key = SigningKey::from_seed("h/server");
  std::shared_ptr<oracle::ChainOracle> chain;
  transcript::Notary notary{SigningKey::from_seed("h/notary"), clock};
  std::unique_ptr<prover::ProverNode> node;
  auditor::AuditPolicy policy;

  explicit Harness(std::vector<ln::ChannelState> channels, HarnessOptions opt = {}) {
    oracle::ChainFixture fx;
    fx.tip_height = 800'000;
    for (const auto& c : channels)
      fx.utxos.push_back(c.funding_outpoint);
    chain = std::make_shared<oracle::ChainOracle>(fx, oracle_key);

    enclave::EnclavePolicy ep;
    ep.pinned_oracle_key = oracle_key.public_key();
    ep.max_pending_htlc_fraction = opt.max_pending_htlc_fraction;
    auto enc = enclave::Enclave::load(opt.identity, ep, enclave::Platform::provision(vendor, "h/machine", opt.tcb),
                                      clock);
    node = std::make_unique<prover::ProverNode>(std::move(channels), std::move(enc), chain, server_key,
                                                "node.example", clock);

    enclave::EnclavePolicy audited = ep;
    audited.max_pending_htlc_fraction = 1.0;
    policy.trusted_measurements.insert(enclave::measure(audited_identity, audited));
    policy.vendor_anchor = vendor.anchor();
    policy.notary_pubkey = notary.public_key();
    policy.expected_server = node->identity();
    policy.pinned_oracle_key = oracle_key.public_key();
  }

  prover::Fetch fetch() {
    return [this](const http::Request& r) -> std::optional<http::Response> { return node->handle(r); };
  }

  prover::NotarizeFn notarize() {
    return [this](const transcript::TranscriptCommitment& c, const Hash32& fp, const std::string& path) {
      return notary.notarize(c, fp, path);
    };
  }

  prover::ProofBundle prove(std::optional<std::uint64_t> threshold = std::nullopt) {
    return prover::build_proof_bundle(fetch(), notarize(),
                                      prover::attested_request(threshold, sha256("h/nonce")));
  }

  auditor::AuditVerdict audit(const prover::ProofBundle& b, std::uint64_t at_offset = 5) {
    return auditor::verify_hot_proof(b, policy, harness_t0 + at_offset, chain.get());
  }

  http::Response get(std::string_view path, std::map<std::string, std::string> query = {}) {
    return node->handle({"GET", std::string(path), std::move(query), {}});
  }
};

/// Re-notarizes a bundle whose package was edited, so only the layers below
/// Delivery can catch the edit. Requires the server key.
inline prover::ProofBundle reprove_package(Harness& h, const prover::ProofBundle& b, const std::string& package) {
  auto target = b.transcript_proof.notary_attestation.request_path;
  auto t = transcript::record_session(h.server_key, "node.example", target, package, b.transcript_proof.session_time);
  auto att = h.notary.notarize(transcript::commit_transcript(t), t.server.cert_fingerprint, target);
  std::set<std::size_t> all;
  for (std::size_t i = 0; i < t.records.size(); ++i)
    all.insert(i);
  prover::ProofBundle out;
  out.transcript_proof = transcript::reveal(t, att, all);
  out.package = nlohmann::ordered_json::parse(package);
  return out;
}

} // namespace hotproof::testing
