// Copyright (c) The hotproof authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "harness.hpp"
#include "hotproof/error.hpp"

#include <gtest/gtest.h>

#include <random>
#include <thread>

using namespace hotproof;
using namespace hotproof::testing;

namespace {

std::string error_of(const http::Response& r) {
  return nlohmann::json::parse(r.body).at("error").get<std::string>();
}

} // namespace

TEST(ChannelsEndpoint, ServesListingBytes) {
  Harness h({listing_channel()});
  auto r = h.get("/v1/balance/channels");
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.body, listing_canonical_json());
}

TEST(ChannelsEndpoint, NoChannelsIsAllZero) {
  Harness h({});
  auto r = h.get("/v1/balance/channels");
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(ln::parse_balance_report(r.body), ln::BalanceReport{});
}

TEST(ChannelsEndpoint, ReflectsSettledHtlc) {
  Harness h({listing_channel()});
  const auto before = h.get("/v1/balance/channels").body;
  auto c = h.node->channels()[0];
  c = ln::add_htlc(c, 1'000, ln::HtlcDirection::Received);
  c = ln::resolve_htlc(c, c.htlcs.back().id, ln::HtlcOutcome::Settle);
  h.node->set_channels({c});
  const auto after = h.get("/v1/balance/channels").body;
  EXPECT_NE(before, after);
  EXPECT_EQ(ln::parse_balance_report(after).local_balance.sat, 1'234'568u);
}

TEST(ChannelsEndpoint, UnavailableNode) {
  Harness h({listing_channel()});
  h.node->set_available(false);
  auto r = h.get("/v1/balance/channels");
  EXPECT_EQ(r.status, 503);
  EXPECT_EQ(error_of(r), "ServiceUnavailable");
}

TEST(AttestedBalance, PackageBindsAndVerifies) {
  Harness h({listing_channel()});
  auto r = h.get("/v1/attested/balance");
  ASSERT_EQ(r.status, 200) << r.body;
  auto pkg = prover::AttestationPackage::from_json(nlohmann::ordered_json::parse(r.body));
  EXPECT_EQ(pkg.serialize(), r.body);
  EXPECT_EQ(pkg.balance_report, listing_canonical_json());
  EXPECT_EQ(pkg.quote.report_data, enclave::report_binding(pkg.balance_report, pkg.freshness));
  EXPECT_TRUE(enclave::verify_quote(pkg.quote, h.vendor.anchor()).genuine);
  ASSERT_EQ(pkg.cert_chain.size(), 1u);
  EXPECT_EQ(pkg.cert_chain[0], pkg.quote.platform_cert);
  auto j = nlohmann::ordered_json::parse(r.body);
  EXPECT_EQ(j.begin().key(), "balance_report");
  EXPECT_TRUE(j["tee_attestation_payload"].contains("quote"));
  EXPECT_TRUE(j["tee_attestation_payload"].contains("cert_chain"));
}

TEST(AttestedBalance, OracleDownFailsClosed) {
  Harness h({listing_channel()});
  h.chain->set_online(false);
  auto r = h.get("/v1/attested/balance");
  EXPECT_EQ(r.status, 503);
  EXPECT_EQ(error_of(r), "OracleUnavailable");
  EXPECT_EQ(r.body.find("quote"), std::string::npos);
  EXPECT_EQ(h.get("/v1/balance/channels").status, 200);
}

TEST(AttestedBalance, SpentFundingOutpoint) {
  Harness h({listing_channel()});
  h.chain->mark_spent(listing_channel().funding_outpoint);
  auto r = h.get("/v1/attested/balance");
  EXPECT_EQ(r.status, 503);
  EXPECT_EQ(error_of(r), "StaleState");
}

TEST(AttestedThreshold, RefusedWhenNotMet) {
  Harness h({listing_channel()});
  auto nonce = to_hex(sha256("n"));
  auto ok = h.get("/v1/attested/threshold", {{"threshold_sat", "1000000"}, {"nonce", nonce}});
  ASSERT_EQ(ok.status, 200);
  EXPECT_EQ(ok.body.find("1234567"), std::string::npos);
  auto no = h.get("/v1/attested/threshold", {{"threshold_sat", "1234567"}, {"nonce", nonce}});
  EXPECT_EQ(no.status, 403);
  EXPECT_EQ(error_of(no), "ThresholdNotMet");
  auto bad = h.get("/v1/attested/threshold", {{"threshold_sat", "-1"}, {"nonce", nonce}});
  EXPECT_EQ(bad.status, 400);
  auto short_nonce = h.get("/v1/attested/threshold", {{"threshold_sat", "1"}, {"nonce", "abcd"}});
  EXPECT_EQ(error_of(short_nonce), "BadNonceLength");
}

TEST(AttestedDirect, SignsWithNonce) {
  Harness h({listing_channel()});
  auto nonce = sha256("d");
  auto r = h.get("/v1/attested/direct", {{"nonce", to_hex(nonce)}});
  ASSERT_EQ(r.status, 200);
  auto att = enclave::DirectAttestation::from_json(nlohmann::json::parse(r.body));
  EXPECT_EQ(att.nonce, nonce);
  EXPECT_EQ(att.timestamp, harness_t0);
  EXPECT_TRUE(enclave::verify_direct_signature(att));
}

TEST(Session, HeadersVerifyAgainstServedBytes) {
  Harness h({listing_channel()});
  auto r = h.get("/v1/balance/channels");
  auto id = h.node->identity();
  auto root = transcript::merkle_root(transcript::split_records(r.body));
  auto sig = from_base64(r.headers.at(prover::header_session_sig));
  EXPECT_TRUE(verify_signature(id.cert_pubkey,
                               transcript::session_signed_bytes(id.cert_fingerprint, "/v1/balance/channels", root,
                                                                std::stoull(r.headers.at(prover::header_session_time))),
                               sig));
}

TEST(Package, RoundTripsRandomReports) {
  std::mt19937_64 rng(11);
  Harness h({listing_channel()});
  auto base = prover::AttestationPackage::from_json(
    nlohmann::ordered_json::parse(h.get("/v1/attested/balance").body));
  for (int i = 0; i < 200; ++i) {
    ln::BalanceReport r;
    for (auto* p : {&r.local_balance, &r.remote_balance, &r.unsettled_local_balance, &r.unsettled_remote_balance,
                    &r.pending_open_local_balance, &r.pending_open_remote_balance}) {
      p->sat = rng() % 2'100'000'000'000'000ULL;
      p->msat = p->sat * 1000;
    }
    auto pkg = base;
    pkg.balance_report = ln::to_canonical_json(r);
    auto wire = pkg.serialize();
    auto back = prover::AttestationPackage::from_json(nlohmann::ordered_json::parse(wire));
    ASSERT_EQ(back.balance_report, pkg.balance_report);
    ASSERT_EQ(back.serialize(), wire);
    ASSERT_EQ(ln::parse_balance_report(back.balance_report), r);
  }
}

TEST(Bundle, HonestBundleRevealsServedBytes) {
  Harness h({listing_channel()});
  auto b = h.prove();
  std::string served;
  for (const auto& r : b.transcript_proof.revealed)
    served += r.record;
  EXPECT_EQ(served, b.package_bytes());
  auto again = prover::ProofBundle::parse(b.serialize());
  EXPECT_EQ(again.serialize(), b.serialize());
  EXPECT_TRUE(h.audit(b).accepted);
}

TEST(Bundle, TamperAfterNotarizationIsRejected) {
  Harness h({listing_channel()});
  auto b = h.prove();
  b.package["balance_report"]["local_balance"]["sat"] = "1234568";
  b.package["balance_report"]["local_balance"]["msat"] = "1234568000";
  auto v = h.audit(b);
  EXPECT_FALSE(v.accepted);
  EXPECT_EQ(v.stage, auditor::Stage::Delivery);

  auto raw = b.transcript_proof;
  raw.revealed[0].record[20] ^= 0x01;
  b = h.prove();
  b.transcript_proof = raw;
  EXPECT_EQ(h.audit(b).reason, "BadMerklePath");
}

TEST(Bundle, NodeErrorsPropagate) {
  Harness h({listing_channel()});
  h.chain->mark_spent(listing_channel().funding_outpoint);
  try {
    h.prove();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::StaleState);
  }
}

TEST(Bundle, NotaryUnavailable) {
  Harness h({listing_channel()});
  int dead_port;
  {
    http::Server s([](const http::Request&) { return http::Response{}; }, "127.0.0.1", 0);
    dead_port = s.port();
  }
  http::Server node([&](const http::Request& r) { return h.node->handle(r); }, "127.0.0.1", 0);
  try {
    prover::build_proof_bundle(node.url(), "http://127.0.0.1:" + std::to_string(dead_port),
                               prover::attested_request());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotaryUnavailable);
  }
}

TEST(Bundle, OverLocalhostServices) {
  Harness h({listing_channel()});
  http::Server node([&](const http::Request& r) { return h.node->handle(r); }, "127.0.0.1", 0);
  http::Server notary([&](const http::Request& r) { return transcript::handle_notary_request(h.notary, r); },
                      "127.0.0.1", 0);
  auto b = prover::build_proof_bundle(node.url(), notary.url(), prover::attested_request());
  auto v = h.audit(b);
  ASSERT_TRUE(v.accepted) << v.reason;
  EXPECT_EQ(v.balance->local_balance.sat, 1'234'567u);

  auto t = prover::build_proof_bundle(node.url(), notary.url(), prover::attested_request(1'000'000));
  auto tv = h.audit(t);
  ASSERT_TRUE(tv.accepted) << tv.reason;
  EXPECT_EQ(*tv.threshold_sat, 1'000'000u);
}

TEST(Concurrency, ParallelRequestsSeeConsistentSnapshots) {
  Harness h({listing_channel(), make_channel("b", 500'000, 250'000)});
  std::vector<std::thread> threads;
  std::atomic<int> failures{0};
  for (int t = 0; t < 8; ++t)
    threads.emplace_back([&, t] {
      for (int i = 0; i < 20; ++i) {
        auto path = (t + i) % 2 ? "/v1/attested/balance" : "/v1/balance/channels";
        auto r = h.get(path);
        if (r.status != 200)
          ++failures;
        else if (path[4] == 'a') {
          auto pkg = prover::AttestationPackage::from_json(nlohmann::ordered_json::parse(r.body));
          if (pkg.quote.report_data != enclave::report_binding(pkg.balance_report, pkg.freshness))
            ++failures;
        }
      }
    });
  for (int i = 0; i < 20; ++i) {
    auto chans = h.node->channels();
    h.node->set_channels(chans);
  }
  for (auto& th : threads)
    th.join();
  EXPECT_EQ(failures.load(), 0);
}
