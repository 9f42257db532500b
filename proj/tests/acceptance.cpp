// Copyright (c) The hotproof authors. All rights reserved.
// Licensed under the Apache 2.0 License.
//
// End-to-end acceptance run. One PASS/FAIL line per criterion; exit status is
// the number of failures.

#include "harness.hpp"
#include "hotproof/cli.hpp"
#include "hotproof/network_sim.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

using namespace hotproof;
using namespace hotproof::testing;
using auditor::Stage;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

#define REQUIRE(cond, msg)                                                                                   \
  do {                                                                                                       \
    if (!(cond))                                                                                             \
      return {false, msg};                                                                                   \
  } while (0)

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

std::string fixture(const std::string& name) {
  return std::string(HOTPROOF_FIXTURE_DIR) + "/" + name;
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  return nlohmann::json::parse(in);
}

int run_cli(std::vector<std::string> args, std::string* out = nullptr) {
  args.insert(args.begin(), "hotproof");
  std::vector<const char*> argv;
  for (const auto& a : args)
    argv.push_back(a.c_str());
  std::ostringstream o, e;
  const int rc = cli::run(static_cast<int>(argv.size()), argv.data(), o, e);
  if (out)
    *out = o.str();
  return rc;
}

std::string with_code(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return std::string(to_string(e.code()));
  }
  return "no error";
}

Outcome listing_fidelity() {
  const auto start = std::chrono::steady_clock::now();
  Harness h(ln::load_channels(read_json(fixture("channels.json"))));
  auto r = h.get(prover::channels_path);
  const double took = seconds_since(start);
  REQUIRE(r.status == 200, "status " + std::to_string(r.status));
  REQUIRE(r.body == listing_canonical_json(), "bytes differ from the sample response");
  auto j = nlohmann::json::parse(r.body);
  REQUIRE(j["local_balance"]["sat"] == "1234567" && j["remote_balance"]["sat"] == "765433", "balance values");
  REQUIRE(took < 1.0, "took " + std::to_string(took) + " s");
  return {true, "byte-exact, " + std::to_string(took) + " s"};
}

Outcome honest_end_to_end() {
  const auto start = std::chrono::steady_clock::now();
  const std::string seed = "acceptance";
  auto chain = std::make_shared<oracle::ChainOracle>(oracle::ChainFixture::from_json(read_json(fixture("chain.json"))),
                                                     cli::role_key(seed, "oracle"));
  transcript::Notary notary(cli::role_key(seed, "notary"));
  auto cfg = enclave::PolicyConfig::from_json(read_json(fixture("enclave_policy.json")),
                                              cli::role_key(seed, "oracle").public_key());
  http::Server oracle_srv([&](const http::Request& r) { return oracle::handle_oracle_request(*chain, r); },
                          "127.0.0.1", 0);
  http::Server notary_srv([&](const http::Request& r) { return transcript::handle_notary_request(notary, r); },
                          "127.0.0.1", 0);
  prover::ProverNode node(ln::load_channels(read_json(fixture("channels.json"))),
                          enclave::Enclave::load(cli::default_identity, cfg.policy,
                                                 cli::platform_for(seed, cfg.tcb_status)),
                          std::make_shared<oracle::HttpOracleClient>(oracle_srv.url()), cli::role_key(seed, "server"),
                          cli::default_subject);
  http::Server node_srv([&](const http::Request& r) { return node.handle(r); }, "127.0.0.1", 0);

  const auto dir = std::filesystem::temp_directory_path() / ("hotproof-acceptance-" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  const auto policy = (dir / "policy.json").string();
  const auto bundle = (dir / "bundle.json").string();
  std::string record;
  const int init = run_cli({"init-policy", "--seed", seed, "--policy", fixture("enclave_policy.json"), "--out", policy});
  const int prove = run_cli({"prove", "--node-url", node_srv.url(), "--notary-url", notary_srv.url(), "--out", bundle});
  const int verify =
    run_cli({"verify", "--bundle", bundle, "--policy", policy, "--oracle-url", oracle_srv.url()}, &record);
  std::filesystem::remove_all(dir);
  const double took = seconds_since(start);

  REQUIRE(init == 0 && prove == 0, "init-policy " + std::to_string(init) + ", prove " + std::to_string(prove));
  REQUIRE(verify == 0, "verify exit " + std::to_string(verify) + ": " + record);
  auto j = nlohmann::json::parse(record);
  REQUIRE(j["accepted"] == true, "not accepted");
  auto balance = ln::balance_report_from_json(j["balance"]);
  REQUIRE(balance.local_balance.sat == 1'234'567 && balance.remote_balance.sat == 765'433, "balance parsed wrong");
  REQUIRE(took < 5.0, "took " + std::to_string(took) + " s");
  return {true, "accepted with local 1234567 sat, " + std::to_string(took) + " s"};
}

Outcome fault_matrix() {
  struct Fault {
    std::string name;
    std::function<std::string()> run;  // returns "<Stage>/<reason>" or prover error
    std::string want;
  };
  auto at = [](const auditor::AuditVerdict& v) {
    return v.accepted ? std::string("Accepted") : std::string(auditor::to_string(v.stage)) + "/" + v.reason;
  };
  std::vector<Fault> faults = {
    {"report byte flip",
     [&] {
       Harness h({listing_channel()});
       h.node->set_tamper([](prover::AttestationPackage& p) {
         auto r = ln::parse_balance_report(p.balance_report);
         r.local_balance.sat += 1;
         r.local_balance.msat += 1000;
         p.balance_report = ln::to_canonical_json(r);
       });
       return at(h.audit(h.prove()));
     },
     "SoftwareBinding/BindingMismatch"},
    {"quote signature flip",
     [&] {
       Harness h({listing_channel()});
       h.node->set_tamper([](prover::AttestationPackage& p) { p.quote.platform_signature[7] ^= 0x01; });
       return at(h.audit(h.prove()));
     },
     "HardwareQuote/BadPlatformSignature"},
    {"unknown measurement",
     [&] {
       Harness h({listing_channel()}, {.identity = "lnd-enclave-v1.1-unaudited"});
       return at(h.audit(h.prove()));
     },
     "SoftwareBinding/UnknownMeasurement"},
    {"revoked platform key",
     [&] {
       Harness h({listing_channel()});
       auto b = h.prove();
       auto pkg = prover::AttestationPackage::from_json(b.package);
       h.policy.vendor_anchor.revoked_platform_key_ids.insert(pkg.quote.platform_cert.key_id());
       return at(h.audit(b));
     },
     "HardwareQuote/PlatformRevoked"},
    {"TCB OutOfDate",
     [&] {
       Harness h({listing_channel()}, {.tcb = enclave::TcbStatus::OutOfDate});
       return at(h.audit(h.prove()));
     },
     "HardwareQuote/TcbOutOfDate"},
    {"notary signature flip",
     [&] {
       Harness h({listing_channel()});
       auto b = h.prove();
       b.transcript_proof.notary_attestation.notary_sig[3] ^= 0x01;
       return at(h.audit(b));
     },
     "Delivery/BadNotarySig"},
    {"server fingerprint mismatch",
     [&] {
       Harness h({listing_channel()});
       auto b = h.prove();
       h.policy.expected_server =
         transcript::ServerIdentity::make(SigningKey::from_seed("imposter").public_key(), "node.example");
       return at(h.audit(b));
     },
     "Delivery/ServerMismatch"},
    {"notarized_time outside window",
     [&] {
       Harness h({listing_channel()});
       return at(h.audit(h.prove(), h.policy.max_proof_age_seconds + 1));
     },
     "Delivery/Expired"},
    {"spent funding outpoint",
     [&] {
       Harness h({listing_channel()});
       h.chain->mark_spent(listing_channel().funding_outpoint);
       return with_code([&] { h.prove(); });
     },
     "StaleState"},
  };
  int rejected = 0;
  std::string bad;
  for (const auto& f : faults) {
    const auto got = f.run();
    if (got == f.want)
      ++rejected;
    else
      bad += " [" + f.name + ": " + got + ", expected " + f.want + "]";
  }
  REQUIRE(rejected == static_cast<int>(faults.size()),
          std::to_string(rejected) + "/" + std::to_string(faults.size()) + bad);
  return {true, "9/9 rejected at the named stage"};
}

Outcome replay_defense() {
  std::mt19937_64 rng(4242);
  int bundle_rejections = 0, direct_rejections = 0;
  constexpr int trials = 100;
  for (int i = 0; i < trials; ++i) {
    Harness h({make_channel("replay-" + std::to_string(i), 2'000'000,
                            std::uniform_int_distribution<std::uint64_t>(0, 2'000'000)(rng))});
    const auto t = harness_t0 + std::uniform_int_distribution<std::uint64_t>(0, 86'400)(rng);
    h.policy.max_proof_age_seconds = std::uniform_int_distribution<std::uint64_t>(30, 3'600)(rng);
    h.now->store(t);
    auto b = h.prove();
    auto fresh = auditor::verify_hot_proof(b, h.policy, t, h.chain.get());
    REQUIRE(fresh.accepted, "trial " + std::to_string(i) + " not accepted at t: " + fresh.reason);
    auto late = auditor::verify_hot_proof(b, h.policy, t + h.policy.max_proof_age_seconds + 1, h.chain.get());
    if (!late.accepted && late.stage == Stage::Delivery && late.reason == "Expired")
      ++bundle_rejections;

    auditor::DirectAuditor a(h.policy);
    auto first = a.issue_nonce();
    auto att = enclave::DirectAttestation::from_json(
      nlohmann::json::parse(h.get(prover::direct_path, {{"nonce", to_hex(first)}}).body));
    auto second = a.issue_nonce();
    auto v = a.verify(att, second, t);
    if (!v.accepted && v.reason == "NonceMismatch")
      ++direct_rejections;
  }
  REQUIRE(bundle_rejections == trials && direct_rejections == trials,
          "bundle " + std::to_string(bundle_rejections) + "/100, direct " + std::to_string(direct_rejections) + "/100");
  return {true, "100/100 late bundles Expired, 100/100 direct replays NonceMismatch"};
}

Outcome stale_state_defense() {
  auto live = listing_channel();
  const auto snapshot = live;
  live = ln::add_htlc(live, 50'000'000, ln::HtlcDirection::Offered);
  live = ln::resolve_htlc(live, live.htlcs.back().id, ln::HtlcOutcome::Settle);
  REQUIRE(ln::reestablish_check(snapshot, ln::make_reestablish(live)) == ln::ReestablishResult::StaleState,
          "rollback not detected by reestablish");

  // The operator restores the old snapshot; the peer force-closes on the live state.
  Harness h({snapshot});
  h.chain->mark_spent(snapshot.funding_outpoint);
  const auto direct = with_code([&] { h.node->enclave().attest_balance({snapshot}, *h.chain); });
  REQUIRE(direct == "StaleState", "attest_balance: " + direct);
  auto r = h.get(prover::balance_path);
  REQUIRE(r.status == 503 && r.body.find("StaleState") != std::string::npos, "node answered " + std::to_string(r.status));
  REQUIRE(r.body.find("quote") == std::string::npos && r.headers.count("X-Session-Signature") == 0,
          "quote artifact in refusal");
  const auto bundle = with_code([&] { h.prove(); });
  REQUIRE(bundle == "StaleState", "prove: " + bundle);
  return {true, "reestablish StaleState, attestation refused, no quote emitted"};
}

std::size_t probe_budget(std::uint64_t capacity, std::uint64_t tolerance) {
  std::size_t k = 0;
  unsigned __int128 reach = tolerance;
  while (reach < capacity) {
    reach *= 2;
    ++k;
  }
  return k + 2;
}

Outcome probing_estimator() {
  std::mt19937_64 rng(1000);
  std::size_t worst_slack = SIZE_MAX;
  for (int i = 0; i < 1000; ++i) {
    const auto capacity = std::uniform_int_distribution<std::uint64_t>(1, 2'000'000)(rng);
    const auto local = std::uniform_int_distribution<std::uint64_t>(0, capacity)(rng);
    const auto reserve = std::uniform_int_distribution<std::uint64_t>(0, capacity / 100)(rng);
    const auto tolerance = (i % 2) ? 1 : std::uniform_int_distribution<std::uint64_t>(1, capacity)(rng);
    auto g = netsim::load_graph(nlohmann::json::array({
      {{"id", "src-hop"}, {"a", "prober"}, {"b", "hop"}, {"capacity_sat", 50'000'000}, {"local_sat_of_a", 50'000'000}},
      {{"id", "target"}, {"a", "hop"}, {"b", "far"}, {"capacity_sat", capacity}, {"local_sat_of_a", local},
       {"reserve_sat", reserve}},
    }));
    const auto before = g;
    const auto truth = ln::outbound_liquidity(g.channel("target").state);
    auto est = netsim::estimate_liquidity(g, "prober", "target", tolerance);
    const auto budget = probe_budget(capacity, tolerance);
    REQUIRE(est.lower_bound_sat <= truth && truth <= est.upper_bound_sat,
            "instance " + std::to_string(i) + " bounds miss the true liquidity");
    REQUIRE(est.probes_used <= budget, "instance " + std::to_string(i) + " used " + std::to_string(est.probes_used) +
                                         " probes, budget " + std::to_string(budget));
    REQUIRE(g == before, "instance " + std::to_string(i) + " changed channel state");
    worst_slack = std::min(worst_slack, budget - est.probes_used);
  }
  return {true, "1000/1000 sound, within probe budget (min slack " + std::to_string(worst_slack) + "), graph unchanged"};
}

bool pair_consistent(const nlohmann::json& pair) {
  const auto sat = std::stoull(pair["sat"].get<std::string>());
  const auto msat = std::stoull(pair["msat"].get<std::string>());
  return msat == sat * 1000;
}

Outcome balance_invariants() {
  std::mt19937_64 rng(7);
  std::size_t transitions = 0, reports = 0;
  for (int seq = 0; seq < 10'000; ++seq) {
    const auto n = std::uniform_int_distribution<int>(1, 3)(rng);
    std::vector<ln::ChannelState> chans;
    for (int c = 0; c < n; ++c) {
      const auto cap = std::uniform_int_distribution<std::uint64_t>(1'000, 2'000'000)(rng);
      chans.push_back(make_channel("s" + std::to_string(seq) + "c" + std::to_string(c), cap,
                                   std::uniform_int_distribution<std::uint64_t>(0, cap)(rng),
                                   std::uniform_int_distribution<std::uint64_t>(0, cap / 20)(rng)));
    }
    const int steps = std::uniform_int_distribution<int>(1, 25)(rng);
    for (int s = 0; s < steps; ++s) {
      auto& ch = chans[std::uniform_int_distribution<std::size_t>(0, chans.size() - 1)(rng)];
      try {
        if (ch.htlcs.empty() || rng() % 3 != 0) {
          const auto amt = std::uniform_int_distribution<std::uint64_t>(1, ch.capacity_sat * 400)(rng);
          ch = ln::add_htlc(ch, amt, (rng() & 1) ? ln::HtlcDirection::Offered : ln::HtlcDirection::Received);
        } else {
          const auto& h = ch.htlcs[std::uniform_int_distribution<std::size_t>(0, ch.htlcs.size() - 1)(rng)];
          ch = ln::resolve_htlc(ch, h.id, (rng() & 1) ? ln::HtlcOutcome::Settle : ln::HtlcOutcome::Fail);
        }
        ++transitions;
      } catch (const Error& e) {
        REQUIRE(e.code() == ErrorCode::InsufficientLiquidity, "unexpected error " + std::string(e.what()));
      }
      for (const auto& c : chans) {
        std::uint64_t total = c.local_msat + c.remote_msat;
        for (const auto& htlc : c.htlcs)
          total += htlc.amount_msat;
        REQUIRE(total == c.capacity_sat * 1000, "conservation broken in sequence " + std::to_string(seq));
      }
      auto j = nlohmann::json::parse(ln::to_canonical_json(ln::aggregate_balance_report(chans)));
      for (const auto& [key, pair] : j.items())
        REQUIRE(pair_consistent(pair), key + " has msat != sat*1000 in sequence " + std::to_string(seq));
      ++reports;
    }
  }
  return {true, "10000 sequences, " + std::to_string(transitions) + " transitions, " + std::to_string(reports) +
                  " reports, zero violations"};
}

void diff_leaves(const nlohmann::json& a, const nlohmann::json& b, const std::string& at,
                 std::vector<std::string>& out) {
  if (a.is_object() && b.is_object()) {
    for (const auto& [k, v] : a.items())
      diff_leaves(v, b.contains(k) ? b[k] : nlohmann::json(), at + "/" + k, out);
    for (const auto& [k, v] : b.items())
      if (!a.contains(k))
        out.push_back(at + "/" + k);
  } else if (a != b) {
    out.push_back(at);
  }
}

Outcome threshold_privacy() {
  auto rich = listing_channel();
  rich.local_msat = 1'999'999'000;
  rich.remote_msat = 1'000;
  Harness a({listing_channel()});
  Harness b({rich});
  const std::map<std::string, std::string> q = {{"threshold_sat", "1000000"}, {"nonce", to_hex(sha256("same"))}};
  auto ra = a.get(prover::threshold_path, q);
  auto rb = b.get(prover::threshold_path, q);
  REQUIRE(ra.status == 200 && rb.status == 200, "threshold not emitted");
  std::vector<std::string> differing;
  diff_leaves(nlohmann::json::parse(ra.body), nlohmann::json::parse(rb.body), "", differing);
  for (const auto& path : differing)
    REQUIRE(path.find("sig") != std::string::npos, "non-signature field differs: " + path);
  REQUIRE(ra.body.find("1234567") == std::string::npos && rb.body.find("1999999") == std::string::npos,
          "balance digits present");
  return {true, differing.empty() ? "serializations byte-identical, no balance digits"
                                  : std::to_string(differing.size()) + " signature fields differ, no balance digits"};
}

std::string high_entropy(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::string s(n, '\0');
  for (auto& c : s)
    c = static_cast<char>(rng() & 0xff);
  return s;
}

Outcome selective_reveal() {
  const auto server = SigningKey::from_seed("sr/server");
  const auto notary = SigningKey::from_seed("sr/notary");
  const auto expected = transcript::ServerIdentity::make(server.public_key(), "node.example");
  const std::uint64_t t = harness_t0;
  std::mt19937_64 rng(9);
  int proofs = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto session = transcript::record_session(server, "node.example", "/v1/attested/balance",
                                              high_entropy(5 * transcript::record_size + 321, seed), t);
    auto att = transcript::notarize(transcript::commit_transcript(session), session.server.cert_fingerprint,
                                    "/v1/attested/balance", notary, t);
    const auto n = session.records.size();
    for (int k = 0; k < 6; ++k) {
      std::set<std::size_t> pick;
      for (std::size_t i = 0; i < n; ++i)
        if (rng() & 1)
          pick.insert(i);
      if (pick.size() == n)
        pick.erase(pick.begin());
      auto proof = transcript::reveal(session, att, pick);
      const auto wire = proof.to_json().dump();
      for (std::size_t i = 0; i < n; ++i) {
        if (pick.count(i))
          continue;
        const auto& rec = session.records[i];
        const auto b64 = to_base64(rec);
        for (std::size_t off = 0; off + 32 <= rec.size(); off += 512)
          REQUIRE(wire.find(rec.substr(off, 32)) == std::string::npos, "raw bytes of record " + std::to_string(i));
        for (std::size_t off = 0; off + 44 <= b64.size(); off += 64)
          REQUIRE(wire.find(b64.substr(off, 44)) == std::string::npos, "encoded bytes of record " + std::to_string(i));
      }
      auto v = transcript::verify_transcript_proof(proof, notary.public_key(), expected, 300, t + 1);
      REQUIRE(v.valid && v.records.size() == pick.size(), "subset proof rejected");
      ++proofs;
    }
  }

  auto session = transcript::record_session(server, "node.example", "/v1/attested/balance",
                                            high_entropy(3 * transcript::record_size + 77, 77), t);
  auto att = transcript::notarize(transcript::commit_transcript(session), session.server.cert_fingerprint,
                                  "/v1/attested/balance", notary, t);
  auto proof = transcript::reveal(session, att, {1});
  auto check = [&] {
    return transcript::verify_transcript_proof(proof, notary.public_key(), expected, 300, t + 1).reason;
  };
  REQUIRE(check() == transcript::TranscriptRejection::None, "honest sweep fixture rejected");
  std::size_t mutations = 0;
  auto& rec = proof.revealed[0].record;
  for (std::size_t i = 0; i < rec.size(); ++i) {
    const auto bit = static_cast<char>(1u << (i % 8));
    rec[i] = static_cast<char>(rec[i] ^ bit);
    const bool caught = check() == transcript::TranscriptRejection::BadMerklePath;
    rec[i] = static_cast<char>(rec[i] ^ bit);
    REQUIRE(caught, "mutation at byte " + std::to_string(i) + " accepted");
    ++mutations;
  }
  for (auto& h : proof.revealed[0].path)
    for (auto& b : h.bytes) {
      b ^= 0x80;
      const bool caught = check() == transcript::TranscriptRejection::BadMerklePath;
      b ^= 0x80;
      REQUIRE(caught, "path mutation accepted");
      ++mutations;
    }
  return {true, std::to_string(proofs) + " subset proofs leak nothing; " + std::to_string(mutations) +
                  " single-byte mutations all rejected"};
}

} // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
    {"listing fidelity", listing_fidelity},
    {"honest prove and verify", honest_end_to_end},
    {"single-fault rejection matrix", fault_matrix},
    {"replay defense", replay_defense},
    {"stale-state defense", stale_state_defense},
    {"probing estimator", probing_estimator},
    {"balance invariants", balance_invariants},
    {"threshold privacy", threshold_privacy},
    {"selective reveal privacy", selective_reveal},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  return failed;
}
