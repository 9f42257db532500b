// Copyright (c) The hotproof authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "hotproof/cli.hpp"
#include "hotproof/auditor.hpp"
#include "hotproof/network_sim.hpp"
#include "hotproof/prover.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>
#include <pthread.h>
#include <sstream>

namespace hotproof::cli {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorCode::BadConfig, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json read_json(const std::string& path) {
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BadConfig, path + ": " + e.what());
  }
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text))
    throw Error(ErrorCode::BadConfig, "cannot write " + path);
}

std::pair<std::string, int> parse_listen(const std::string& listen) {
  auto colon = listen.rfind(':');
  if (colon == std::string::npos)
    throw Error(ErrorCode::BadConfig, "--listen must be host:port");
  try {
    return {listen.substr(0, colon), std::stoi(listen.substr(colon + 1))};
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::BadConfig, "bad port in --listen " + listen);
  }
}

// Blocks SIGINT/SIGTERM in every thread created afterwards so the caller can
// collect them with sigwait.
sigset_t block_stop_signals() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  return set;
}

int serve(const http::Handler& handler, const std::string& listen, std::ostream& out) {
  auto signals = block_stop_signals();
  auto [host, port] = parse_listen(listen);
  http::Server server(handler, host, port);
  out << "listening " << server.url() << std::endl;
  int sig = 0;
  sigwait(&signals, &sig);
  server.stop();
  return exit_ok;
}

enclave::EnclavePolicy enclave_policy(const std::string& path, const std::string& seed,
                                      enclave::TcbStatus* tcb = nullptr) {
  const auto oracle_key = role_key(seed, "oracle").public_key();
  enclave::PolicyConfig cfg;
  cfg.policy.pinned_oracle_key = oracle_key;
  if (!path.empty())
    cfg = enclave::PolicyConfig::from_json(read_json(path), oracle_key);
  if (tcb)
    *tcb = cfg.tcb_status;
  return cfg.policy;
}

int stage_exit(const auditor::AuditVerdict& v) {
  switch (v.stage) {
    case auditor::Stage::Accepted:
      return exit_ok;
    case auditor::Stage::Delivery:
      return exit_delivery;
    case auditor::Stage::HardwareQuote:
      return exit_hardware_quote;
    case auditor::Stage::SoftwareBinding:
      return exit_software_binding;
    case auditor::Stage::Freshness:
      return exit_freshness;
  }
  return exit_failure;
}

std::uint64_t skewed_now(std::optional<std::uint64_t> now, std::int64_t skew) {
  const auto base = static_cast<std::int64_t>(now ? *now : system_now());
  return static_cast<std::uint64_t>(std::max<std::int64_t>(0, base + skew));
}

} // namespace

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::BadConfig:
    case ErrorCode::ParseError:
      return exit_config;
    case ErrorCode::NoRoute:
    case ErrorCode::UnknownNode:
      return exit_no_route;
    case ErrorCode::NotaryUnavailable:
      return exit_notary_unavailable;
    case ErrorCode::ServiceUnavailable:
    case ErrorCode::OracleUnavailable:
      return exit_service_unavailable;
    case ErrorCode::StaleState:
    case ErrorCode::ThresholdNotMet:
    case ErrorCode::HtlcPolicyViolation:
    case ErrorCode::BadOracleSignature:
      return exit_refused;
    default:
      return exit_failure;
  }
}

SigningKey role_key(const std::string& seed, const std::string& role) {
  return SigningKey::from_seed(seed + "/" + role);
}

enclave::Vendor vendor_for(const std::string& seed) {
  return enclave::Vendor(role_key(seed, "vendor"));
}

enclave::Platform platform_for(const std::string& seed, enclave::TcbStatus tcb) {
  return enclave::Platform::provision(vendor_for(seed), seed + "/platform", tcb);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hot proofs of Lightning channel balances"};
  app.require_subcommand(1);

  std::string seed = "hotproof-demo";
  std::string fixture, policy, oracle_url, notary_url, node_url, out_path, bundle_path, listen, identity,
    subject = default_subject, source, target;
  std::optional<std::uint64_t> threshold, now;
  std::uint64_t tolerance = 1;
  std::int64_t skew = 0;
  bool replay = false;

  auto add_seed = [&](CLI::App* c) { c->add_option("--seed", seed, "Key derivation seed"); };

  auto* oracle_cmd = app.add_subcommand("oracle", "Run the mock chain oracle");
  oracle_cmd->add_option("--fixture", fixture, "Chain fixture")->required();
  oracle_cmd->add_option("--listen", listen, "host:port")->default_val("127.0.0.1:8081");
  add_seed(oracle_cmd);

  auto* notary_cmd = app.add_subcommand("notary", "Run the notary service");
  notary_cmd->add_option("--listen", listen, "host:port")->default_val("127.0.0.1:8082");
  add_seed(notary_cmd);

  auto* node_cmd = app.add_subcommand("node", "Run the enclave-backed prover node");
  node_cmd->add_option("--fixture", fixture, "Channel fixture")->required();
  node_cmd->add_option("--policy", policy, "Enclave policy file");
  node_cmd->add_option("--oracle-url", oracle_url, "Chain oracle URL")->required();
  node_cmd->add_option("--listen", listen, "host:port")->default_val("127.0.0.1:8080");
  node_cmd->add_option("--identity", identity, "Enclave code identity")->default_val(default_identity);
  node_cmd->add_option("--subject", subject, "Server subject name");
  add_seed(node_cmd);

  auto* init_cmd = app.add_subcommand("init-policy", "Write an audit policy trusting the seed's deployment");
  init_cmd->add_option("--policy", policy, "Enclave policy file to allowlist");
  init_cmd->add_option("--identity", identity, "Audited code identity")->default_val(default_identity);
  init_cmd->add_option("--subject", subject, "Expected server subject");
  init_cmd->add_option("--out", out_path, "Output path (default stdout)");
  add_seed(init_cmd);

  auto* prove_cmd = app.add_subcommand("prove", "Fetch, notarize and write a proof bundle");
  prove_cmd->add_option("--node-url", node_url, "Prover node URL")->required();
  prove_cmd->add_option("--notary-url", notary_url, "Notary URL")->required();
  prove_cmd->add_option("--out", out_path, "Bundle path")->required();
  prove_cmd->add_option("--threshold", threshold, "Prove balance > threshold sat instead");

  auto* verify_cmd = app.add_subcommand("verify", "Audit a proof bundle");
  verify_cmd->add_option("--bundle", bundle_path, "Bundle path")->required();
  verify_cmd->add_option("--policy", policy, "Audit policy file")->required();
  verify_cmd->add_option("--oracle-url", oracle_url, "Auditor's own chain oracle");
  verify_cmd->add_option("--now", now, "Override the current unix time");
  verify_cmd->add_option("--skew", skew, "Seconds added to the current time");

  auto* probe_cmd = app.add_subcommand("probe", "Estimate a channel's liquidity by probing");
  probe_cmd->add_option("--fixture", fixture, "Graph fixture")->required();
  probe_cmd->add_option("--source", source, "Probing node")->required();
  probe_cmd->add_option("--target", target, "Target channel id")->required();
  probe_cmd->add_option("--tolerance", tolerance, "Bound width in sat")->default_val(1);

  auto* direct_cmd = app.add_subcommand("direct", "Interactive nonce-signed attestation");
  direct_cmd->add_option("--node-url", node_url, "Prover node URL")->required();
  direct_cmd->add_option("--policy", policy, "Audit policy file")->required();
  direct_cmd->add_flag("--replay", replay, "Resubmit the attestation under a second nonce");
  direct_cmd->add_option("--skew", skew, "Seconds added to the auditor's clock");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? exit_ok : exit_config;
  }

  try {
    if (*oracle_cmd) {
      auto chain = std::make_shared<oracle::ChainOracle>(oracle::ChainFixture::from_json(read_json(fixture)),
                                                         role_key(seed, "oracle"));
      return serve([chain](const http::Request& r) { return oracle::handle_oracle_request(*chain, r); }, listen,
                   out);
    }

    if (*notary_cmd) {
      auto notary = std::make_shared<transcript::Notary>(role_key(seed, "notary"));
      return serve([notary](const http::Request& r) { return transcript::handle_notary_request(*notary, r); },
                   listen, out);
    }

    if (*node_cmd) {
      auto channels = ln::load_channels(read_json(fixture));
      enclave::TcbStatus tcb;
      auto ep = enclave_policy(policy, seed, &tcb);
      auto enc = enclave::Enclave::load(identity, ep, platform_for(seed, tcb));
      auto node = std::make_shared<prover::ProverNode>(std::move(channels), std::move(enc),
                                                       std::make_shared<oracle::HttpOracleClient>(oracle_url),
                                                       role_key(seed, "server"), subject);
      err << "measurement " << to_hex(node->enclave().measurement()) << std::endl;
      return serve([node](const http::Request& r) { return node->handle(r); }, listen, out);
    }

    if (*init_cmd) {
      auditor::AuditPolicy p;
      p.trusted_measurements.insert(enclave::measure(identity, enclave_policy(policy, seed)));
      p.vendor_anchor = vendor_for(seed).anchor();
      p.notary_pubkey = role_key(seed, "notary").public_key();
      p.expected_server = transcript::ServerIdentity::make(role_key(seed, "server").public_key(), subject);
      p.pinned_oracle_key = role_key(seed, "oracle").public_key();
      const auto text = p.to_json().dump(2) + "\n";
      if (out_path.empty())
        out << text;
      else
        write_file(out_path, text);
      return exit_ok;
    }

    if (*prove_cmd) {
      auto bundle = prover::build_proof_bundle(node_url, notary_url, prover::attested_request(threshold));
      write_file(out_path, bundle.serialize());
      err << "wrote " << out_path << std::endl;
      return exit_ok;
    }

    if (*verify_cmd) {
      auto audit_policy = auditor::AuditPolicy::from_json(read_json(policy));
      auto text = read_file(bundle_path);
      const auto at = skewed_now(now, skew);
      auditor::AuditVerdict v;
      try {
        auto bundle = prover::ProofBundle::parse(text);
        std::optional<oracle::HttpOracleClient> own;
        if (!oracle_url.empty())
          own.emplace(oracle_url);
        v = auditor::verify_hot_proof(bundle, audit_policy, at, own ? &*own : nullptr);
      } catch (const Error& e) {
        v.stage = auditor::Stage::Delivery;
        v.reason = std::string("MalformedBundle: ") + e.what();
      }
      out << auditor::render_audit_record(v);
      return stage_exit(v);
    }

    if (*probe_cmd) {
      auto graph = netsim::load_graph(read_json(fixture));
      auto est = netsim::estimate_liquidity(graph, source, target, tolerance);
      nlohmann::ordered_json j;
      j["target"] = target;
      j["lower_bound_sat"] = est.lower_bound_sat;
      j["upper_bound_sat"] = est.upper_bound_sat;
      j["probes_used"] = est.probes_used;
      out << j.dump(2) << "\n";
      return exit_ok;
    }

    if (*direct_cmd) {
      auditor::DirectAuditor auditor_session(auditor::AuditPolicy::from_json(read_json(policy)));
      auto nonce = auditor_session.issue_nonce();
      auto res = http::send(node_url, {"GET", std::string(prover::direct_path), {{"nonce", to_hex(nonce)}}, {}});
      if (!res)
        throw Error(ErrorCode::ServiceUnavailable, "cannot reach " + node_url);
      if (res->status != 200)
        throw http::error_from_response(*res);
      auto att = enclave::DirectAttestation::from_json(nlohmann::json::parse(res->body));
      auto v = auditor_session.verify(att, nonce, skewed_now(std::nullopt, skew));
      if (replay && v.accepted) {
        auto second = auditor_session.issue_nonce();
        v = auditor_session.verify(att, second, skewed_now(std::nullopt, skew));
      }
      out << auditor::render_audit_record(v);
      return stage_exit(v);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << std::endl;
    return exit_code_for(e.code());
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << std::endl;
    return exit_config;
  }
  return exit_failure;
}

} // namespace hotproof::cli
