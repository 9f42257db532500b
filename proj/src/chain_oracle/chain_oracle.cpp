// Copyright (c) The hotproof authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "hotproof/chain_oracle.hpp"

#include "hotproof/error.hpp"

namespace hotproof::oracle {

namespace {

constexpr std::uint64_t genesis_time = 1'231'006'505;
constexpr std::uint64_t block_interval = 600;

nlohmann::json parse_payload(const OracleStatement& stmt, const char* kind) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(stmt.payload);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  if (!j.is_object() || j.value("kind", "") != kind)
    throw Error(ErrorCode::ParseError, std::string("statement is not a ") + kind + " statement");
  // Signed bytes must be the canonical rendering of what they claim.
  if (j.dump() != stmt.payload)
    throw Error(ErrorCode::ParseError, "statement payload is not canonical");
  return j;
}

OracleStatement sign_payload(const SigningKey& key, const nlohmann::json& payload) {
  OracleStatement s;
  s.payload = payload.dump();
  s.signature = key.sign(as_bytes(s.payload));
  s.oracle_key_id = key.public_key().key_id();
  return s;
}

template <typename Fn>
auto json_guard(const char* what, Fn&& fn) {
  try {
    return fn();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string(what) + ": " + e.what());
  }
}

} // namespace

nlohmann::json to_json(const BlockTip& tip) {
  return {{"height", tip.height}, {"block_hash", to_hex(tip.block_hash)}, {"timestamp", tip.timestamp}};
}

BlockTip tip_from_json(const nlohmann::json& j) {
  return json_guard("block tip", [&] {
    return BlockTip{j.at("height").get<std::uint64_t>(),
                    hash_from_hex(j.at("block_hash").get<std::string>()),
                    j.at("timestamp").get<std::uint64_t>()};
  });
}

nlohmann::json to_json(const OracleStatement& stmt) {
  return {{"payload_b64", to_base64(stmt.payload)},
          {"signature_b64", to_base64(stmt.signature)},
          {"oracle_key_id", stmt.oracle_key_id}};
}

OracleStatement statement_from_json(const nlohmann::json& j) {
  return json_guard("oracle statement", [&] {
    OracleStatement s;
    s.payload = to_string(ByteView(from_base64(j.at("payload_b64").get<std::string>())));
    s.signature = from_base64(j.at("signature_b64").get<std::string>());
    s.oracle_key_id = j.at("oracle_key_id").get<std::string>();
    return s;
  });
}

BlockTip parse_tip_payload(const OracleStatement& stmt) {
  auto j = parse_payload(stmt, "tip");
  return tip_from_json(json_guard("tip", [&] { return j.at("tip"); }));
}

OutpointStatus parse_outspend_payload(const OracleStatement& stmt) {
  auto j = parse_payload(stmt, "outspend");
  return json_guard("outspend", [&] {
    const auto& s = j.at("status");
    return OutpointStatus{ln::outpoint_from_json(s.at("outpoint")), s.at("spent").get<bool>(),
                          tip_from_json(s.at("as_of"))};
  });
}

OracleStatement sign_tip(const SigningKey& key, const BlockTip& tip) {
  return sign_payload(key, {{"kind", "tip"}, {"tip", to_json(tip)}});
}

OracleStatement sign_outspend(const SigningKey& key, const OutpointStatus& status) {
  return sign_payload(key, {{"kind", "outspend"},
                            {"status",
                             {{"outpoint", ln::outpoint_to_json(status.outpoint)},
                              {"spent", status.spent},
                              {"as_of", to_json(status.as_of)}}}});
}

bool verify_statement(const OracleStatement& stmt, const PublicKey& pinned_key) {
  if (!verify_signature(pinned_key, as_bytes(stmt.payload), stmt.signature))
    return false;
  try {
    parse_tip_payload(stmt);
    return true;
  } catch (const Error&) {
  }
  try {
    parse_outspend_payload(stmt);
    return true;
  } catch (const Error&) {
  }
  return false;
}

ChainFixture ChainFixture::from_json(const nlohmann::json& j) {
  return json_guard("chain fixture", [&] {
    ChainFixture f;
    f.tip_height = j.at("tip_height").get<std::uint64_t>();
    for (const auto& o : j.value("utxos", nlohmann::json::array()))
      f.utxos.push_back(ln::outpoint_from_json(o));
    for (const auto& o : j.value("spent", nlohmann::json::array()))
      f.spent.push_back(ln::outpoint_from_json(o));
    return f;
  });
}

BlockTip block_at(std::uint64_t height) {
  return {height, sha256("block:" + std::to_string(height)), genesis_time + height * block_interval};
}

ChainOracle::ChainOracle(ChainFixture fixture, SigningKey key)
  : key_(std::move(key)),
    height_(fixture.tip_height),
    unspent_(fixture.utxos.begin(), fixture.utxos.end()),
    spent_(fixture.spent.begin(), fixture.spent.end()) {
  for (const auto& o : spent_)
    unspent_.erase(o);
}

void ChainOracle::require_online() const {
  if (!online_)
    throw Error(ErrorCode::OracleUnavailable, "chain oracle offline");
}

OracleStatement ChainOracle::tip() {
  std::lock_guard lock(mutex_);
  require_online();
  return sign_tip(key_, block_at(height_));
}

OracleStatement ChainOracle::outspend(const ln::Outpoint& outpoint) {
  std::lock_guard lock(mutex_);
  require_online();
  OutpointStatus status{outpoint, false, block_at(height_)};
  if (spent_.count(outpoint))
    status.spent = true;
  else if (!unspent_.count(outpoint))
    throw Error(ErrorCode::UnknownOutpoint, outpoint.to_string());
  return sign_outspend(key_, status);
}

void ChainOracle::advance_block(std::uint64_t count) {
  std::lock_guard lock(mutex_);
  height_ += count;
}

void ChainOracle::mark_spent(const ln::Outpoint& outpoint) {
  std::lock_guard lock(mutex_);
  unspent_.erase(outpoint);
  spent_.insert(outpoint);
}

void ChainOracle::add_utxo(const ln::Outpoint& outpoint) {
  std::lock_guard lock(mutex_);
  spent_.erase(outpoint);
  unspent_.insert(outpoint);
}

void ChainOracle::set_online(bool online) {
  std::lock_guard lock(mutex_);
  online_ = online;
}

std::uint64_t ChainOracle::height() const {
  std::lock_guard lock(mutex_);
  return height_;
}

} // namespace hotproof::oracle
