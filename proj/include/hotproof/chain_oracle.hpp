// Copyright (c) The hotproof authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include "hotproof/crypto.hpp"
#include "hotproof/http.hpp"
#include "hotproof/ln_core.hpp"

#include <mutex>
#include <set>
#include <string>

namespace hotproof::oracle {

struct BlockTip {
  std::uint64_t height = 0;
  Hash32 block_hash;
  std::uint64_t timestamp = 0;

  bool operator==(const BlockTip&) const = default;
};

struct OutpointStatus {
  ln::Outpoint outpoint;
  bool spent = false;
  BlockTip as_of;

  bool operator==(const OutpointStatus&) const = default;
};

/// A signed chain fact. The payload is sorted-key compact JSON and the
/// signature covers exactly those bytes.
struct OracleStatement {
  std::string payload;
  Bytes signature;
  std::string oracle_key_id;

  bool operator==(const OracleStatement&) const = default;
};

nlohmann::json to_json(const BlockTip& tip);
BlockTip tip_from_json(const nlohmann::json& j);

/// {payload_b64, signature_b64, oracle_key_id}
nlohmann::json to_json(const OracleStatement& stmt);
OracleStatement statement_from_json(const nlohmann::json& j);

/// Payload decoders; throw Error(ParseError) when the payload is malformed or
/// of the other kind. They do not check the signature.
BlockTip parse_tip_payload(const OracleStatement& stmt);
OutpointStatus parse_outspend_payload(const OracleStatement& stmt);

OracleStatement sign_tip(const SigningKey& key, const BlockTip& tip);
OracleStatement sign_outspend(const SigningKey& key, const OutpointStatus& status);

/// True iff the signature verifies under the pinned key and the payload parses
/// as a tip or outspend statement.
bool verify_statement(const OracleStatement& stmt, const PublicKey& pinned_key);

/// The enclave's view of a chain-data service. Implementations throw
/// Error(OracleUnavailable) and Error(UnknownOutpoint).
class OracleClient {
public:
  virtual ~OracleClient() = default;
  virtual OracleStatement tip() = 0;
  virtual OracleStatement outspend(const ln::Outpoint& outpoint) = 0;
};

/// Chain fixture: {tip_height, utxos: [{txid, vout}], spent?: [...]}
struct ChainFixture {
  std::uint64_t tip_height = 0;
  std::vector<ln::Outpoint> utxos;
  std::vector<ln::Outpoint> spent;

  static ChainFixture from_json(const nlohmann::json& j);
};

/// Deterministic mock chain: block hash and time are functions of height.
BlockTip block_at(std::uint64_t height);

/// Mock Esplora-style service. Thread-safe; all state behind one mutex.
class ChainOracle : public OracleClient {
public:
  ChainOracle(ChainFixture fixture, SigningKey key);

  OracleStatement tip() override;
  OracleStatement outspend(const ln::Outpoint& outpoint) override;

  const PublicKey& public_key() const { return key_.public_key(); }

  // Test hooks.
  void advance_block(std::uint64_t count = 1);
  void mark_spent(const ln::Outpoint& outpoint);
  void add_utxo(const ln::Outpoint& outpoint);
  void set_online(bool online);
  std::uint64_t height() const;

private:
  void require_online() const;

  mutable std::mutex mutex_;
  SigningKey key_;
  std::uint64_t height_;
  std::set<ln::Outpoint> unspent_;
  std::set<ln::Outpoint> spent_;
  bool online_ = true;
};

/// Routes: GET /tip, GET /outspend/{txid}/{vout}. Test hooks under /admin:
/// POST /admin/advance?count=N, POST /admin/mark_spent/{txid}/{vout},
/// POST /admin/online?state=0|1.
http::Response handle_oracle_request(ChainOracle& oracle, const http::Request& request);

/// OracleClient over HTTP. Connection failures map to OracleUnavailable.
class HttpOracleClient : public OracleClient {
public:
  explicit HttpOracleClient(std::string base_url) : base_url_(std::move(base_url)) {}

  OracleStatement tip() override;
  OracleStatement outspend(const ln::Outpoint& outpoint) override;

private:
  OracleStatement fetch(const std::string& path);

  std::string base_url_;
};

} // namespace hotproof::oracle
