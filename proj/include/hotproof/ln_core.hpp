// Copyright (c) The hotproof authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include "hotproof/crypto.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace hotproof::ln {

struct Outpoint {
  Hash32 txid;
  std::uint32_t vout = 0;

  /// "txid_hex:vout"
  std::string to_string() const;
  auto operator<=>(const Outpoint&) const = default;
};

enum class HtlcDirection { Offered, Received };

struct Htlc {
  std::uint64_t id = 0;
  std::uint64_t amount_msat = 0;
  HtlcDirection direction = HtlcDirection::Offered;
  Hash32 payment_hash;

  bool operator==(const Htlc&) const = default;
};

enum class ChannelPhase { Opening, Open, Closed };

/// Immutable snapshot of one channel seen from the local node. Transitions
/// return new values; commitment_number is a single counter shared by both
/// sides and bumped once per accepted HTLC transition.
struct ChannelState {
  std::string channel_id;
  Outpoint funding_outpoint;
  std::uint64_t capacity_sat = 0;
  std::uint64_t local_msat = 0;
  std::uint64_t remote_msat = 0;
  std::uint64_t reserve_sat = 0;
  std::vector<Htlc> htlcs;
  std::uint64_t commitment_number = 0;
  ChannelPhase phase = ChannelPhase::Open;

  bool operator==(const ChannelState&) const = default;
};

/// Throws Error(InvariantViolation) naming the broken invariant.
void check_invariants(const ChannelState& channel);

struct BalancePair {
  std::uint64_t sat = 0;
  std::uint64_t msat = 0;

  bool operator==(const BalancePair&) const = default;
};

/// Aggregate channel balances in the shape of LND's ChannelBalance response.
struct BalanceReport {
  BalancePair local_balance;
  BalancePair remote_balance;
  BalancePair unsettled_local_balance;
  BalancePair unsettled_remote_balance;
  BalancePair pending_open_local_balance;
  BalancePair pending_open_remote_balance;

  bool operator==(const BalanceReport&) const = default;
};

BalanceReport aggregate_balance_report(const std::vector<ChannelState>& channels);

/// Canonical wire form: the six keys in fixed order, two-space indentation,
/// newline-terminated. These exact bytes are what the enclave hashes into
/// its quote, so the format must never change.
std::string to_canonical_json(const BalanceReport& report);
nlohmann::ordered_json to_ordered_json(const BalanceReport& report);
/// Strict parse: exactly the six keys, decimal strings, msat == sat * 1000.
BalanceReport parse_balance_report(std::string_view json_text);
BalanceReport balance_report_from_json(const nlohmann::ordered_json& j);

/// Sendable satoshis: floor(local/1000) - reserve - offered HTLCs, clamped at 0.
std::uint64_t outbound_liquidity(const ChannelState& channel);
/// The same quantity for the remote side (used for reverse-direction routing).
std::uint64_t remote_outbound_liquidity(const ChannelState& channel);

ChannelState add_htlc(const ChannelState& channel, std::uint64_t amount_msat,
                      HtlcDirection direction);

enum class HtlcOutcome { Settle, Fail };

ChannelState resolve_htlc(const ChannelState& channel, std::uint64_t htlc_id, HtlcOutcome outcome);

struct ReestablishMsg {
  std::string channel_id;
  std::uint64_t next_commitment_number = 0;
};

/// What the live peer would send on reconnect.
ReestablishMsg make_reestablish(const ChannelState& channel);

enum class ReestablishResult {
  Ok,
  /// Peer is ahead: our state was rolled back. Force-close trigger.
  StaleState,
  /// Peer is behind our state. Also a mismatch; force-close trigger.
  PeerBehind,
};

ReestablishResult reestablish_check(const ChannelState& local, const ReestablishMsg& peer);

// Channel fixture files: {"channels": [ ... ]}
nlohmann::json to_json(const ChannelState& channel);
ChannelState channel_from_json(const nlohmann::json& j);
std::vector<ChannelState> load_channels(const nlohmann::json& fixture);
nlohmann::json outpoint_to_json(const Outpoint& o);
Outpoint outpoint_from_json(const nlohmann::json& j);

std::string_view to_string(ChannelPhase phase);

} // namespace hotproof::ln
