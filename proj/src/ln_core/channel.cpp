// Copyright (c) The hotproof authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "hotproof/error.hpp"
#include "hotproof/ln_core.hpp"

#include <algorithm>
#include <set>

namespace hotproof::ln {

namespace {

// Total bitcoin supply in satoshis; keeps every msat quantity inside u64.
constexpr std::uint64_t max_capacity_sat = 2'100'000'000'000'000ULL;

std::uint64_t htlc_sum_msat(const ChannelState& c, HtlcDirection dir) {
  std::uint64_t sum = 0;
  for (const auto& h : c.htlcs)
    if (h.direction == dir)
      sum += h.amount_msat;
  return sum;
}

std::uint64_t side_liquidity(std::uint64_t balance_msat, std::uint64_t reserve_sat,
                             std::uint64_t committed_msat) {
  const std::uint64_t whole_msat = balance_msat / 1000 * 1000;
  const std::uint64_t deduct = reserve_sat * 1000 + committed_msat;
  return whole_msat > deduct ? (whole_msat - deduct) / 1000 : 0;
}

void require_open(const ChannelState& c) {
  if (c.phase != ChannelPhase::Open)
    throw Error(ErrorCode::WrongPhase,
                "channel " + c.channel_id + " is " + std::string(to_string(c.phase)));
}

} // namespace

std::string Outpoint::to_string() const {
  return to_hex(txid) + ":" + std::to_string(vout);
}

std::string_view to_string(ChannelPhase phase) {
  switch (phase) {
    case ChannelPhase::Opening:
      return "Opening";
    case ChannelPhase::Open:
      return "Open";
    case ChannelPhase::Closed:
      return "Closed";
  }
  return "?";
}

void check_invariants(const ChannelState& c) {
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::InvariantViolation, "channel " + c.channel_id + ": " + what);
  };
  if (c.capacity_sat > max_capacity_sat)
    fail("capacity exceeds supply");
  if (c.reserve_sat > c.capacity_sat / 2)
    fail("reserve exceeds half the capacity");
  std::set<std::uint64_t> ids;
  std::uint64_t inflight = 0;
  for (const auto& h : c.htlcs) {
    if (h.amount_msat == 0)
      fail("zero-amount htlc " + std::to_string(h.id));
    if (!ids.insert(h.id).second)
      fail("duplicate htlc id " + std::to_string(h.id));
    inflight += h.amount_msat;
  }
  if (c.phase == ChannelPhase::Closed)
    return;
  const auto total = c.local_msat + c.remote_msat + inflight;
  if (total != c.capacity_sat * 1000)
    fail("balance conservation broken: " + std::to_string(total) +
         " msat != " + std::to_string(c.capacity_sat * 1000));
}

std::uint64_t outbound_liquidity(const ChannelState& c) {
  require_open(c);
  return side_liquidity(c.local_msat, c.reserve_sat, htlc_sum_msat(c, HtlcDirection::Offered));
}

std::uint64_t remote_outbound_liquidity(const ChannelState& c) {
  require_open(c);
  return side_liquidity(c.remote_msat, c.reserve_sat, htlc_sum_msat(c, HtlcDirection::Received));
}

ChannelState add_htlc(const ChannelState& channel, std::uint64_t amount_msat,
                      HtlcDirection direction) {
  check_invariants(channel);
  require_open(channel);
  if (amount_msat == 0)
    throw Error(ErrorCode::InvalidArgument, "htlc amount must be positive");

  const bool offered = direction == HtlcDirection::Offered;
  const auto available =
    offered ? outbound_liquidity(channel) : remote_outbound_liquidity(channel);
  if (amount_msat > available * 1000)
    throw Error(ErrorCode::InsufficientLiquidity,
                std::to_string(amount_msat) + " msat requested, " + std::to_string(available) +
                  " sat available on " + channel.channel_id);

  ChannelState next = channel;
  std::uint64_t id = channel.commitment_number;
  for (const auto& h : channel.htlcs)
    id = std::max(id, h.id + 1);

  ByteWriter preimage_seed;
  preimage_seed.prefixed(channel.channel_id).u64(id);
  next.htlcs.push_back(Htlc{id, amount_msat, direction, sha256(preimage_seed.bytes())});
  (offered ? next.local_msat : next.remote_msat) -= amount_msat;
  next.commitment_number += 1;
  return next;
}

ChannelState resolve_htlc(const ChannelState& channel, std::uint64_t htlc_id,
                          HtlcOutcome outcome) {
  auto it = std::find_if(channel.htlcs.begin(), channel.htlcs.end(),
                         [&](const Htlc& h) { return h.id == htlc_id; });
  if (it == channel.htlcs.end())
    throw Error(ErrorCode::UnknownHtlc,
                "htlc " + std::to_string(htlc_id) + " not on " + channel.channel_id);

  ChannelState next = channel;
  const Htlc htlc = *it;
  next.htlcs.erase(next.htlcs.begin() + (it - channel.htlcs.begin()));

  const bool offered = htlc.direction == HtlcDirection::Offered;
  // Settle pays the receiving side; Fail refunds the offering side.
  const bool to_local = (outcome == HtlcOutcome::Settle) ? !offered : offered;
  (to_local ? next.local_msat : next.remote_msat) += htlc.amount_msat;
  next.commitment_number += 1;
  return next;
}

ReestablishMsg make_reestablish(const ChannelState& channel) {
  return {channel.channel_id, channel.commitment_number + 1};
}

ReestablishResult reestablish_check(const ChannelState& local, const ReestablishMsg& peer) {
  if (peer.channel_id != local.channel_id)
    throw Error(ErrorCode::ChannelMismatch, local.channel_id + " vs " + peer.channel_id);
  const auto expected = local.commitment_number + 1;
  if (peer.next_commitment_number == expected)
    return ReestablishResult::Ok;
  return peer.next_commitment_number > expected ? ReestablishResult::StaleState
                                                : ReestablishResult::PeerBehind;
}

} // namespace hotproof::ln
