// Copyright (c) The hotproof authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "hotproof/error.hpp"
#include "hotproof/ln_core.hpp"

#include <array>
#include <charconv>
#include <limits>

namespace hotproof::ln {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr std::array<const char*, 6> report_keys{
  "local_balance",
  "remote_balance",
  "unsettled_local_balance",
  "unsettled_remote_balance",
  "pending_open_local_balance",
  "pending_open_remote_balance",
};

std::array<BalancePair*, 6> fields(BalanceReport& r) {
  return {&r.local_balance,           &r.remote_balance,
          &r.unsettled_local_balance, &r.unsettled_remote_balance,
          &r.pending_open_local_balance, &r.pending_open_remote_balance};
}

void add_sat(BalancePair& pair, std::uint64_t msat) {
  pair.sat += msat / 1000;
  pair.msat = pair.sat * 1000;
}

std::uint64_t parse_decimal(const ordered_json& v, const std::string& where) {
  if (!v.is_string())
    throw Error(ErrorCode::ParseError, where + " must be a decimal string");
  const auto& s = v.get_ref<const std::string&>();
  if (s.empty() || (s.size() > 1 && s[0] == '0'))
    throw Error(ErrorCode::ParseError, where + " is not a canonical decimal");
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw Error(ErrorCode::ParseError, where + " is not a non-negative decimal: " + s);
  return out;
}

} // namespace

BalanceReport aggregate_balance_report(const std::vector<ChannelState>& channels) {
  BalanceReport r;
  for (const auto& c : channels) {
    check_invariants(c);
    std::uint64_t offered = 0, received = 0;
    for (const auto& h : c.htlcs)
      (h.direction == HtlcDirection::Offered ? offered : received) += h.amount_msat;

    switch (c.phase) {
      case ChannelPhase::Open:
        add_sat(r.local_balance, c.local_msat);
        add_sat(r.remote_balance, c.remote_msat);
        break;
      case ChannelPhase::Opening:
        add_sat(r.pending_open_local_balance, c.local_msat);
        add_sat(r.pending_open_remote_balance, c.remote_msat);
        break;
      case ChannelPhase::Closed:
        continue;
    }
    add_sat(r.unsettled_local_balance, offered);
    add_sat(r.unsettled_remote_balance, received);
  }
  return r;
}

ordered_json to_ordered_json(const BalanceReport& report) {
  ordered_json j = ordered_json::object();
  auto copy = report;
  auto ptrs = fields(copy);
  for (std::size_t i = 0; i < report_keys.size(); ++i) {
    ordered_json pair = ordered_json::object();
    pair["sat"] = std::to_string(ptrs[i]->sat);
    pair["msat"] = std::to_string(ptrs[i]->msat);
    j[report_keys[i]] = std::move(pair);
  }
  return j;
}

std::string to_canonical_json(const BalanceReport& report) {
  return to_ordered_json(report).dump(2) + "\n";
}

BalanceReport balance_report_from_json(const ordered_json& j) {
  if (!j.is_object() || j.size() != report_keys.size())
    throw Error(ErrorCode::ParseError, "balance report must have exactly six fields");
  BalanceReport r;
  auto ptrs = fields(r);
  for (std::size_t i = 0; i < report_keys.size(); ++i) {
    const std::string key = report_keys[i];
    auto it = j.find(key);
    if (it == j.end() || !it->is_object() || it->size() != 2 || !it->contains("sat") ||
        !it->contains("msat"))
      throw Error(ErrorCode::ParseError, "malformed field " + key);
    ptrs[i]->sat = parse_decimal(it->at("sat"), key + ".sat");
    ptrs[i]->msat = parse_decimal(it->at("msat"), key + ".msat");
    if (ptrs[i]->sat > std::numeric_limits<std::uint64_t>::max() / 1000 ||
        ptrs[i]->msat != ptrs[i]->sat * 1000)
      throw Error(ErrorCode::ParseError, key + ": msat != sat * 1000");
  }
  return r;
}

BalanceReport parse_balance_report(std::string_view json_text) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  return balance_report_from_json(j);
}

nlohmann::json outpoint_to_json(const Outpoint& o) {
  return {{"txid", to_hex(o.txid)}, {"vout", o.vout}};
}

Outpoint outpoint_from_json(const nlohmann::json& j) {
  try {
    return {hash_from_hex(j.at("txid").get<std::string>()), j.at("vout").get<std::uint32_t>()};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("outpoint: ") + e.what());
  }
}

nlohmann::json to_json(const ChannelState& c) {
  nlohmann::json htlcs = nlohmann::json::array();
  for (const auto& h : c.htlcs)
    htlcs.push_back({{"id", h.id},
                     {"amount_msat", h.amount_msat},
                     {"direction", h.direction == HtlcDirection::Offered ? "Offered" : "Received"},
                     {"payment_hash", to_hex(h.payment_hash)}});
  return {{"channel_id", c.channel_id},
          {"funding_outpoint", outpoint_to_json(c.funding_outpoint)},
          {"capacity_sat", c.capacity_sat},
          {"local_msat", c.local_msat},
          {"remote_msat", c.remote_msat},
          {"reserve_sat", c.reserve_sat},
          {"htlcs", htlcs},
          {"commitment_number", c.commitment_number},
          {"phase", std::string(to_string(c.phase))}};
}

ChannelState channel_from_json(const nlohmann::json& j) {
  ChannelState c;
  try {
    c.channel_id = j.at("channel_id").get<std::string>();
    c.funding_outpoint = outpoint_from_json(j.at("funding_outpoint"));
    c.capacity_sat = j.at("capacity_sat").get<std::uint64_t>();
    c.local_msat = j.at("local_msat").get<std::uint64_t>();
    c.remote_msat = j.at("remote_msat").get<std::uint64_t>();
    c.reserve_sat = j.value("reserve_sat", std::uint64_t{0});
    c.commitment_number = j.value("commitment_number", std::uint64_t{0});
    const auto phase = j.value("phase", std::string("Open"));
    if (phase == "Open")
      c.phase = ChannelPhase::Open;
    else if (phase == "Opening")
      c.phase = ChannelPhase::Opening;
    else if (phase == "Closed")
      c.phase = ChannelPhase::Closed;
    else
      throw Error(ErrorCode::ParseError, "unknown phase " + phase);
    for (const auto& h : j.value("htlcs", nlohmann::json::array())) {
      const auto dir = h.at("direction").get<std::string>();
      if (dir != "Offered" && dir != "Received")
        throw Error(ErrorCode::ParseError, "unknown htlc direction " + dir);
      c.htlcs.push_back(Htlc{h.at("id").get<std::uint64_t>(), h.at("amount_msat").get<std::uint64_t>(),
                             dir == "Offered" ? HtlcDirection::Offered : HtlcDirection::Received,
                             hash_from_hex(h.at("payment_hash").get<std::string>())});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("channel: ") + e.what());
  }
  check_invariants(c);
  return c;
}

std::vector<ChannelState> load_channels(const nlohmann::json& fixture) {
  if (!fixture.contains("channels") || !fixture["channels"].is_array())
    throw Error(ErrorCode::ParseError, "channel fixture needs a \"channels\" array");
  std::vector<ChannelState> out;
  for (const auto& c : fixture["channels"])
    out.push_back(channel_from_json(c));
  return out;
}

} // namespace hotproof::ln
