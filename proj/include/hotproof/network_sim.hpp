// Copyright (c) The hotproof authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include "hotproof/ln_core.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace hotproof::netsim {

struct GraphChannel {
  std::string a;
  std::string b;
  /// State as seen from endpoint a (local == a's balance).
  ln::ChannelState state;

  bool operator==(const GraphChannel&) const = default;
};

/// In-process Lightning graph. Owned by a single simulation context.
class NetworkGraph {
public:
  void add_node(const std::string& id);
  /// Throws InvalidArgument for self-loops, duplicate ids or unknown endpoints.
  void add_channel(const std::string& a, const std::string& b, ln::ChannelState state);

  const std::set<std::string>& nodes() const { return nodes_; }
  const std::map<std::string, GraphChannel>& channels() const { return channels_; }
  const GraphChannel& channel(const std::string& id) const;
  bool has_node(const std::string& id) const { return nodes_.count(id) != 0; }

  bool operator==(const NetworkGraph&) const = default;

private:
  std::set<std::string> nodes_;
  std::map<std::string, GraphChannel> channels_;
};

/// Fixture: JSON list of {id, a, b, capacity_sat, local_sat_of_a, reserve_sat}.
NetworkGraph load_graph(const nlohmann::json& fixture);

struct RouteHop {
  std::string channel_id;
  std::string from;
  std::string to;

  bool operator==(const RouteHop&) const = default;
};

using Route = std::vector<RouteHop>;

/// Minimal-hop route over channels with capacity >= amount. Ties go to the
/// lexicographically smallest channel-id sequence. nullopt means no route.
std::optional<Route> find_route(const NetworkGraph& graph, const std::string& src,
                                const std::string& dst, std::uint64_t amount_sat);

/// Sendable amount from hop.from across hop.channel_id.
std::uint64_t hop_liquidity(const NetworkGraph& graph, const RouteHop& hop);

struct ProbeOutcome {
  enum class Kind { ReachedDestination, TemporaryChannelFailure, NoRoute };
  Kind kind = Kind::NoRoute;
  /// Set iff kind == TemporaryChannelFailure.
  std::optional<std::string> failing_channel_id;

  static ProbeOutcome reached() { return {Kind::ReachedDestination, std::nullopt}; }
  static ProbeOutcome failed_at(std::string id) {
    return {Kind::TemporaryChannelFailure, std::move(id)};
  }
  static ProbeOutcome no_route() { return {Kind::NoRoute, std::nullopt}; }
  bool operator==(const ProbeOutcome&) const = default;
};

/// Probe along an explicit route. Probes carry an unknown payment hash, so
/// they always fail at the destination and never change channel state.
ProbeOutcome probe_route(const NetworkGraph& graph, const Route& route, std::uint64_t amount_sat);

ProbeOutcome send_probe(const NetworkGraph& graph, const std::string& src, const std::string& dst,
                        std::uint64_t amount_sat);

struct LiquidityEstimate {
  std::uint64_t lower_bound_sat = 0;
  std::uint64_t upper_bound_sat = 0;
  std::size_t probes_used = 0;
};

/// Binary search on a target channel's outbound liquidity (from its endpoint a)
/// by probing src -> ... -> a -> b. Stops once upper - lower < tolerance, which
/// for tolerance 1 pins the liquidity exactly.
LiquidityEstimate estimate_liquidity(const NetworkGraph& graph, const std::string& src,
                                     const std::string& target_channel,
                                     std::uint64_t tolerance_sat);

} // namespace hotproof::netsim
