// Copyright (c) The hotproof authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "hotproof/network_sim.hpp"

#include "hotproof/error.hpp"

#include <algorithm>

namespace hotproof::netsim {

namespace {

bool lex_less(const Route& lhs, const Route& rhs) {
  return std::lexicographical_compare(
    lhs.begin(), lhs.end(), rhs.begin(), rhs.end(),
    [](const RouteHop& x, const RouteHop& y) { return x.channel_id < y.channel_id; });
}

std::optional<Route> shortest_route(const NetworkGraph& graph, const std::string& src,
                                    const std::string& dst, std::uint64_t amount_sat,
                                    const std::string* excluded) {
  if (!graph.has_node(src))
    throw Error(ErrorCode::UnknownNode, src);
  if (!graph.has_node(dst))
    throw Error(ErrorCode::UnknownNode, dst);
  if (src == dst)
    throw Error(ErrorCode::InvalidArgument, "route source equals destination");

  std::map<std::string, std::vector<RouteHop>> adjacency;
  for (const auto& [id, ch] : graph.channels()) {
    if (excluded && id == *excluded)
      continue;
    if (ch.state.phase != ln::ChannelPhase::Open || ch.state.capacity_sat < amount_sat)
      continue;
    adjacency[ch.a].push_back({id, ch.a, ch.b});
    adjacency[ch.b].push_back({id, ch.b, ch.a});
  }

  // Level-synchronous BFS. The lexicographically smallest shortest path to v
  // always extends the smallest shortest path to its predecessor, so keeping
  // one best path per node is enough.
  std::map<std::string, Route> best{{src, {}}};
  std::vector<std::string> frontier{src};
  while (!frontier.empty() && !best.count(dst)) {
    std::map<std::string, Route> next_level;
    for (const auto& u : frontier) {
      for (const auto& hop : adjacency[u]) {
        if (best.count(hop.to))
          continue;
        Route candidate = best[u];
        candidate.push_back(hop);
        auto it = next_level.find(hop.to);
        if (it == next_level.end() || lex_less(candidate, it->second))
          next_level[hop.to] = std::move(candidate);
      }
    }
    frontier.clear();
    for (auto& [node, route] : next_level) {
      frontier.push_back(node);
      best.emplace(node, std::move(route));
    }
  }
  auto it = best.find(dst);
  if (it == best.end())
    return std::nullopt;
  return it->second;
}

} // namespace

void NetworkGraph::add_node(const std::string& id) {
  nodes_.insert(id);
}

void NetworkGraph::add_channel(const std::string& a, const std::string& b,
                               ln::ChannelState state) {
  if (a == b)
    throw Error(ErrorCode::InvalidArgument, "channel endpoints must differ");
  if (!has_node(a) || !has_node(b))
    throw Error(ErrorCode::InvalidArgument, "channel endpoints must be existing nodes");
  if (channels_.count(state.channel_id))
    throw Error(ErrorCode::InvalidArgument, "duplicate channel id " + state.channel_id);
  ln::check_invariants(state);
  auto id = state.channel_id;
  channels_.emplace(std::move(id), GraphChannel{a, b, std::move(state)});
}

const GraphChannel& NetworkGraph::channel(const std::string& id) const {
  auto it = channels_.find(id);
  if (it == channels_.end())
    throw Error(ErrorCode::InvalidArgument, "unknown channel " + id);
  return it->second;
}

NetworkGraph load_graph(const nlohmann::json& fixture) {
  const auto& list = fixture.is_object() && fixture.contains("channels") ? fixture["channels"] : fixture;
  if (!list.is_array())
    throw Error(ErrorCode::ParseError, "graph fixture must be a list of channels");
  NetworkGraph graph;
  try {
    for (const auto& c : list) {
      const auto id = c.at("id").get<std::string>();
      const auto a = c.at("a").get<std::string>();
      const auto b = c.at("b").get<std::string>();
      const auto capacity = c.at("capacity_sat").get<std::uint64_t>();
      const auto local = c.at("local_sat_of_a").get<std::uint64_t>();
      if (local > capacity)
        throw Error(ErrorCode::ParseError, "local_sat_of_a exceeds capacity on " + id);
      ln::ChannelState s;
      s.channel_id = id;
      s.funding_outpoint = {sha256("funding:" + id), 0};
      s.capacity_sat = capacity;
      s.local_msat = local * 1000;
      s.remote_msat = (capacity - local) * 1000;
      s.reserve_sat = c.value("reserve_sat", std::uint64_t{0});
      graph.add_node(a);
      graph.add_node(b);
      graph.add_channel(a, b, std::move(s));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("graph fixture: ") + e.what());
  }
  return graph;
}

std::optional<Route> find_route(const NetworkGraph& graph, const std::string& src,
                                const std::string& dst, std::uint64_t amount_sat) {
  return shortest_route(graph, src, dst, amount_sat, nullptr);
}

std::uint64_t hop_liquidity(const NetworkGraph& graph, const RouteHop& hop) {
  const auto& ch = graph.channel(hop.channel_id);
  return hop.from == ch.a ? ln::outbound_liquidity(ch.state)
                          : ln::remote_outbound_liquidity(ch.state);
}

ProbeOutcome probe_route(const NetworkGraph& graph, const Route& route, std::uint64_t amount_sat) {
  if (amount_sat == 0)
    throw Error(ErrorCode::InvalidArgument, "probe amount must be positive");
  for (const auto& hop : route) {
    // A probe of X succeeding means liquidity >= X, so equality forwards.
    if (hop_liquidity(graph, hop) < amount_sat)
      return ProbeOutcome::failed_at(hop.channel_id);
  }
  return ProbeOutcome::reached();
}

ProbeOutcome send_probe(const NetworkGraph& graph, const std::string& src, const std::string& dst,
                        std::uint64_t amount_sat) {
  if (amount_sat == 0)
    throw Error(ErrorCode::InvalidArgument, "probe amount must be positive");
  auto route = find_route(graph, src, dst, amount_sat);
  if (!route)
    return ProbeOutcome::no_route();
  return probe_route(graph, *route, amount_sat);
}

LiquidityEstimate estimate_liquidity(const NetworkGraph& graph, const std::string& src,
                                     const std::string& target_channel,
                                     std::uint64_t tolerance_sat) {
  if (tolerance_sat == 0)
    throw Error(ErrorCode::InvalidArgument, "tolerance must be at least 1 sat");
  if (!graph.has_node(src))
    throw Error(ErrorCode::UnknownNode, src);
  const auto& target = graph.channel(target_channel);
  if (target.state.phase != ln::ChannelPhase::Open)
    throw Error(ErrorCode::NoRoute, "target channel " + target_channel + " is not open");

  Route route;
  if (src != target.a) {
    auto prefix = shortest_route(graph, src, target.a, target.state.capacity_sat, &target_channel);
    if (!prefix)
      throw Error(ErrorCode::NoRoute, "no route from " + src + " to " + target.a);
    route = std::move(*prefix);
  }
  route.push_back({target_channel, target.a, target.b});

  LiquidityEstimate est{0, target.state.capacity_sat, 0};
  while (est.upper_bound_sat - est.lower_bound_sat >= tolerance_sat) {
    const auto mid = est.lower_bound_sat + (est.upper_bound_sat - est.lower_bound_sat + 1) / 2;
    const auto outcome = probe_route(graph, route, mid);
    ++est.probes_used;
    if (outcome.kind == ProbeOutcome::Kind::ReachedDestination) {
      est.lower_bound_sat = mid;
    } else if (outcome.failing_channel_id == target_channel) {
      est.upper_bound_sat = mid - 1;
    } else {
      throw Error(ErrorCode::ProbeInconclusive,
                  "probe of " + std::to_string(mid) + " sat failed before the target channel");
    }
  }
  return est;
}

} // namespace hotproof::netsim
