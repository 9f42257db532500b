// Copyright (c) The hotproof authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "hotproof/chain_oracle.hpp"

namespace hotproof::oracle {

namespace {

ln::Outpoint outpoint_from_segments(const std::string& txid, const std::string& vout) {
  try {
    return {hash_from_hex(txid), static_cast<std::uint32_t>(std::stoul(vout))};
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::ParseError, "bad vout " + vout);
  }
}

http::Response json_response(const nlohmann::json& j) {
  http::Response r;
  r.body = j.dump() + "\n";
  return r;
}

} // namespace

http::Response handle_oracle_request(ChainOracle& oracle, const http::Request& request) {
  const auto seg = http::path_segments(request.path);
  try {
    if (request.method == "GET" && seg.size() == 1 && seg[0] == "tip")
      return json_response(to_json(oracle.tip()));
    if (request.method == "GET" && seg.size() == 3 && seg[0] == "outspend")
      return json_response(to_json(oracle.outspend(outpoint_from_segments(seg[1], seg[2]))));

    if (request.method == "POST" && seg.size() >= 2 && seg[0] == "admin") {
      if (seg[1] == "advance") {
        auto it = request.query.find("count");
        oracle.advance_block(it == request.query.end() ? 1 : std::stoull(it->second));
      } else if (seg[1] == "mark_spent" && seg.size() == 4) {
        oracle.mark_spent(outpoint_from_segments(seg[2], seg[3]));
      } else if (seg[1] == "online") {
        auto it = request.query.find("state");
        oracle.set_online(it == request.query.end() || it->second != "0");
      } else {
        return http::error_response(404, ErrorCode::InvalidArgument, request.path);
      }
      return json_response({{"height", oracle.height()}});
    }
  } catch (const Error& e) {
    switch (e.code()) {
      case ErrorCode::OracleUnavailable:
        return http::error_response(503, e);
      case ErrorCode::UnknownOutpoint:
        return http::error_response(404, e);
      default:
        return http::error_response(400, e);
    }
  }
  return http::error_response(404, ErrorCode::InvalidArgument, "no route " + request.path);
}

OracleStatement HttpOracleClient::fetch(const std::string& path) {
  auto res = http::send(base_url_, {"GET", path, {}, {}});
  if (!res)
    throw Error(ErrorCode::OracleUnavailable, "cannot reach " + base_url_);
  if (res->status != 200) {
    auto err = http::error_from_response(*res);
    if (err.code() == ErrorCode::UnknownOutpoint)
      throw err;
    throw Error(ErrorCode::OracleUnavailable, err.what());
  }
  try {
    return statement_from_json(nlohmann::json::parse(res->body));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BadOracleSignature, std::string("unparseable oracle reply: ") + e.what());
  } catch (const Error& e) {
    throw Error(ErrorCode::BadOracleSignature, std::string("unparseable oracle reply: ") + e.what());
  }
}

OracleStatement HttpOracleClient::tip() {
  return fetch("/tip");
}

OracleStatement HttpOracleClient::outspend(const ln::Outpoint& outpoint) {
  return fetch("/outspend/" + to_hex(outpoint.txid) + "/" + std::to_string(outpoint.vout));
}

} // namespace hotproof::oracle
