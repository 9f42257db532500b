// Copyright (c) The hotproof authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include "hotproof/error.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>

namespace hotproof::http {

struct Request {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
};

struct Response {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
  std::map<std::string, std::string> headers;
};

using Handler = std::function<Response(const Request&)>;

/// {"error": "<code>", "detail": "..."} with the given status.
Response error_response(int status, const Error& error);
Response error_response(int status, ErrorCode code, const std::string& detail);
/// Recovers the Error carried by an error_response body; ServiceUnavailable
/// when the body is not one.
Error error_from_response(const Response& response);

/// Serves a handler on host:port in a background thread. Port 0 picks a free
/// port. Stops and joins on destruction.
class Server {
public:
  Server(Handler handler, const std::string& host, int port);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  int port() const { return port_; }
  std::string url() const;
  /// Blocks the caller until stop() is called from elsewhere.
  void wait();
  void stop();

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::string host_;
  int port_ = 0;
};

/// Performs one request against base_url ("http://host:port"). nullopt means
/// the connection itself failed.
std::optional<Response> send(const std::string& base_url, const Request& request);

/// Splits "/a/b/c" into {"a","b","c"}.
std::vector<std::string> path_segments(const std::string& path);

} // namespace hotproof::http
