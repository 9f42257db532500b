// Copyright (c) The hotproof authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#include "hotproof/http.hpp"

#include <httplib.h>
#include <json.hpp>

#include <thread>

namespace hotproof::http {

Response error_response(int status, ErrorCode code, const std::string& detail) {
  Response r;
  r.status = status;
  r.body = nlohmann::ordered_json{{"error", std::string(to_string(code))}, {"detail", detail}}.dump() + "\n";
  return r;
}

Response error_response(int status, const Error& error) {
  return error_response(status, error.code(), error.detail());
}

Error error_from_response(const Response& response) {
  try {
    auto j = nlohmann::json::parse(response.body);
    ErrorCode code;
    if (error_code_from_string(j.at("error").get<std::string>(), code))
      return Error(code, j.value("detail", ""));
  } catch (const nlohmann::json::exception&) {
  }
  return Error(ErrorCode::ServiceUnavailable, "HTTP " + std::to_string(response.status));
}

struct Server::Impl {
  httplib::Server server;
  std::thread thread;
};

Server::Server(Handler handler, const std::string& host, int port)
  : impl_(std::make_unique<Impl>()), host_(host) {
  auto dispatch = [handler = std::move(handler)](const httplib::Request& req, httplib::Response& res) {
    Request r{req.method, req.path, {}, req.body};
    for (const auto& [k, v] : req.params)
      r.query[k] = v;
    Response out;
    try {
      out = handler(r);
    } catch (const Error& e) {
      out = error_response(400, e);
    } catch (const std::exception& e) {
      out = error_response(500, ErrorCode::ServiceUnavailable, e.what());
    }
    res.status = out.status;
    for (const auto& [k, v] : out.headers)
      res.set_header(k, v);
    res.set_content(out.body, out.content_type);
  };
  impl_->server.Get(".*", dispatch);
  impl_->server.Post(".*", dispatch);

  if (port == 0)
    port_ = impl_->server.bind_to_any_port(host);
  else if (impl_->server.bind_to_port(host, port))
    port_ = port;
  else
    port_ = -1;
  if (port_ < 0)
    throw Error(ErrorCode::BadConfig, "cannot listen on " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

Server::~Server() {
  stop();
  if (impl_->thread.joinable())
    impl_->thread.join();
}

std::string Server::url() const {
  return "http://" + host_ + ":" + std::to_string(port_);
}

void Server::wait() {
  if (impl_->thread.joinable())
    impl_->thread.join();
}

void Server::stop() {
  impl_->server.stop();
}

std::optional<Response> send(const std::string& base_url, const Request& request) {
  httplib::Client client(base_url);
  client.set_connection_timeout(2);
  client.set_read_timeout(10);
  std::string target = request.path;
  if (!request.query.empty()) {
    httplib::Params params(request.query.begin(), request.query.end());
    target = httplib::append_query_params(target, params);
  }
  httplib::Result res = request.method == "POST"
                          ? client.Post(target, request.body, "application/json")
                          : client.Get(target);
  if (!res)
    return std::nullopt;
  Response out;
  out.status = res->status;
  out.body = res->body;
  out.content_type = res->get_header_value("Content-Type");
  for (const auto& [k, v] : res->headers)
    out.headers[k] = v;
  return out;
}

std::vector<std::string> path_segments(const std::string& path) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < path.size()) {
    auto next = path.find('/', pos);
    if (next == std::string::npos)
      next = path.size();
    if (next > pos)
      out.push_back(path.substr(pos, next - pos));
    pos = next + 1;
  }
  return out;
}

} // namespace hotproof::http
