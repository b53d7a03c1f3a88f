#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "geocms/codec.hpp"
#include "geocms/query.hpp"
#include "geocms/store.hpp"

namespace geocms {

struct ApiRequest {
  std::string method;  // GET, POST, PUT, DELETE
  std::string path;    // decoded, without the query string
  std::vector<std::pair<std::string, std::string>> params;  // decoded, in order
  std::string body;
};

struct ApiResponse {
  int status = 200;
  std::string body;  // empty for 204
  std::string content_type = "application/json";
};

/// Decoded query of GET /collections/{cid}/items. Throws BadQuery.
QuerySpec parse_items_query(const std::vector<std::pair<std::string, std::string>>& params);

/// "instant" or "start/end"; either end may be "..". Throws BadQuery.
TimeInterval parse_datetime_param(const std::string& s);

/// Routes requests to the store. Transport-free so it can be driven
/// directly in tests; HttpServer adapts it to sockets.
class ApiService {
 public:
  explicit ApiService(MediaStore& store) : store_(store) {}

  ApiResponse handle(const ApiRequest& req) const;

 private:
  ApiResponse route(const ApiRequest& req) const;

  MediaStore& store_;
};

/// Blocking HTTP/1.1 front end.
class HttpServer {
 public:
  explicit HttpServer(const ApiService& api);
  ~HttpServer();

  /// Binds `host:port` (port 0 picks a free one) and returns the bound
  /// port. Throws IoError.
  int bind(const std::string& host, int port);
  /// Serves until stop(). Call after bind().
  void run();
  void stop();
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Splits "host:port"; throws InvalidArgument.
std::pair<std::string, int> parse_listen_address(const std::string& addr);

}  // namespace geocms
