#pragma once

#include <memory>
#include <optional>
#include <string>

#include "csc/engine.hpp"
#include "csc/session_store.hpp"

namespace csc {

struct ServiceOptions {
  std::optional<std::string> auth_token;  // required as "Authorization: Bearer <token>" when set
  std::string asset_version;
  std::string log_level = "info";  // "debug" logs every request to stderr
};

// HTTP status used for a library error code.
int http_status(ErrorCode code);

// JSON-over-HTTP front end under /api/v1. Owns its HTTP server.
class Service {
 public:
  Service(std::shared_ptr<const Engine> engine, std::shared_ptr<SessionStore> store, ServiceOptions options = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Binds to host:port (port 0 picks a free one) and returns the bound port.
  int bind(const std::string& host, int port);
  // Serves until stop(); call after bind().
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace csc
