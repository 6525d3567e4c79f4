#pragma once

#include <memory>
#include <string>

#include "molex/service/platform.hpp"

namespace httplib {
class Server;
}

namespace molex::service {

/// HTTP front end for a Platform. Routes live under /v1; the web UI, when
/// ui_dir is set, is served from /ui.
class HttpServer {
 public:
  explicit HttpServer(Platform& platform);
  ~HttpServer();

  /// Binds host:port. Port 0 picks a free port. Returns the bound port, or -1.
  int bind(const std::string& host, int port);
  /// Blocks until stop() is called.
  bool listen();
  void stop();
  bool running() const;

 private:
  void install_routes();

  Platform& platform_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace molex::service
