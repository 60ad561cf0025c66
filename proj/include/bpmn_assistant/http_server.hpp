#pragma once

// HTTP+JSON facade over Service. Endpoints and payloads are listed in
// docs/api.md.

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "bpmn_assistant/service.hpp"

namespace httplib {
class Server;
}

namespace bpmn_assistant {

class HttpServer {
 public:
  explicit HttpServer(Service& service, std::optional<std::filesystem::path> static_dir = std::nullopt);
  ~HttpServer();

  /// Returns the bound port, or -1.
  int bind(const std::string& host, int port = 0);
  /// Blocks until stop().
  bool serve();
  void stop();
  void wait_until_ready() const;

 private:
  void install_routes();

  Service& service_;
  std::unique_ptr<httplib::Server> server_;
};

/// HTTP status for an error code.
int http_status_for(ErrorCode code);

}  // namespace bpmn_assistant
