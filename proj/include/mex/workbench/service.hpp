#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <thread>

#include "mex/workbench/annotate.hpp"

namespace httplib {
class Server;
}

namespace mex::workbench {

struct ServiceOptions {
  std::size_t max_body = 1 << 20;  // bytes; larger requests get 413
  std::size_t threads = 8;
  AnnotateOptions annotate;
};

struct ServiceResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

// HTTP front end of annotate():
//   POST /annotate  body is plain text, or JSON {"text": "..."} when the
//                   content type is application/json
//   GET  /health    status and the bundle manifest
// Requests share the immutable bundle; everything else is per request.
class AnnotationService {
 public:
  AnnotationService(std::shared_ptr<const ModelBundle> bundle, ServiceOptions options = {});
  ~AnnotationService();
  AnnotationService(const AnnotationService&) = delete;
  AnnotationService& operator=(const AnnotationService&) = delete;

  // The request handlers, callable without a socket.
  ServiceResponse handle_annotate(const std::string& body, const std::string& content_type) const;
  ServiceResponse handle_health() const;

  // Binds and returns the port (an ephemeral one for port 0). Throws Error
  // when the address cannot be bound.
  int bind(const std::string& host, int port);
  // Serves until stop(); run() blocks, start() uses a background thread.
  void run();
  void start();
  void stop();

 private:
  std::shared_ptr<const ModelBundle> bundle_;
  ServiceOptions options_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace mex::workbench
