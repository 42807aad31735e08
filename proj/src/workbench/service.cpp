#include "mex/workbench/service.hpp"

#include "httplib.h"
#include "mex/core/error.hpp"

namespace mex::workbench {

namespace {

ServiceResponse error_response(int status, const std::string& message) {
  nlohmann::ordered_json j;
  j["error"] = message;
  return {status, "application/json", j.dump() + "\n"};
}

}  // namespace

AnnotationService::AnnotationService(std::shared_ptr<const ModelBundle> bundle, ServiceOptions options)
    : bundle_(std::move(bundle)), options_(std::move(options)), server_(std::make_unique<httplib::Server>()) {
  if (!bundle_) throw Error("service needs a model bundle");
  const auto threads = std::max<std::size_t>(1, options_.threads);
  server_->new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
  server_->set_payload_max_length(options_.max_body);
  // No SO_REUSEPORT: a second server on a busy port must fail to bind.
  server_->set_socket_options([](auto sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });

  server_->Post("/annotate", [this](const httplib::Request& req, httplib::Response& res) {
    const auto r = handle_annotate(req.body, req.get_header_value("Content-Type"));
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  });
  server_->Get("/health", [this](const httplib::Request&, httplib::Response& res) {
    const auto r = handle_health();
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  });
  server_->set_error_handler([this](const httplib::Request&, httplib::Response& res) {
    if (!res.body.empty()) return;
    const auto r = res.status == 413
                       ? error_response(413, "payload exceeds " + std::to_string(options_.max_body) + " bytes")
                       : error_response(res.status, httplib::status_message(res.status));
    res.set_content(r.body, r.content_type);
  });
}

AnnotationService::~AnnotationService() { stop(); }

ServiceResponse AnnotationService::handle_annotate(const std::string& body, const std::string& content_type) const {
  if (body.size() > options_.max_body) {
    return error_response(413, "payload exceeds " + std::to_string(options_.max_body) + " bytes");
  }
  std::string text = body;
  if (content_type.rfind("application/json", 0) == 0) {
    try {
      const auto j = nlohmann::json::parse(body);
      if (!j.is_object() || !j.contains("text") || !j["text"].is_string()) {
        return error_response(400, "expected a JSON object with a string field \"text\"");
      }
      text = j["text"].get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      return error_response(400, std::string("invalid JSON: ") + e.what());
    }
  }
  try {
    return {200, "application/json", result_json(annotate(*bundle_, text, options_.annotate))};
  } catch (const Error& e) {
    return error_response(400, e.what());
  } catch (const std::exception& e) {
    return error_response(500, e.what());
  }
}

ServiceResponse AnnotationService::handle_health() const {
  nlohmann::ordered_json j;
  j["status"] = "ok";
  j["manifest"] = bundle_->manifest.to_json();
  return {200, "application/json", j.dump() + "\n"};
}

int AnnotationService::bind(const std::string& host, int port) {
  if (port == 0) {
    const int p = server_->bind_to_any_port(host);
    if (p < 0) throw Error("cannot bind " + host + " to any port");
    return p;
  }
  if (!server_->bind_to_port(host, port)) throw Error("cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void AnnotationService::run() { server_->listen_after_bind(); }

void AnnotationService::start() {
  thread_ = std::thread([this] { run(); });
  server_->wait_until_ready();
}

void AnnotationService::stop() {
  if (server_->is_running()) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace mex::workbench
