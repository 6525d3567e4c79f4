#include "molex/service/http.hpp"

#include <httplib.h>

namespace molex::service {
namespace {

void send(httplib::Response& res, const ApiResponse& r) {
  res.status = r.status;
  res.set_content(r.body, r.content_type);
}

const std::string kId = R"(([A-Za-z0-9_]+))";

}  // namespace

HttpServer::HttpServer(Platform& platform) : platform_(platform), server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return server_->bind_to_any_port(host);
  return server_->bind_to_port(host, port) ? port : -1;
}

bool HttpServer::listen() { return server_->listen_after_bind(); }

void HttpServer::stop() {
  if (server_->is_running()) server_->stop();
}

bool HttpServer::running() const { return server_->is_running(); }

void HttpServer::install_routes() {
  auto& s = *server_;
  Platform& p = platform_;
  const auto& cfg = p.config();

  s.set_payload_max_length(cfg.max_upload_bytes);

  if (!cfg.api_key.empty()) {
    const std::string key = cfg.api_key;
    s.set_pre_routing_handler([key](const httplib::Request& req, httplib::Response& res) {
      if (!req.path.starts_with("/v1/") || req.path == "/v1/health") return httplib::Server::HandlerResponse::Unhandled;
      if (req.get_header_value("X-API-Key") == key) return httplib::Server::HandlerResponse::Unhandled;
      send(res, error_response(401, "missing or invalid API key"));
      return httplib::Server::HandlerResponse::Handled;
    });
  }

  // httplib answers some failures (unknown route, oversized body) itself with
  // an empty body; give those the same JSON shape as everything else.
  s.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (!res.body.empty()) return;
    const char* message = res.status == 404   ? "not found"
                          : res.status == 413 ? "request body too large"
                                              : httplib::status_message(res.status);
    send(res, error_response(res.status, message));
  });

  s.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string what = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    send(res, error_response(500, "internal error", {{"reason", what}}));
  });

  s.Get("/v1/health", [&p](const httplib::Request&, httplib::Response& res) { send(res, p.health()); });

  s.Post("/v1/neighbors",
         [&p](const httplib::Request& req, httplib::Response& res) { send(res, p.neighbors(req.body)); });

  s.Post("/v1/datasets", [&p](const httplib::Request& req, httplib::Response& res) {
    if (!req.is_multipart_form_data()) {
      send(res, error_response(400, "expected multipart/form-data with a `file` part"));
      return;
    }
    if (!req.has_file("file")) {
      send(res, error_response(400, "missing `file` part"));
      return;
    }
    const auto file = req.get_file_value("file");
    std::optional<std::string> embeddings;
    if (req.has_file("embeddings")) embeddings = req.get_file_value("embeddings").content;
    const std::string name = req.has_file("name") ? req.get_file_value("name").content : "";
    send(res, p.upload(file.content, file.filename, name, embeddings));
  });

  s.Get("/v1/datasets/" + kId,
        [&p](const httplib::Request& req, httplib::Response& res) { send(res, p.dataset(req.matches[1])); });

  s.Post("/v1/datasets/" + kId + "/projection", [&p](const httplib::Request& req, httplib::Response& res) {
    send(res, p.start_projection(req.matches[1], req.body));
  });

  s.Post("/v1/datasets/" + kId + "/eval", [&p](const httplib::Request& req, httplib::Response& res) {
    send(res, p.start_eval(req.matches[1], req.body));
  });

  s.Get("/v1/jobs/" + kId,
        [&p](const httplib::Request& req, httplib::Response& res) { send(res, p.job(req.matches[1])); });

  s.Get("/v1/jobs/" + kId + "/result",
        [&p](const httplib::Request& req, httplib::Response& res) { send(res, p.job_result(req.matches[1])); });

  s.Delete("/v1/jobs/" + kId,
           [&p](const httplib::Request& req, httplib::Response& res) { send(res, p.cancel_job(req.matches[1])); });

  s.Get("/v1/depict", [&p](const httplib::Request& req, httplib::Response& res) {
    if (!req.has_param("smiles")) {
      send(res, error_response(400, "missing `smiles` parameter"));
      return;
    }
    send(res, p.depict(req.get_param_value("smiles"), req.get_param_value("vs")));
  });

  s.Get("/v1/pubchem/similar", [&p](const httplib::Request& req, httplib::Response& res) {
    if (!req.has_param("smiles")) {
      send(res, error_response(400, "missing `smiles` parameter"));
      return;
    }
    send(res, p.pubchem(req.get_param_value("smiles"), req.get_param_value("threshold")));
  });

  if (!cfg.ui_dir.empty()) s.set_mount_point("/ui", cfg.ui_dir.string());
}

}  // namespace molex::service
