#include "bpmn_assistant/http_server.hpp"

#include <httplib.h>

#include <nlohmann/json.hpp>

using nlohmann::json;

namespace bpmn_assistant {

int http_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnknownSession:
    case ErrorCode::kNothingToDownload:
      return 404;
    case ErrorCode::kTooLarge:
      return 413;
    case ErrorCode::kMalformedXml:
    case ErrorCode::kInvalidRequest:
    case ErrorCode::kUnknownModel:
    case ErrorCode::kMalformedDocument:
      return 400;
    default:
      return 422;
  }
}

namespace {

json payload_json(const ErrorPayload& payload) { return {{"code", payload.code}, {"message", payload.message}}; }

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const std::exception& e) {
  const ErrorPayload payload = to_payload(e);
  int status = 500;
  if (const auto* error = dynamic_cast<const Error*>(&e)) status = http_status_for(error->code());
  send_json(res, status, {{"error", payload_json(payload)}});
}

json info_json(const SessionInfo& info) {
  return {{"id", info.id},
          {"modality", to_string(info.modality)},
          {"model", info.model_name},
          {"has_model", info.has_model},
          {"read_only", info.read_only},
          {"history_length", info.history_length}};
}

json chat_json(const ChatTurnResult& result) {
  json body = {{"status_events", result.status_events}};
  if (result.intent) body["intent"] = to_string(*result.intent);
  if (result.reply_text) body["reply_text"] = *result.reply_text;
  if (result.bpmn_xml) body["bpmn_xml"] = *result.bpmn_xml;
  if (result.error) body["error"] = payload_json(*result.error);
  return body;
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  json body = json::parse(req.body, nullptr, false);
  if (body.is_discarded() || !body.is_object()) {
    throw Error(ErrorCode::kInvalidRequest, "request body must be a JSON object");
  }
  return body;
}

Modality parse_modality(const json& value) {
  if (!value.is_string()) throw Error(ErrorCode::kInvalidRequest, "modality must be a string");
  auto modality = modality_from_string(value.get<std::string>());
  if (!modality) throw Error(ErrorCode::kInvalidRequest, "modality must be \"json\" or \"xml\"");
  return *modality;
}

bool wants_stream(const httplib::Request& req) {
  if (req.has_param("stream")) return req.get_param_value("stream") != "0";
  return req.get_header_value("Accept").find("text/event-stream") != std::string::npos;
}

std::string sse(std::string_view event, const json& data) {
  return "event: " + std::string(event) + "\ndata: " + data.dump() + "\n\n";
}

}  // namespace

HttpServer::HttpServer(Service& service, std::optional<std::filesystem::path> static_dir)
    : service_(service), server_(std::make_unique<httplib::Server>()) {
  server_->set_payload_max_length(service_.config().max_upload_bytes + 64 * 1024);
  if (static_dir) server_->set_mount_point("/", static_dir->string());
  install_routes();
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return server_->bind_to_any_port(host);
  return server_->bind_to_port(host, port) ? port : -1;
}

bool HttpServer::serve() { return server_->listen_after_bind(); }

void HttpServer::stop() {
  if (server_) server_->stop();
}

void HttpServer::wait_until_ready() const { server_->wait_until_ready(); }

void HttpServer::install_routes() {
  using Req = httplib::Request;
  using Res = httplib::Response;

  // Wraps a handler so library errors become JSON error payloads.
  auto guarded = [](auto handler) {
    return [handler](const Req& req, Res& res) {
      try {
        handler(req, res);
      } catch (const json::exception& e) {
        send_json(res, 400, {{"error", {{"code", "InvalidRequest"}, {"message", e.what()}}}});
      } catch (const std::exception& e) {
        send_error(res, e);
      }
    };
  };

  server_->Post("/api/sessions", guarded([this](const Req& req, Res& res) {
    const json body = parse_body(req);
    std::optional<Modality> modality;
    std::optional<std::string> model;
    if (body.contains("modality")) modality = parse_modality(body["modality"]);
    if (body.contains("model")) model = body["model"].get<std::string>();
    const std::string id = service_.create_session(modality, model);
    send_json(res, 201, info_json(service_.session_info(id)));
  }));

  server_->Get(R"(/api/sessions/([A-Za-z0-9_-]+))", guarded([this](const Req& req, Res& res) {
    send_json(res, 200, info_json(service_.session_info(req.matches[1])));
  }));

  server_->Post(R"(/api/sessions/([A-Za-z0-9_-]+)/chat)", guarded([this](const Req& req, Res& res) {
    const json body = parse_body(req);
    if (!body.contains("message") || !body["message"].is_string()) {
      throw Error(ErrorCode::kInvalidRequest, "field \"message\" (string) is required");
    }
    const std::string id = req.matches[1];
    const std::string message = body["message"].get<std::string>();
    if (!wants_stream(req)) {
      send_json(res, 200, chat_json(service_.handle_chat(id, message)));
      return;
    }
    // Runs the turn inside the content provider so status events reach the
    // client while the turn is in progress.
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider("text/event-stream", [this, id, message](size_t, httplib::DataSink& sink) {
      const ChatTurnResult result = service_.handle_chat(id, message, [&sink](const std::string& status) {
        const std::string frame = sse("status", {{"status", status}});
        sink.write(frame.data(), frame.size());
      });
      const std::string frame = sse("result", chat_json(result));
      sink.write(frame.data(), frame.size());
      sink.done();
      return true;
    });
  }));

  server_->Post(R"(/api/sessions/([A-Za-z0-9_-]+)/upload)", guarded([this](const Req& req, Res& res) {
    std::string bytes = req.body;
    if (req.is_multipart_form_data()) {
      if (!req.has_file("file")) throw Error(ErrorCode::kInvalidRequest, "multipart field \"file\" is required");
      bytes = req.get_file_value("file").content;
    }
    const UploadResult result = service_.handle_upload(req.matches[1], bytes);
    json body = {{"stored", result.stored}, {"editable", result.editable}, {"report", report_to_json(result.report)}};
    if (result.bpmn_xml) body["bpmn_xml"] = *result.bpmn_xml;
    send_json(res, result.stored ? 200 : 422, body);
  }));

  server_->Get(R"(/api/sessions/([A-Za-z0-9_-]+)/download)", guarded([this](const Req& req, Res& res) {
    const std::string id = req.matches[1];
    res.set_content(service_.handle_download(id), "application/xml");
    res.set_header("Content-Disposition", "attachment; filename=\"" + id + ".bpmn\"");
  }));

  server_->Get("/api/models", guarded([this](const Req&, Res& res) {
    json models = json::array();
    for (const auto& model : service_.list_models()) {
      models.push_back({{"name", model.name},
                        {"api_model", model.api_model},
                        {"vendor", to_string(model.vendor)},
                        {"supports_temperature", model.supports_temperature}});
    }
    send_json(res, 200, {{"models", models}});
  }));

  server_->Put(R"(/api/sessions/([A-Za-z0-9_-]+)/model)", guarded([this](const Req& req, Res& res) {
    const json body = parse_body(req);
    const std::string id = req.matches[1];
    if (!body.contains("model") && !body.contains("modality")) {
      throw Error(ErrorCode::kInvalidRequest, "expected \"model\" and/or \"modality\"");
    }
    // Validate both before changing either.
    std::optional<Modality> modality;
    if (body.contains("modality")) modality = parse_modality(body["modality"]);
    if (body.contains("model")) {
      if (!body["model"].is_string()) throw Error(ErrorCode::kInvalidRequest, "model must be a string");
      const std::string name = body["model"].get<std::string>();
      if (!find_model(name)) throw Error(ErrorCode::kUnknownModel, "unknown model '" + name + "'");
      service_.select_model(id, name);
    }
    if (modality) service_.set_modality(id, *modality);
    send_json(res, 200, info_json(service_.session_info(id)));
  }));

  server_->Get(R"(/api/sessions/([A-Za-z0-9_-]+)/events)", guarded([this](const Req& req, Res& res) {
    std::size_t since = 0;
    if (req.has_param("since")) {
      try {
        since = std::stoul(req.get_param_value("since"));
      } catch (const std::exception&) {
        throw Error(ErrorCode::kInvalidRequest, "since must be a non-negative integer");
      }
    }
    const auto events = service_.events(req.matches[1], since);
    send_json(res, 200, {{"since", since}, {"events", events}, {"next", since + events.size()}});
  }));
}

}  // namespace bpmn_assistant
