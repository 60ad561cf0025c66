#include <doctest.h>

#include <httplib.h>

#include <thread>

#include "bpmn_assistant/http_server.hpp"
#include "bpmn_assistant/mock_provider.hpp"
#include "test_support.hpp"

using namespace bpmn_assistant;
using nlohmann::json;
using test_support::supplier_order;
using test_support::fixture;

namespace {

struct Server {
  std::shared_ptr<ProviderRegistry> registry = std::make_shared<ProviderRegistry>();
  std::unique_ptr<Service> service;
  std::unique_ptr<HttpServer> http;
  std::thread thread;
  int port = -1;

  explicit Server(std::size_t max_upload = 5 * 1024 * 1024) {
    json rules = json::parse(R"([
      {"purpose": "classify", "contains": "Create", "responses": [{"text": "create"}]},
      {"purpose": "classify", "responses": [{"text": "conversational"}]},
      {"purpose": "converse", "echo": true}
    ])");
    rules.push_back(json{{"purpose", "generate_json"},
                         {"responses", {json{{"json", test_support::read_json(fixture("supplier_order.json"))}}}}});
    registry->set_mock(std::make_shared<MockProvider>(json{{"rules", rules}}), true);
    ServiceConfig config;
    config.max_upload_bytes = max_upload;
    service = std::make_unique<Service>(config, registry);
    http = std::make_unique<HttpServer>(*service);
    port = http->bind("127.0.0.1", 0);
    REQUIRE(port > 0);
    thread = std::thread([this] { http->serve(); });
    http->wait_until_ready();
  }
  ~Server() {
    http->stop();
    thread.join();
  }

  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port);
    c.set_read_timeout(30, 0);
    return c;
  }

  std::string new_session() {
    auto c = client();
    auto res = c.Post("/api/sessions", "{}", "application/json");
    REQUIRE(res);
    REQUIRE(res->status == 201);
    return json::parse(res->body).at("id").get<std::string>();
  }
};

}  // namespace

TEST_CASE("session lifecycle over HTTP") {
  Server server;
  auto c = server.client();
  const std::string id = server.new_session();

  auto info = c.Get("/api/sessions/" + id);
  REQUIRE(info);
  CHECK(info->status == 200);
  CHECK(json::parse(info->body).at("id") == id);

  auto missing = c.Get("/api/sessions/nope");
  REQUIRE(missing);
  CHECK(missing->status == 404);

  auto nothing = c.Get("/api/sessions/" + id + "/download");
  REQUIRE(nothing);
  CHECK(nothing->status == 404);
  CHECK(json::parse(nothing->body).at("error").at("code") == "NothingToDownload");

  auto chat = c.Post("/api/sessions/" + id + "/chat", json{{"message", "Create the process"}}.dump(), "application/json");
  REQUIRE(chat);
  CHECK(chat->status == 200);
  const json turn = json::parse(chat->body);
  CHECK(turn.at("intent") == "create");
  const std::string xml = turn.at("bpmn_xml").get<std::string>();
  CHECK(import_flow_graph(xml).nodes.size() == 8);

  auto download = c.Get("/api/sessions/" + id + "/download");
  REQUIRE(download);
  CHECK(download->status == 200);
  CHECK(download->get_header_value("Content-Type").find("xml") != std::string::npos);
  CHECK(download->body == xml);

  auto events = c.Get("/api/sessions/" + id + "/events?since=0");
  REQUIRE(events);
  const json ev = json::parse(events->body);
  CHECK(ev.at("events").at(0) == "Understanding your request");
  CHECK(ev.at("next") == ev.at("events").size());
}

TEST_CASE("conversational chat and streamed status") {
  Server server;
  auto c = server.client();
  const std::string id = server.new_session();

  auto plain = c.Post("/api/sessions/" + id + "/chat", json{{"message", "What is BPMN?"}}.dump(), "application/json");
  REQUIRE(plain);
  const json turn = json::parse(plain->body);
  CHECK(turn.at("reply_text") == "What is BPMN?");
  CHECK_FALSE(turn.contains("bpmn_xml"));

  auto streamed = c.Post("/api/sessions/" + id + "/chat?stream=1", json{{"message", "Create it"}}.dump(),
                         "application/json");
  REQUIRE(streamed);
  CHECK(streamed->get_header_value("Content-Type").find("text/event-stream") != std::string::npos);
  CHECK(streamed->body.find("event: status") != std::string::npos);
  CHECK(streamed->body.find("event: result") != std::string::npos);
  CHECK(streamed->body.find("Understanding your request") < streamed->body.find("event: result"));

  auto empty = c.Post("/api/sessions/" + id + "/chat", "{}", "application/json");
  REQUIRE(empty);
  CHECK(empty->status == 400);
  auto garbage = c.Post("/api/sessions/" + id + "/chat", "{not json", "application/json");
  REQUIRE(garbage);
  CHECK(garbage->status == 400);
}

TEST_CASE("upload over HTTP") {
  Server server(4096);
  auto c = server.client();
  const std::string id = server.new_session();

  httplib::MultipartFormDataItems items{{"file", to_bpmn_xml(supplier_order()), "process.bpmn", "application/xml"}};
  auto ok = c.Post("/api/sessions/" + id + "/upload", items);
  REQUIRE(ok);
  CHECK(ok->status == 200);
  const json body = json::parse(ok->body);
  CHECK(body.at("stored") == true);
  CHECK(body.at("editable") == true);

  auto raw = c.Post("/api/sessions/" + id + "/upload", test_support::read_text(fixture("xml/malformed.bpmn")),
                    "application/xml");
  REQUIRE(raw);
  CHECK(raw->status == 400);
  CHECK(json::parse(raw->body).at("error").at("code") == "MalformedXml");

  auto invalid = c.Post(
      "/api/sessions/" + id + "/upload",
      R"(<definitions xmlns="http://www.omg.org/spec/BPMN/20100524/MODEL"><process id="p"><startEvent id="s"/></process></definitions>)",
      "application/xml");
  REQUIRE(invalid);
  CHECK(invalid->status == 422);
  CHECK(json::parse(invalid->body).at("stored") == false);

  auto big = c.Post("/api/sessions/" + id + "/upload", std::string(5000, ' ') + "<x/>", "application/xml");
  REQUIRE(big);
  CHECK(big->status == 413);
}

TEST_CASE("models and selection over HTTP") {
  Server server;
  auto c = server.client();
  const std::string id = server.new_session();

  auto models = c.Get("/api/models");
  REQUIRE(models);
  const json list = json::parse(models->body).at("models");
  CHECK(list.size() == model_catalog().size());
  CHECK(list.at(0).contains("vendor"));

  auto chosen = c.Put("/api/sessions/" + id + "/model", json{{"model", "GPT-4o"}, {"modality", "xml"}}.dump(),
                      "application/json");
  REQUIRE(chosen);
  CHECK(chosen->status == 200);
  CHECK(server.service->session_info(id).model_name == "GPT-4o");
  CHECK(server.service->session_info(id).modality == Modality::kXml);

  auto unknown = c.Put("/api/sessions/" + id + "/model", json{{"model", "gpt-99"}}.dump(), "application/json");
  REQUIRE(unknown);
  CHECK(unknown->status == 400);
  auto bad_modality = c.Put("/api/sessions/" + id + "/model", json{{"model", "mock"}, {"modality", "yaml"}}.dump(),
                            "application/json");
  REQUIRE(bad_modality);
  CHECK(bad_modality->status == 400);
  // neither half of a rejected request is applied
  CHECK(server.service->session_info(id).model_name == "GPT-4o");
}

TEST_CASE("status codes for error codes") {
  CHECK(http_status_for(ErrorCode::kUnknownSession) == 404);
  CHECK(http_status_for(ErrorCode::kNothingToDownload) == 404);
  CHECK(http_status_for(ErrorCode::kTooLarge) == 413);
  CHECK(http_status_for(ErrorCode::kMalformedXml) == 400);
  CHECK(http_status_for(ErrorCode::kUnknownModel) == 400);
  CHECK(http_status_for(ErrorCode::kGenerationFailed) == 422);
}
