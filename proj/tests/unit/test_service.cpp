#include <doctest.h>

#include "bpmn_assistant/layout.hpp"
#include "bpmn_assistant/mock_provider.hpp"
#include "bpmn_assistant/service.hpp"
#include "test_support.hpp"

using namespace bpmn_assistant;
using nlohmann::json;
using test_support::supplier_order;
using test_support::fixture;
using test_support::read_text;

namespace {

json classify(const std::string& contains, const std::string& intent) {
  return json{{"purpose", "classify"}, {"contains", contains}, {"responses", {json{{"text", intent}}}}};
}

json standard_script() {
  json rules = json::array({
      classify("What is BPMN", "conversational"),
      classify("Create", "create"),
      classify("Remove", "edit"),
      classify("Rename", "edit"),
      json{{"purpose", "converse"}, {"echo", true}},
      json{{"purpose", "generate_json"}, {"responses", {json{{"json", test_support::read_json(fixture("supplier_order.json"))}}}}},
      json{{"purpose", "generate_xml"}, {"responses", {json{{"text_file", "benchmark/responses/gen-02.bpmn"}}}}},
      json{{"purpose", "edit_json"},
           {"responses", {json{{"json", json::parse(R"([{"function": "delete_element", "arguments": {"element_id": "task2"}}])")}}}}},
  });
  return json{{"rules", rules}};
}

struct Rig {
  std::shared_ptr<ProviderRegistry> registry = std::make_shared<ProviderRegistry>();
  std::unique_ptr<Service> service;

  explicit Rig(ServiceConfig config = {}, json script = standard_script()) {
    registry->set_mock(std::make_shared<MockProvider>(script, fixture("")), true);
    service = std::make_unique<Service>(std::move(config), registry);
  }
};

std::size_t count(const std::string& haystack, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = haystack.find(needle); pos != std::string::npos; pos = haystack.find(needle, pos + 1)) ++n;
  return n;
}

ErrorCode code_of(const std::function<void()>& action) {
  try {
    action();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::kInvalidRequest;
}

}  // namespace

TEST_CASE("a create turn returns laid-out XML with one shape per node") {
  Rig rig;
  const std::string id = rig.service->create_session();
  const ChatTurnResult result = rig.service->handle_chat(id, "Create " + read_text(fixture("supplier_order_description.txt")));
  REQUIRE(result.ok());
  CHECK(result.intent == Intent::kCreate);
  REQUIRE(result.bpmn_xml);
  const FlowGraph graph = import_flow_graph(*result.bpmn_xml);
  CHECK(graph.nodes.size() == 8);
  CHECK(count(*result.bpmn_xml, "<bpmndi:BPMNShape") == graph.nodes.size());
  CHECK(count(*result.bpmn_xml, "<bpmndi:BPMNEdge") == graph.edges.size());
  CHECK(test_support::check_layout(graph, *result.bpmn_xml).ok());
  CHECK(result.status_events.front() == "Understanding your request");
  CHECK(result.status_events.back() == "Done");

  const Session s = rig.service->snapshot(id);
  CHECK(std::get<ProcessModel>(s.current) == supplier_order());
  CHECK(s.history.size() == 2);
  CHECK(rig.service->handle_download(id) == *result.bpmn_xml);
}

TEST_CASE("conversation carries no diagram") {
  Rig rig;
  const std::string id = rig.service->create_session();
  const ChatTurnResult result = rig.service->handle_chat(id, "What is BPMN?");
  REQUIRE(result.ok());
  CHECK(result.intent == Intent::kConversational);
  CHECK(result.reply_text == std::optional<std::string>("What is BPMN?"));
  CHECK_FALSE(result.bpmn_xml.has_value());
  CHECK(code_of([&] { rig.service->handle_download(id); }) == ErrorCode::kNothingToDownload);
}

TEST_CASE("an edit turn changes the stored model") {
  Rig rig;
  const std::string id = rig.service->create_session();
  REQUIRE(rig.service->handle_chat(id, "Create it").ok());
  const ChatTurnResult edited = rig.service->handle_chat(id, "Remove the documents step");
  REQUIRE(edited.ok());
  CHECK(edited.intent == Intent::kEdit);
  REQUIRE(edited.bpmn_xml);
  CHECK(import_flow_graph(*edited.bpmn_xml).find("task2") == nullptr);
  CHECK(rig.service->snapshot(id).history.size() == 4);
}

TEST_CASE("a failed generation leaves the session as it was") {
  // one good model, then garbage forever
  json script = json{{"rules", json::array({classify("", "create"),
                                            json{{"purpose", "generate_json"},
                                                 {"responses", {json{{"json", test_support::read_json(fixture("supplier_order.json"))}},
                                                                json{{"text", "nonsense"}}}}}})}};
  Rig rig(ServiceConfig{}, script);
  const std::string id = rig.service->create_session();
  REQUIRE(rig.service->handle_chat(id, "Create it").ok());
  const std::string before_xml = rig.service->handle_download(id);
  const Session before = rig.service->snapshot(id);

  const ChatTurnResult failed = rig.service->handle_chat(id, "Break everything");
  REQUIRE_FALSE(failed.ok());
  CHECK(failed.error->code == "GenerationFailed");
  CHECK(failed.status_events.back().rfind("Failed", 0) == 0);
  CHECK(rig.service->handle_download(id) == before_xml);
  const Session after = rig.service->snapshot(id);
  CHECK(std::get<ProcessModel>(after.current) == std::get<ProcessModel>(before.current));
  CHECK(after.history == before.history);
}

TEST_CASE("XML modality stores a document") {
  Rig rig;
  const std::string id = rig.service->create_session(Modality::kXml);
  const ChatTurnResult result = rig.service->handle_chat(id, "Create a process");
  REQUIRE(result.ok());
  CHECK(std::holds_alternative<BpmnDocument>(rig.service->snapshot(id).current));
  CHECK(strip_di(*result.bpmn_xml).find("BPMNShape") == std::string::npos);
}

TEST_CASE("uploads") {
  Rig rig;
  const std::string id = rig.service->create_session();

  SUBCASE("structured documents become editable") {
    const UploadResult r = rig.service->handle_upload(id, to_bpmn_xml(supplier_order()));
    CHECK(r.stored);
    CHECK(r.editable);
    CHECK(std::get<ProcessModel>(rig.service->snapshot(id).current) == supplier_order());
    REQUIRE(rig.service->handle_chat(id, "Remove the documents step").ok());
  }

  SUBCASE("unstructured documents are kept read-only") {
    const std::string original = read_text(fixture("xml/unstructured_shared_join.bpmn"));
    const UploadResult r = rig.service->handle_upload(id, original);
    CHECK(r.stored);
    CHECK_FALSE(r.editable);
    CHECK(rig.service->session_info(id).read_only);
    CHECK(strip_di(rig.service->handle_download(id)) == strip_di(original));
    const ChatTurnResult edit = rig.service->handle_chat(id, "Remove the documents step");
    REQUIRE_FALSE(edit.ok());
    CHECK(edit.error->code == "ReadOnlyModel");
  }

  SUBCASE("malformed and oversized inputs are refused") {
    CHECK(code_of([&] { rig.service->handle_upload(id, read_text(fixture("xml/malformed.bpmn"))); }) ==
          ErrorCode::kMalformedXml);
    CHECK_FALSE(rig.service->snapshot(id).has_model());
  }

  SUBCASE("invalid structure is reported, not stored") {
    const UploadResult r = rig.service->handle_upload(
        id, R"(<definitions xmlns="http://www.omg.org/spec/BPMN/20100524/MODEL"><process id="p"><startEvent id="s"/></process></definitions>)");
    CHECK_FALSE(r.stored);
    CHECK(r.report.has("MissingEnd"));
  }
}

TEST_CASE("upload size limit") {
  ServiceConfig config;
  config.max_upload_bytes = 100;
  Rig rig(config);
  const std::string id = rig.service->create_session();
  CHECK(code_of([&] { rig.service->handle_upload(id, to_bpmn_xml(supplier_order())); }) == ErrorCode::kTooLarge);
}

TEST_CASE("model selection and listing") {
  Rig rig;
  const std::string id = rig.service->create_session();
  CHECK(rig.service->session_info(id).model_name == "mock");
  rig.service->select_model(id, "GPT-4o mini");
  CHECK(rig.service->session_info(id).model_name == "GPT-4o mini");
  CHECK(code_of([&] { rig.service->select_model(id, "gpt-99"); }) == ErrorCode::kUnknownModel);
  CHECK(rig.service->session_info(id).model_name == "GPT-4o mini");
  CHECK(code_of([&] { rig.service->create_session(std::nullopt, "gpt-99"); }) == ErrorCode::kUnknownModel);
  CHECK(rig.service->list_models().size() == model_catalog().size());
  rig.service->set_modality(id, Modality::kXml);
  CHECK(rig.service->session_info(id).modality == Modality::kXml);
  CHECK(code_of([&] { rig.service->select_model("nope", "GPT-4o"); }) == ErrorCode::kUnknownSession);
}

TEST_CASE("sessions are isolated") {
  Rig rig;
  const std::string a = rig.service->create_session();
  const std::string b = rig.service->create_session();
  CHECK(a != b);
  REQUIRE(rig.service->handle_chat(a, "Create it").ok());
  CHECK_FALSE(rig.service->snapshot(b).has_model());
  CHECK(rig.service->snapshot(b).history.empty());
  CHECK(code_of([&] { rig.service->handle_download(b); }) == ErrorCode::kNothingToDownload);
}

TEST_CASE("status events are recorded per session") {
  Rig rig;
  const std::string id = rig.service->create_session();
  std::vector<std::string> seen;
  REQUIRE(rig.service->handle_chat(id, "Create it", [&](const std::string& e) { seen.push_back(e); }).ok());
  CHECK(seen == rig.service->events(id));
  CHECK(rig.service->events(id, seen.size()).empty());
  CHECK(std::find(seen.begin(), seen.end(), "Computing the diagram layout") != seen.end());
}

TEST_CASE("sessions survive a restart when persisted") {
  const auto dir = std::filesystem::temp_directory_path() / "bpmn_service_persist";
  std::filesystem::remove_all(dir);
  ServiceConfig config;
  config.persist_dir = dir;
  std::string id;
  std::string xml;
  {
    Rig rig(config);
    id = rig.service->create_session();
    REQUIRE(rig.service->handle_chat(id, "Create it").ok());
    xml = rig.service->handle_download(id);
  }
  {
    Rig rig(config);
    REQUIRE(rig.service->has_session(id));
    CHECK(rig.service->handle_download(id) == xml);
    CHECK(std::get<ProcessModel>(rig.service->snapshot(id).current) == supplier_order());
    CHECK(rig.service->create_session() != id);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("error payloads") {
  const ErrorPayload p = to_payload(Error(ErrorCode::kTooLarge, "too big"));
  CHECK(p.code == "TooLarge");
  CHECK(p.message == "too big");
}
