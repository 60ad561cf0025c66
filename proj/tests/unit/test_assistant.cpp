#include <doctest.h>

#include "bpmn_assistant/assistant.hpp"
#include "bpmn_assistant/mock_provider.hpp"
#include "test_support.hpp"

using namespace bpmn_assistant;
using nlohmann::json;
using test_support::supplier_order;
using test_support::fixture;
using test_support::read_text;

namespace {

struct Rig {
  std::shared_ptr<MockProvider> mock;
  std::shared_ptr<ProviderRegistry> registry = std::make_shared<ProviderRegistry>();
  std::unique_ptr<Assistant> assistant;
  Session session;

  explicit Rig(const json& script) : mock(std::make_shared<MockProvider>(script, fixture(""))) {
    registry->set_mock(mock, true);
    assistant = std::make_unique<Assistant>(registry);
    session.model_name = "mock";
  }
};

json replies(const std::string& purpose, const std::vector<json>& responses) {
  return json{{"rules", json::array({json{{"purpose", purpose}, {"responses", responses}}})}};
}

json text(const std::string& t) { return json{{"text", t}}; }

}  // namespace

TEST_CASE("payload extraction and intent parsing") {
  CHECK(extract_payload("  plain  ") == "plain");
  CHECK(extract_payload("Here you go:\n```json\n{\"a\": 1}\n```\nbye") == "{\"a\": 1}");
  CHECK(parse_intent("edit") == Intent::kEdit);
  CHECK(parse_intent("{\"intent\": \"create\"}") == Intent::kCreate);
  CHECK(parse_intent("```\nCONVERSATIONAL\n```") == Intent::kConversational);
  CHECK_FALSE(parse_intent("create or edit").has_value());
  CHECK_FALSE(parse_intent("no idea").has_value());
}

TEST_CASE("intent classification routes the sample requests") {
  json script{{"rules", json::array({
                            json{{"purpose", "classify"}, {"contains", "What is BPMN"}, {"responses", {text("conversational")}}},
                            json{{"purpose", "classify"}, {"contains", "Create a process"}, {"responses", {text("create")}}},
                            json{{"purpose", "classify"}, {"contains", "Add a step"}, {"responses", {text("{\"intent\": \"edit\"}")}}},
                            json{{"purpose", "classify"}, {"responses", {text("maybe?")}}},
                        })}};
  Rig rig(script);
  CHECK(rig.assistant->classify_intent(rig.session, "What is BPMN?") == Intent::kConversational);
  CHECK(rig.assistant->classify_intent(rig.session, "Create a process for ordering pizza") == Intent::kCreate);
  CHECK(rig.assistant->classify_intent(rig.session, "Add a step for payment") == Intent::kEdit);
  try {
    rig.assistant->classify_intent(rig.session, "hmm");
    FAIL("classified");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUnparseableClassification);
  }
  CHECK_THROWS_AS(rig.assistant->classify_intent(rig.session, "   "), Error);
}

TEST_CASE("JSON generation returns the scripted model") {
  Rig rig(replies("generate_json", {json{{"json", test_support::read_json(fixture("supplier_order.json"))}}}));
  const ProcessModel model =
      rig.assistant->generate_json(rig.session, read_text(fixture("supplier_order_description.txt")));
  CHECK(model == supplier_order());
  REQUIRE(rig.session.attempts.size() == 1);
  CHECK(rig.session.attempts[0].accepted);
  const auto requests = rig.mock->requests();
  REQUIRE(requests.size() == 1);
  CHECK(requests[0].purpose == "generate_json");
  CHECK(requests[0].messages.back().content.find("sends the mail to the supplier") != std::string::npos);
}

TEST_CASE("an invalid reply is retried with feedback") {
  const std::string invalid = R"({"process": [{"type": "task", "id": "t", "label": "x"}]})";
  Rig rig(replies("generate_json", {text(invalid), json{{"json", test_support::read_json(fixture("supplier_order.json"))}}}));
  CHECK(rig.assistant->generate_json(rig.session, "anything") == supplier_order());
  REQUIRE(rig.session.attempts.size() == 2);
  CHECK_FALSE(rig.session.attempts[0].accepted);
  CHECK(rig.session.attempts[0].diagnostic.find("MissingStart") != std::string::npos);
  CHECK(rig.session.attempts[1].attempt == 2);
  const auto requests = rig.mock->requests();
  REQUIRE(requests.size() == 2);
  // the retry carries the failed reply and the validator's complaint
  REQUIRE(requests[1].messages.size() == 3);
  CHECK(requests[1].messages[1].role == "assistant");
  CHECK(requests[1].messages[2].content.find("MissingStart") != std::string::npos);
}

TEST_CASE("generation gives up after three invalid replies") {
  Rig rig(replies("generate_json", {text("not json")}));
  try {
    rig.assistant->generate_json(rig.session, "anything");
    FAIL("succeeded");
  } catch (const GenerationFailedError& e) {
    CHECK(e.code() == ErrorCode::kGenerationFailed);
    CHECK(e.attempts() == 3);
  }
  CHECK(rig.mock->call_count() == 3);
}

TEST_CASE("provider failure surfaces as ProviderUnavailable") {
  Rig rig(replies("generate_json", {json{{"error", "unavailable"}}}));
  try {
    rig.assistant->generate_json(rig.session, "anything");
    FAIL("succeeded");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kProviderUnavailable);
  }
}

TEST_CASE("XML generation accepts fenced documents") {
  const std::string xml = read_text(fixture("benchmark/responses/gen-02.bpmn"));
  Rig rig(replies("generate_xml", {text("Sure:\n```xml\n" + xml + "```\n")}));
  const BpmnDocument doc = rig.assistant->generate_xml(rig.session, "anything");
  CHECK(doc.graph == import_flow_graph(xml));
}

TEST_CASE("propose_edits applies the proposed calls atomically") {
  const json calls = json::parse(R"([{"function": "delete_element", "arguments": {"element_id": "task2"}}])");
  Rig rig(replies("edit_json", {text(calls.dump())}));
  const EditOutcome outcome = rig.assistant->propose_edits(rig.session, supplier_order(), "Drop the documents step");
  CHECK(outcome.attempts == 1);
  REQUIRE(outcome.ops.size() == 1);
  CHECK(find_element(supplier_order(), "task2").element != nullptr);
  CHECK_THROWS(find_element(outcome.result.model, "task2"));
  CHECK(rig.mock->requests()[0].messages[0].content.find("Drop the documents step") != std::string::npos);
}

TEST_CASE("unknown function names are rejected after the retries") {
  Rig rig(replies("edit_json", {text(R"([{"function": "rename_element", "arguments": {"id": "task1"}}])")}));
  try {
    rig.assistant->propose_edits(rig.session, supplier_order(), "rename");
    FAIL("accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUnparseableFunctionCalls);
  }
  CHECK(rig.mock->call_count() == 3);
}

TEST_CASE("a failing script is retried and then reported with its index") {
  const json bad = json::parse(R"([{"function": "delete_element", "arguments": {"element_id": "ghost"}}])");
  const json good = json::parse(R"([{"function": "delete_element", "arguments": {"element_id": "task2"}}])");
  {
    Rig rig(replies("edit_json", {text(bad.dump()), text(good.dump())}));
    const EditOutcome outcome = rig.assistant->propose_edits(rig.session, supplier_order(), "x");
    CHECK(outcome.attempts == 2);
  }
  {
    Rig rig(replies("edit_json", {text(bad.dump())}));
    try {
      rig.assistant->propose_edits(rig.session, supplier_order(), "x");
      FAIL("accepted");
    } catch (const ScriptFailedError& e) {
      CHECK(e.index() == 0);
      CHECK(e.cause() == ErrorCode::kNotFound);
    }
  }
}

TEST_CASE("direct XML editing") {
  const std::string xml = to_bpmn_xml(supplier_order());

  SUBCASE("a reply that repeats the input is byte-identical") {
    Rig rig(replies("edit_xml", {text(xml)}));
    CHECK(rig.assistant->edit_xml_direct(rig.session, xml, "no changes please").xml_text == xml);
  }

  SUBCASE("renaming touches exactly one label") {
    std::string renamed = xml;
    const std::string from = "name=\"Prepare the documents\"";
    renamed.replace(renamed.find(from), from.size(), "name=\"Prepare the invoice\"");
    Rig rig(replies("edit_xml", {text(renamed)}));
    const FlowGraph before = import_flow_graph(xml);
    const FlowGraph after = rig.assistant->edit_xml_direct(rig.session, xml, "rename").graph;
    REQUIRE(before.nodes.size() == after.nodes.size());
    CHECK(before.edges == after.edges);
    int changed = 0;
    for (std::size_t i = 0; i < before.nodes.size(); ++i) {
      CHECK(before.nodes[i].id == after.nodes[i].id);
      CHECK(before.nodes[i].type == after.nodes[i].type);
      if (before.nodes[i].label != after.nodes[i].label) ++changed;
    }
    CHECK(changed == 1);
  }

  SUBCASE("dangling flows are never accepted") {
    std::string dangling = xml;
    const std::string to = "targetRef=\"end1\"";
    dangling.replace(dangling.find(to), to.size(), "targetRef=\"nowhere\"");
    Rig rig(replies("edit_xml", {text(dangling)}));
    try {
      rig.assistant->edit_xml_direct(rig.session, xml, "break it");
      FAIL("accepted");
    } catch (const GenerationFailedError& e) {
      CHECK(e.attempts() == 3);
      CHECK(e.last_report().has("DanglingFlow"));
    }
  }
}

TEST_CASE("conversational replies come back verbatim with the history attached") {
  Rig rig(json{{"rules", json::array({json{{"purpose", "converse"}, {"echo", true}}})}});
  rig.session.history = {{"user", "hi"}, {"assistant", "hello"}, {"user", "what is a gateway?"}, {"assistant", "a split"}};
  CHECK(rig.assistant->respond_conversational(rig.session, "What is BPMN?") == "What is BPMN?");
  const auto requests = rig.mock->requests();
  REQUIRE(requests.size() == 1);
  CHECK(requests[0].messages.size() == 5);
  CHECK(requests[0].messages.back().content == "What is BPMN?");
}

TEST_CASE("unknown models are refused before any call") {
  Rig rig(replies("generate_json", {text("{}")}));
  rig.session.model_name = "gpt-99";
  try {
    rig.assistant->generate_json(rig.session, "anything");
    FAIL("accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUnknownModel);
  }
  CHECK(rig.mock->call_count() == 0);
}
