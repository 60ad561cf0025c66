#include "bpmn_assistant/assistant.hpp"

#include <algorithm>

#include "bpmn_assistant/prompts.hpp"
#include "bpmn_assistant/text_util.hpp"

namespace bpmn_assistant {

std::string_view to_string(Intent intent) {
  switch (intent) {
    case Intent::kConversational: return "conversational";
    case Intent::kCreate: return "create";
    case Intent::kEdit: return "edit";
  }
  return "unknown";
}

std::string_view to_string(Modality modality) { return modality == Modality::kJson ? "json" : "xml"; }

std::optional<Modality> modality_from_string(std::string_view text) {
  const std::string lowered = to_lower(trim(text));
  if (lowered == "json") return Modality::kJson;
  if (lowered == "xml") return Modality::kXml;
  return std::nullopt;
}

GenerationFailedError::GenerationFailedError(int attempts, std::string last_diagnostic, ValidationReport last_report)
    : Error(ErrorCode::kGenerationFailed,
            "no valid result after " + std::to_string(attempts) + " attempt(s): " + last_diagnostic),
      attempts_(attempts),
      last_report_(std::move(last_report)) {}

std::string extract_payload(std::string_view reply) {
  const auto fence = reply.find("```");
  if (fence != std::string_view::npos) {
    auto body = reply.find('\n', fence);
    if (body != std::string_view::npos) {
      const auto close = reply.find("```", body + 1);
      if (close != std::string_view::npos) return trim(reply.substr(body + 1, close - body - 1));
    }
  }
  return trim(reply);
}

std::optional<Intent> parse_intent(std::string_view reply) {
  std::string text = extract_payload(reply);
  try {
    const auto doc = nlohmann::json::parse(text);
    if (doc.is_object() && doc.contains("intent") && doc["intent"].is_string()) {
      text = doc["intent"].get<std::string>();
    } else if (doc.is_string()) {
      text = doc.get<std::string>();
    }
  } catch (const nlohmann::json::exception&) {
  }
  const std::string lowered = to_lower(text);
  std::optional<Intent> found;
  int hits = 0;
  for (Intent intent : {Intent::kConversational, Intent::kCreate, Intent::kEdit}) {
    if (lowered.find(to_string(intent)) != std::string::npos) {
      found = intent;
      ++hits;
    }
  }
  if (hits != 1) return std::nullopt;
  return found;
}

namespace {

// Drops prose around a JSON payload when the reply is not pure JSON.
std::string json_payload(std::string_view reply) {
  std::string text = extract_payload(reply);
  if (text.empty() || text.front() == '{' || text.front() == '[') return text;
  const auto begin = text.find_first_of("{[");
  const auto end = text.find_last_of("}]");
  if (begin == std::string::npos || end == std::string::npos || end < begin) return text;
  return text.substr(begin, end - begin + 1);
}

}  // namespace

Assistant::Assistant(std::shared_ptr<ProviderRegistry> providers, AssistantConfig config)
    : providers_(std::move(providers)), config_(config) {
  if (config_.retry_limit < 1) config_.retry_limit = 1;
}

ProviderRequest Assistant::make_request(const Session& session, std::string purpose, std::string system) const {
  ProviderRequest request;
  request.model_name = session.model_name.empty() ? std::string(kMockModel) : session.model_name;
  request.system = std::move(system);
  request.temperature = config_.temperature;
  request.max_output_tokens = config_.max_output_tokens;
  request.purpose = std::move(purpose);
  return request;
}

ProviderResponse Assistant::call(Session& session, ProviderRequest request, int attempt, AttemptRecord** record) {
  auto provider = providers_->for_model(request.model_name);
  AttemptRecord entry;
  entry.purpose = request.purpose;
  entry.attempt = attempt;
  ProviderResponse response;
  try {
    response = provider->complete(request);
  } catch (const Error& e) {
    entry.diagnostic = e.what();
    session.attempts.push_back(std::move(entry));
    throw;
  }
  entry.input_tokens = std::max(0LL, response.input_tokens);
  entry.output_tokens = std::max(0LL, response.output_tokens);
  entry.latency_ms = std::max(0.0, response.latency_ms);
  session.attempts.push_back(std::move(entry));
  if (record) *record = &session.attempts.back();
  return response;
}

Intent Assistant::classify_intent(Session& session, const std::string& message) {
  if (trim(message).empty()) throw Error(ErrorCode::kInvalidRequest, "message is empty");
  ProviderRequest request = make_request(session, "classify", classify_system_prompt(session.has_model()));
  request.messages = session.history;
  request.messages.push_back({"user", message});
  std::string last;
  for (int attempt = 1; attempt <= config_.retry_limit; ++attempt) {
    AttemptRecord* record = nullptr;
    const ProviderResponse response = call(session, request, attempt, &record);
    if (auto intent = parse_intent(response.text)) {
      record->accepted = true;
      return *intent;
    }
    last = response.text;
    record->diagnostic = "unrecognized intent";
  }
  throw Error(ErrorCode::kUnparseableClassification, "could not classify the message; last reply: " + last);
}

ProcessModel Assistant::generate_json(Session& session, const std::string& description) {
  if (trim(description).empty()) throw Error(ErrorCode::kInvalidRequest, "description is empty");
  ProviderRequest request = make_request(session, "generate_json", generate_json_system_prompt());
  request.messages.push_back({"user", generate_user_prompt(description)});
  std::string diagnostic;
  ValidationReport report;
  for (int attempt = 1; attempt <= config_.retry_limit; ++attempt) {
    AttemptRecord* record = nullptr;
    const ProviderResponse response = call(session, request, attempt, &record);
    try {
      ProcessModel model = parse_process(json_payload(response.text));
      report = validate(model);
      if (report.ok()) {
        record->accepted = true;
        return model;
      }
      diagnostic = report.summary();
    } catch (const Error& e) {
      report = {};
      diagnostic = e.what();
    }
    record->diagnostic = diagnostic;
    request.messages.push_back({"assistant", response.text});
    request.messages.push_back({"user", retry_feedback(diagnostic)});
  }
  throw GenerationFailedError(config_.retry_limit, diagnostic, report);
}

namespace {

// Accepts a reply as an XML document if it passes the structural gate.
std::optional<BpmnDocument> accept_xml(const std::string& reply, std::string& diagnostic, ValidationReport& report) {
  std::string text = reply;
  if (!trim(reply).starts_with('<')) {
    text = extract_payload(reply);
    const auto begin = text.find('<');
    const auto end = text.rfind('>');
    if (begin == std::string::npos || end == std::string::npos || end < begin) {
      report = {};
      diagnostic = "the reply contains no XML document";
      return std::nullopt;
    }
    text = text.substr(begin, end - begin + 1) + "\n";
  }
  report = validate_xml_structure(text);
  if (!report.ok()) {
    diagnostic = report.summary();
    return std::nullopt;
  }
  return BpmnDocument::parse(std::move(text));
}

}  // namespace

BpmnDocument Assistant::generate_xml(Session& session, const std::string& description) {
  if (trim(description).empty()) throw Error(ErrorCode::kInvalidRequest, "description is empty");
  ProviderRequest request = make_request(session, "generate_xml", generate_xml_system_prompt());
  request.messages.push_back({"user", generate_user_prompt(description)});
  std::string diagnostic;
  ValidationReport report;
  for (int attempt = 1; attempt <= config_.retry_limit; ++attempt) {
    AttemptRecord* record = nullptr;
    const ProviderResponse response = call(session, request, attempt, &record);
    if (auto doc = accept_xml(response.text, diagnostic, report)) {
      record->accepted = true;
      return std::move(*doc);
    }
    record->diagnostic = diagnostic;
    request.messages.push_back({"assistant", response.text});
    request.messages.push_back({"user", retry_feedback(diagnostic)});
  }
  throw GenerationFailedError(config_.retry_limit, diagnostic, report);
}

CurrentModel Assistant::generate_process(Session& session, const std::string& description, Modality modality) {
  if (modality == Modality::kJson) return generate_json(session, description);
  return generate_xml(session, description);
}

EditOutcome Assistant::propose_edits(Session& session, const ProcessModel& model, const std::string& instruction) {
  if (trim(instruction).empty()) throw Error(ErrorCode::kInvalidRequest, "instruction is empty");
  ProviderRequest request = make_request(session, "edit_json", edit_json_system_prompt());
  request.messages.push_back({"user", edit_json_user_prompt(serialize_process(model), instruction)});
  for (int attempt = 1;; ++attempt) {
    AttemptRecord* record = nullptr;
    const ProviderResponse response = call(session, request, attempt, &record);
    try {
      nlohmann::json calls;
      try {
        calls = nlohmann::json::parse(json_payload(response.text));
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::kUnparseableFunctionCalls, std::string("reply is not JSON: ") + e.what());
      }
      std::vector<EditOp> ops = edit_ops_from_json(calls);
      EditResult result = apply_edit_script(model, ops);
      record->accepted = true;
      return EditOutcome{std::move(ops), std::move(result), attempt};
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kUnparseableFunctionCalls && e.code() != ErrorCode::kScriptFailed) throw;
      record->diagnostic = e.what();
      if (attempt >= config_.retry_limit) throw;
      request.messages.push_back({"assistant", response.text});
      request.messages.push_back({"user", retry_feedback(e.what())});
    }
  }
}

BpmnDocument Assistant::edit_xml_direct(Session& session, const std::string& xml, const std::string& instruction) {
  if (trim(instruction).empty()) throw Error(ErrorCode::kInvalidRequest, "instruction is empty");
  ProviderRequest request = make_request(session, "edit_xml", edit_xml_system_prompt());
  request.messages.push_back({"user", edit_xml_user_prompt(xml, instruction)});
  std::string diagnostic;
  ValidationReport report;
  for (int attempt = 1; attempt <= config_.retry_limit; ++attempt) {
    AttemptRecord* record = nullptr;
    const ProviderResponse response = call(session, request, attempt, &record);
    if (auto doc = accept_xml(response.text, diagnostic, report)) {
      record->accepted = true;
      return std::move(*doc);
    }
    record->diagnostic = diagnostic;
    request.messages.push_back({"assistant", response.text});
    request.messages.push_back({"user", retry_feedback(diagnostic)});
  }
  throw GenerationFailedError(config_.retry_limit, diagnostic, report);
}

std::string Assistant::respond_conversational(Session& session, const std::string& message) {
  ProviderRequest request = make_request(session, "converse", conversational_system_prompt());
  request.messages = session.history;
  request.messages.push_back({"user", message});
  AttemptRecord* record = nullptr;
  ProviderResponse response = call(session, request, 1, &record);
  record->accepted = true;
  return std::move(response.text);
}

}  // namespace bpmn_assistant
