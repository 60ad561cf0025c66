#include "bpmn_assistant/mock_provider.hpp"

#include <fstream>
#include <sstream>

namespace bpmn_assistant {

namespace {

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kInvalidRequest, "cannot read mock response file " + path.string());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

const std::string& last_user_message(const ProviderRequest& request) {
  static const std::string empty;
  for (auto it = request.messages.rbegin(); it != request.messages.rend(); ++it) {
    if (it->role == "user") return it->content;
  }
  return empty;
}

}  // namespace

MockProvider::MockProvider(const nlohmann::json& script, std::filesystem::path base_dir) {
  const nlohmann::json* rules = &script;
  if (script.is_object()) {
    if (!script.contains("rules")) throw Error(ErrorCode::kInvalidRequest, "mock script has no 'rules' array");
    rules = &script.at("rules");
  }
  if (!rules->is_array()) throw Error(ErrorCode::kInvalidRequest, "mock script rules must be an array");

  for (const auto& entry : *rules) {
    Rule rule;
    if (entry.contains("fingerprint")) rule.fingerprint = entry.at("fingerprint").get<std::string>();
    if (entry.contains("purpose")) rule.purpose = entry.at("purpose").get<std::string>();
    if (entry.contains("contains")) rule.contains = entry.at("contains").get<std::string>();
    rule.echo = entry.value("echo", false);
    for (const auto& response : entry.value("responses", nlohmann::json::array())) {
      Reply reply;
      if (response.contains("text")) reply.text = response.at("text").get<std::string>();
      if (response.contains("json")) reply.text = response.at("json").dump(2);
      if (response.contains("text_file")) reply.text = read_text(base_dir / response.at("text_file").get<std::string>());
      if (response.contains("error")) reply.error = response.at("error").get<std::string>();
      reply.latency_ms = response.value("latency_ms", 0.0);
      if (response.contains("input_tokens")) reply.input_tokens = response.at("input_tokens").get<long long>();
      if (response.contains("output_tokens")) reply.output_tokens = response.at("output_tokens").get<long long>();
      if (!reply.text && !reply.error) throw Error(ErrorCode::kInvalidRequest, "mock response needs text or error");
      rule.replies.push_back(std::move(reply));
    }
    if (rule.replies.empty() && !rule.echo) throw Error(ErrorCode::kInvalidRequest, "mock rule has no responses");
    rules_.push_back(std::move(rule));
  }
}

std::shared_ptr<MockProvider> MockProvider::from_file(const std::filesystem::path& path) {
  nlohmann::json script;
  try {
    script = nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidRequest, "mock script " + path.string() + " is not valid JSON: " + e.what());
  }
  return std::make_shared<MockProvider>(script, path.parent_path());
}

std::shared_ptr<MockProvider> MockProvider::echo() {
  return std::make_shared<MockProvider>(nlohmann::json{{"rules", {{{"echo", true}}}}});
}

MockProvider::Rule* MockProvider::match(const ProviderRequest& request, const std::string& fingerprint) {
  for (auto& rule : rules_) {
    if (rule.fingerprint && *rule.fingerprint == fingerprint) return &rule;
  }
  const std::string& message = last_user_message(request);
  for (auto& rule : rules_) {
    if (rule.fingerprint) continue;
    if (rule.purpose && *rule.purpose != request.purpose) continue;
    if (rule.contains && message.find(*rule.contains) == std::string::npos) continue;
    return &rule;
  }
  return nullptr;
}

ProviderResponse MockProvider::complete(const ProviderRequest& request) {
  std::lock_guard lock(mutex_);
  log_.push_back(request);
  const std::string fingerprint = request_fingerprint(request);
  Rule* rule = match(request, fingerprint);
  if (!rule) {
    throw Error(ErrorCode::kProviderUnavailable,
                "mock script has no response for purpose '" + request.purpose + "' (fingerprint " + fingerprint + ")");
  }

  ProviderResponse response;
  long long input = estimate_tokens(request.system);
  for (const auto& message : request.messages) input += estimate_tokens(message.content);
  response.input_tokens = input;

  if (rule->echo && rule->replies.empty()) {
    response.text = last_user_message(request);
    response.output_tokens = estimate_tokens(response.text);
    return response;
  }
  const Reply& reply = rule->replies[std::min(rule->cursor, rule->replies.size() - 1)];
  ++rule->cursor;
  if (reply.error) throw Error(ErrorCode::kProviderUnavailable, "mock provider: " + *reply.error);
  response.text = rule->echo ? last_user_message(request) : *reply.text;
  response.latency_ms = reply.latency_ms;
  response.output_tokens = reply.output_tokens.value_or(estimate_tokens(response.text));
  if (reply.input_tokens) response.input_tokens = *reply.input_tokens;
  return response;
}

std::size_t MockProvider::call_count() const {
  std::lock_guard lock(mutex_);
  return log_.size();
}

std::vector<ProviderRequest> MockProvider::requests() const {
  std::lock_guard lock(mutex_);
  return log_;
}

}  // namespace bpmn_assistant
