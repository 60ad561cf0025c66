#include "bpmn_assistant/http_providers.hpp"

#include <httplib.h>

#include <cstdlib>

using nlohmann::json;

namespace bpmn_assistant {

HttpEndpoint default_endpoint(Vendor vendor, const ModelInfo& model) {
  switch (vendor) {
    case Vendor::kOpenAI: return {"https://api.openai.com", "/v1/chat/completions", "OPENAI_API_KEY"};
    case Vendor::kAnthropic: return {"https://api.anthropic.com", "/v1/messages", "ANTHROPIC_API_KEY"};
    case Vendor::kGoogle:
      return {"https://generativelanguage.googleapis.com", "/v1beta/models/" + model.api_model + ":generateContent",
              "GOOGLE_API_KEY"};
    case Vendor::kFireworks:
      return {"https://api.fireworks.ai", "/inference/v1/chat/completions", "FIREWORKS_API_KEY"};
    case Vendor::kMock: break;
  }
  throw Error(ErrorCode::kProviderUnavailable, "the mock model has no HTTP endpoint");
}

json build_request_body(Vendor vendor, const ModelInfo& model, const ProviderRequest& request) {
  const bool temperature = request.temperature && model.supports_temperature;
  switch (vendor) {
    case Vendor::kOpenAI:
    case Vendor::kFireworks: {
      json messages = json::array();
      if (!request.system.empty()) messages.push_back({{"role", "system"}, {"content", request.system}});
      for (const auto& m : request.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
      json body = {{"model", model.api_model}, {"messages", messages}};
      if (model.supports_temperature) {
        body["max_tokens"] = request.max_output_tokens;
      } else {
        body["max_completion_tokens"] = request.max_output_tokens;
      }
      if (temperature) body["temperature"] = *request.temperature;
      return body;
    }
    case Vendor::kAnthropic: {
      json messages = json::array();
      for (const auto& m : request.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
      json body = {{"model", model.api_model}, {"max_tokens", request.max_output_tokens}, {"messages", messages}};
      if (!request.system.empty()) body["system"] = request.system;
      if (temperature) body["temperature"] = *request.temperature;
      return body;
    }
    case Vendor::kGoogle: {
      json contents = json::array();
      for (const auto& m : request.messages) {
        contents.push_back({{"role", m.role == "assistant" ? "model" : "user"}, {"parts", {{{"text", m.content}}}}});
      }
      json config = {{"maxOutputTokens", request.max_output_tokens}};
      if (temperature) config["temperature"] = *request.temperature;
      json body = {{"contents", contents}, {"generationConfig", config}};
      if (!request.system.empty()) body["systemInstruction"] = {{"parts", {{{"text", request.system}}}}};
      return body;
    }
    case Vendor::kMock: break;
  }
  throw Error(ErrorCode::kProviderUnavailable, "the mock model has no HTTP request format");
}

ProviderResponse parse_response_body(Vendor vendor, const json& body) {
  ProviderResponse out;
  try {
    switch (vendor) {
      case Vendor::kOpenAI:
      case Vendor::kFireworks:
        out.text = body.at("choices").at(0).at("message").at("content").get<std::string>();
        if (body.contains("usage")) {
          out.input_tokens = body["usage"].value("prompt_tokens", 0LL);
          out.output_tokens = body["usage"].value("completion_tokens", 0LL);
        }
        return out;
      case Vendor::kAnthropic:
        for (const auto& block : body.at("content")) {
          if (block.value("type", "") == "text") out.text += block.at("text").get<std::string>();
        }
        if (body.contains("usage")) {
          out.input_tokens = body["usage"].value("input_tokens", 0LL);
          out.output_tokens = body["usage"].value("output_tokens", 0LL);
        }
        return out;
      case Vendor::kGoogle:
        for (const auto& part : body.at("candidates").at(0).at("content").at("parts")) {
          out.text += part.value("text", "");
        }
        if (body.contains("usageMetadata")) {
          out.input_tokens = body["usageMetadata"].value("promptTokenCount", 0LL);
          out.output_tokens = body["usageMetadata"].value("candidatesTokenCount", 0LL);
        }
        return out;
      case Vendor::kMock: break;
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kProviderUnavailable, std::string("unexpected provider response: ") + e.what());
  }
  throw Error(ErrorCode::kProviderUnavailable, "the mock model has no HTTP response format");
}

HttpChatProvider::HttpChatProvider(Vendor vendor, std::chrono::seconds timeout) : vendor_(vendor), timeout_(timeout) {}

ProviderResponse HttpChatProvider::complete(const ProviderRequest& request) {
  const ModelInfo* model = find_model(request.model_name);
  if (!model || model->vendor != vendor_) {
    throw Error(ErrorCode::kUnknownModel, "model '" + request.model_name + "' is not served by " +
                                              std::string(to_string(vendor_)));
  }
  HttpEndpoint endpoint = default_endpoint(vendor_, *model);
  const char* key = std::getenv(endpoint.api_key_env.c_str());
  if (vendor_ == Vendor::kGoogle && (!key || !*key)) key = std::getenv("GEMINI_API_KEY");
  if (!key || !*key) {
    throw Error(ErrorCode::kProviderUnavailable, endpoint.api_key_env + " is not set");
  }

  httplib::Headers headers;
  std::string path = endpoint.path;
  switch (vendor_) {
    case Vendor::kAnthropic:
      headers.emplace("x-api-key", key);
      headers.emplace("anthropic-version", "2023-06-01");
      break;
    case Vendor::kGoogle:
      headers.emplace("x-goog-api-key", key);
      break;
    default:
      headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  httplib::Client client(endpoint.host);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  client.set_write_timeout(timeout_);

  const std::string body = build_request_body(vendor_, *model, request).dump();
  const auto started = std::chrono::steady_clock::now();
  auto result = client.Post(path, headers, body, "application/json");
  const auto elapsed = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started);
  if (!result) {
    throw Error(ErrorCode::kProviderUnavailable,
                std::string(to_string(vendor_)) + " request failed: " + httplib::to_string(result.error()));
  }
  if (result->status < 200 || result->status >= 300) {
    throw Error(ErrorCode::kProviderUnavailable, std::string(to_string(vendor_)) + " returned HTTP " +
                                                     std::to_string(result->status) + ": " + result->body.substr(0, 500));
  }
  json parsed;
  try {
    parsed = json::parse(result->body);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kProviderUnavailable, std::string("provider returned non-JSON: ") + e.what());
  }
  ProviderResponse response = parse_response_body(vendor_, parsed);
  response.latency_ms = elapsed.count();
  return response;
}

}  // namespace bpmn_assistant
