#include "bpmn_assistant/providers.hpp"

#include "bpmn_assistant/http_providers.hpp"
#include "bpmn_assistant/text_util.hpp"

namespace bpmn_assistant {

std::string_view to_string(Vendor vendor) {
  switch (vendor) {
    case Vendor::kOpenAI: return "OpenAI";
    case Vendor::kAnthropic: return "Anthropic";
    case Vendor::kGoogle: return "Google";
    case Vendor::kFireworks: return "Fireworks AI";
    case Vendor::kMock: return "Mock";
  }
  return "unknown";
}

const std::vector<ModelInfo>& model_catalog() {
  static const std::vector<ModelInfo> catalog = {
      {"GPT-4o", Vendor::kOpenAI, "gpt-4o", true},
      {"GPT-4o mini", Vendor::kOpenAI, "gpt-4o-mini", true},
      // Reasoning models reject a temperature parameter.
      {"o3-mini", Vendor::kOpenAI, "o3-mini", false},
      {"Claude 3.5 Sonnet", Vendor::kAnthropic, "claude-3-5-sonnet-20241022", true},
      {"Gemini 2.0 Flash", Vendor::kGoogle, "gemini-2.0-flash", true},
      {"Llama 3.3 70B", Vendor::kFireworks, "accounts/fireworks/models/llama-v3p3-70b-instruct", true},
      {"Qwen 2.5 72B", Vendor::kFireworks, "accounts/fireworks/models/qwen2p5-72b-instruct", true},
      {"Deepseek V3", Vendor::kFireworks, "accounts/fireworks/models/deepseek-v3", true},
      {std::string(kMockModel), Vendor::kMock, std::string(kMockModel), true},
  };
  return catalog;
}

const ModelInfo* find_model(std::string_view name) {
  for (const auto& model : model_catalog()) {
    if (model.name == name || model.api_model == name) return &model;
  }
  return nullptr;
}

std::string request_fingerprint(const ProviderRequest& request) {
  // Unit separators keep field boundaries unambiguous.
  std::string material = request.purpose + '\x1f' + request.model_name + '\x1f' + request.system;
  for (const auto& message : request.messages) {
    material += '\x1e';
    material += message.role;
    material += '\x1f';
    material += message.content;
  }
  return fnv1a_hex(material);
}

long long estimate_tokens(std::string_view text) { return static_cast<long long>((text.size() + 3) / 4); }

void ProviderRegistry::set_mock(std::shared_ptr<ChatProvider> mock, bool serve_all_models) {
  std::lock_guard lock(mutex_);
  mock_ = std::move(mock);
  mock_serves_all_ = serve_all_models;
}

void ProviderRegistry::set_provider(Vendor vendor, std::shared_ptr<ChatProvider> provider) {
  std::lock_guard lock(mutex_);
  providers_[vendor] = std::move(provider);
}

bool ProviderRegistry::has_mock() const {
  std::lock_guard lock(mutex_);
  return mock_ != nullptr;
}

std::shared_ptr<ChatProvider> ProviderRegistry::for_model(std::string_view name) {
  const ModelInfo* model = find_model(name);
  if (!model) throw Error(ErrorCode::kUnknownModel, "unknown model '" + std::string(name) + "'");
  std::lock_guard lock(mutex_);
  if (model->vendor == Vendor::kMock || mock_serves_all_) {
    if (!mock_) throw Error(ErrorCode::kProviderUnavailable, "no mock script is configured");
    return mock_;
  }
  auto& slot = providers_[model->vendor];
  if (!slot) slot = std::make_shared<HttpChatProvider>(model->vendor);
  return slot;
}

}  // namespace bpmn_assistant
