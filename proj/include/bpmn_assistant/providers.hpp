#pragma once

// Chat-completion provider abstraction, the model catalog, and routing from
// model names to provider instances.

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bpmn_assistant/error.hpp"

namespace bpmn_assistant {

struct ChatMessage {
  std::string role;  // "user" or "assistant"
  std::string content;

  bool operator==(const ChatMessage&) const = default;
};

struct ProviderRequest {
  std::string model_name;
  std::string system;  // instructions; sent in each API's system slot
  std::vector<ChatMessage> messages;
  std::optional<double> temperature;
  int max_output_tokens = 4096;
  std::string purpose;  // classify, generate_json, generate_xml, edit_json, edit_xml, converse
};

struct ProviderResponse {
  std::string text;
  long long input_tokens = 0;
  long long output_tokens = 0;
  double latency_ms = 0;
};

class ChatProvider {
 public:
  virtual ~ChatProvider() = default;
  /// Throws Error(kProviderUnavailable) on transport or API failure.
  virtual ProviderResponse complete(const ProviderRequest& request) = 0;
};

enum class Vendor { kOpenAI, kAnthropic, kGoogle, kFireworks, kMock };

std::string_view to_string(Vendor vendor);

struct ModelInfo {
  std::string name;       // display name, e.g. "GPT-4o mini"
  Vendor vendor;
  std::string api_model;  // identifier sent to the vendor API
  bool supports_temperature = true;
};

/// The supported models followed by "mock".
const std::vector<ModelInfo>& model_catalog();
const ModelInfo* find_model(std::string_view name);

inline constexpr std::string_view kMockModel = "mock";

/// Stable hash of purpose, model, system prompt and messages; mock scripts
/// key responses on it.
std::string request_fingerprint(const ProviderRequest& request);

/// Rough token estimate (4 characters per token, rounded up).
long long estimate_tokens(std::string_view text);

/// Resolves model names to providers. HTTP adapters are created on first use
/// and shared across sessions.
class ProviderRegistry {
 public:
  ProviderRegistry() = default;

  void set_mock(std::shared_ptr<ChatProvider> mock, bool serve_all_models = false);
  void set_provider(Vendor vendor, std::shared_ptr<ChatProvider> provider);
  bool has_mock() const;

  /// Throws UnknownModel for names outside the catalog.
  std::shared_ptr<ChatProvider> for_model(std::string_view name);

 private:
  mutable std::mutex mutex_;
  std::shared_ptr<ChatProvider> mock_;
  bool mock_serves_all_ = false;
  std::map<Vendor, std::shared_ptr<ChatProvider>> providers_;
};

}  // namespace bpmn_assistant
