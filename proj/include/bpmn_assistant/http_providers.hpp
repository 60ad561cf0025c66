#pragma once

// Adapters for the vendor chat APIs. Request building and response parsing
// are exposed separately so they can be checked without a network.

#include <chrono>
#include <string>

#include <nlohmann/json.hpp>

#include "bpmn_assistant/providers.hpp"

namespace bpmn_assistant {

struct HttpEndpoint {
  std::string host;  // scheme://host[:port]
  std::string path;
  std::string api_key_env;
};

HttpEndpoint default_endpoint(Vendor vendor, const ModelInfo& model);

nlohmann::json build_request_body(Vendor vendor, const ModelInfo& model, const ProviderRequest& request);

/// Throws ProviderUnavailable when the body lacks the expected fields.
ProviderResponse parse_response_body(Vendor vendor, const nlohmann::json& body);

class HttpChatProvider : public ChatProvider {
 public:
  explicit HttpChatProvider(Vendor vendor, std::chrono::seconds timeout = std::chrono::seconds(120));

  ProviderResponse complete(const ProviderRequest& request) override;

 private:
  Vendor vendor_;
  std::chrono::seconds timeout_;
};

}  // namespace bpmn_assistant
