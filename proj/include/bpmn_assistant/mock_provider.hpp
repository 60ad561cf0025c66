#pragma once

// Deterministic provider replaying scripted responses.
//
// Script format (JSON):
//   { "rules": [ { "fingerprint": "...", "purpose": "generate_json",
//                  "contains": "substring of the last user message",
//                  "echo": false,
//                  "responses": [ { "text": "..." } | { "json": {...} }
//                               | { "text_file": "relative/path" }
//                               | { "error": "unavailable" }, ... ] } ] }
// A rule matches when every constraint it names holds; fingerprint rules are
// tried first, then the rest in file order. Each rule hands out its
// responses in order and repeats the last one. Responses may also carry
// "latency_ms", "input_tokens" and "output_tokens".

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bpmn_assistant/providers.hpp"

namespace bpmn_assistant {

class MockProvider : public ChatProvider {
 public:
  /// `base_dir` resolves text_file entries.
  explicit MockProvider(const nlohmann::json& script, std::filesystem::path base_dir = {});
  static std::shared_ptr<MockProvider> from_file(const std::filesystem::path& path);
  /// Answers every request with the last user message.
  static std::shared_ptr<MockProvider> echo();

  ProviderResponse complete(const ProviderRequest& request) override;

  std::size_t call_count() const;
  std::vector<ProviderRequest> requests() const;

 private:
  struct Reply {
    std::optional<std::string> text;
    std::optional<std::string> error;
    double latency_ms = 0;
    std::optional<long long> input_tokens;
    std::optional<long long> output_tokens;
  };
  struct Rule {
    std::optional<std::string> fingerprint;
    std::optional<std::string> purpose;
    std::optional<std::string> contains;
    bool echo = false;
    std::vector<Reply> replies;
    std::size_t cursor = 0;
  };

  Rule* match(const ProviderRequest& request, const std::string& fingerprint);

  mutable std::mutex mutex_;
  std::vector<Rule> rules_;
  std::vector<ProviderRequest> log_;
};

}  // namespace bpmn_assistant
