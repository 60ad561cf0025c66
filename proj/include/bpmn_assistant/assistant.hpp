#pragma once

// The LLM loop: intent classification, generation and editing in the JSON
// and XML modalities with validation-driven retries, and session state.

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "bpmn_assistant/edit_engine.hpp"
#include "bpmn_assistant/providers.hpp"
#include "bpmn_assistant/xml_codec.hpp"

namespace bpmn_assistant {

enum class Intent { kConversational, kCreate, kEdit };
enum class Modality { kJson, kXml };

std::string_view to_string(Intent intent);
std::string_view to_string(Modality modality);
std::optional<Modality> modality_from_string(std::string_view text);

/// One provider call.
struct AttemptRecord {
  std::string purpose;
  int attempt = 1;
  long long input_tokens = 0;
  long long output_tokens = 0;
  double latency_ms = 0;
  bool accepted = false;
  std::string diagnostic;
};

using CurrentModel = std::variant<std::monostate, ProcessModel, BpmnDocument>;

struct Session {
  std::string id;
  std::vector<ChatMessage> history;
  CurrentModel current;
  bool read_only = false;  // an uploaded document the IR cannot express
  Modality modality = Modality::kJson;
  std::string model_name;
  std::vector<AttemptRecord> attempts;

  bool has_model() const { return !std::holds_alternative<std::monostate>(current); }
};

class GenerationFailedError : public Error {
 public:
  GenerationFailedError(int attempts, std::string last_diagnostic, ValidationReport last_report = {});

  int attempts() const noexcept { return attempts_; }
  const ValidationReport& last_report() const noexcept { return last_report_; }

 private:
  int attempts_;
  ValidationReport last_report_;
};

struct AssistantConfig {
  int retry_limit = 3;
  double temperature = 0.0;
  int max_output_tokens = 4096;
};

struct EditOutcome {
  std::vector<EditOp> ops;
  EditResult result;
  int attempts = 0;
};

/// Pulls the payload out of a reply: the content of the first fenced code
/// block if there is one, otherwise the trimmed text.
std::string extract_payload(std::string_view reply);
/// Returns nullopt when the reply names none or several intents.
std::optional<Intent> parse_intent(std::string_view reply);

class Assistant {
 public:
  explicit Assistant(std::shared_ptr<ProviderRegistry> providers, AssistantConfig config = {});

  const AssistantConfig& config() const { return config_; }

  /// Throws ProviderUnavailable or UnparseableClassification.
  Intent classify_intent(Session& session, const std::string& message);

  /// Throws GenerationFailed after `retry_limit` invalid replies.
  ProcessModel generate_json(Session& session, const std::string& description);
  BpmnDocument generate_xml(Session& session, const std::string& description);
  CurrentModel generate_process(Session& session, const std::string& description, Modality modality);

  /// Proposes function calls against `model` and applies them atomically.
  /// Throws UnparseableFunctionCalls or ScriptFailed once retries run out.
  EditOutcome propose_edits(Session& session, const ProcessModel& model, const std::string& instruction);

  /// Throws GenerationFailed after `retry_limit` invalid documents.
  BpmnDocument edit_xml_direct(Session& session, const std::string& xml, const std::string& instruction);

  /// Provider text verbatim. The request carries the history plus `message`.
  std::string respond_conversational(Session& session, const std::string& message);

 private:
  ProviderResponse call(Session& session, ProviderRequest request, int attempt, AttemptRecord** record);
  ProviderRequest make_request(const Session& session, std::string purpose, std::string system) const;

  std::shared_ptr<ProviderRegistry> providers_;
  AssistantConfig config_;
};

}  // namespace bpmn_assistant
