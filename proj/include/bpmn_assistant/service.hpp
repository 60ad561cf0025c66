#pragma once

// Session-level pipeline behind the HTTP API: chat turns (classify, then
// generate, edit or answer, then lay out), uploads, downloads and model
// selection. Requests on one session are serialized; sessions are isolated.

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "bpmn_assistant/assistant.hpp"

namespace bpmn_assistant {

struct ErrorPayload {
  std::string code;
  std::string message;
};

struct ChatTurnResult {
  std::optional<Intent> intent;
  std::optional<std::string> reply_text;
  std::optional<std::string> bpmn_xml;  // DI-enriched
  std::vector<std::string> status_events;
  std::optional<ErrorPayload> error;

  bool ok() const { return !error.has_value(); }
};

struct UploadResult {
  ValidationReport report;
  bool stored = false;
  bool editable = false;
  std::optional<std::string> bpmn_xml;
};

struct SessionInfo {
  std::string id;
  Modality modality = Modality::kJson;
  std::string model_name;
  bool has_model = false;
  bool read_only = false;
  std::size_t history_length = 0;
};

struct ServiceConfig {
  std::string default_model = std::string(kMockModel);
  Modality default_modality = Modality::kJson;
  std::size_t max_upload_bytes = 5 * 1024 * 1024;
  std::optional<std::filesystem::path> persist_dir;
  AssistantConfig assistant;
};

ErrorPayload to_payload(const std::exception& error);

class Service {
 public:
  using EventSink = std::function<void(const std::string&)>;

  Service(ServiceConfig config, std::shared_ptr<ProviderRegistry> providers);

  const ServiceConfig& config() const { return config_; }

  /// Throws UnknownModel for an unknown model name.
  std::string create_session(std::optional<Modality> modality = std::nullopt,
                             std::optional<std::string> model = std::nullopt);
  bool has_session(const std::string& id) const;
  SessionInfo session_info(const std::string& id) const;

  /// Creates the session on first use. Failures come back as result.error
  /// and leave the session's model untouched.
  ChatTurnResult handle_chat(const std::string& id, const std::string& message, const EventSink& on_event = {});

  /// Throws MalformedXml, TooLarge or UnknownSession.
  UploadResult handle_upload(const std::string& id, std::string_view bytes);

  /// The bytes of the last visualization. Throws NothingToDownload.
  std::string handle_download(const std::string& id) const;

  std::vector<ModelInfo> list_models() const;
  void select_model(const std::string& id, const std::string& name);
  void set_modality(const std::string& id, Modality modality);

  /// Status events of the session from index `since` on.
  std::vector<std::string> events(const std::string& id, std::size_t since = 0) const;

  /// Copy of the session state, for inspection.
  Session snapshot(const std::string& id) const;

 private:
  struct Entry {
    mutable std::mutex mutex;
    Session session;
    std::string last_xml;
    std::vector<std::string> events;
  };

  std::shared_ptr<Entry> find(const std::string& id) const;
  std::shared_ptr<Entry> find_or_create(const std::string& id);
  void persist(const Entry& entry) const;
  void load_persisted();

  ServiceConfig config_;
  std::shared_ptr<ProviderRegistry> providers_;
  Assistant assistant_;
  mutable std::mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::size_t next_id_ = 1;
};

}  // namespace bpmn_assistant
