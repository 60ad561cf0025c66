#include "bpmn_assistant/service.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "bpmn_assistant/layout.hpp"
#include "bpmn_assistant/text_util.hpp"

using nlohmann::json;

namespace bpmn_assistant {

ErrorPayload to_payload(const std::exception& error) {
  if (const auto* e = dynamic_cast<const Error*>(&error)) return {std::string(to_string(e->code())), e->what()};
  return {"InternalError", error.what()};
}

namespace {

bool valid_session_id(const std::string& id) {
  if (id.empty() || id.size() > 64) return false;
  for (unsigned char c : id) {
    if (!std::isalnum(c) && c != '-' && c != '_') return false;
  }
  return true;
}

std::string with_layout(const std::string& xml) {
  return embed_di(xml, compute_layout(BpmnDocument::parse(xml)));
}

std::string describe(const ProcessModel& model) {
  return "The process has " + std::to_string(element_count(model)) + " elements.";
}

std::string describe(const BpmnDocument& doc) {
  return "The process has " + std::to_string(doc.graph.nodes.size()) + " flow nodes and " +
         std::to_string(doc.graph.edges.size()) + " sequence flows.";
}

}  // namespace

Service::Service(ServiceConfig config, std::shared_ptr<ProviderRegistry> providers)
    : config_(std::move(config)), providers_(std::move(providers)), assistant_(providers_, config_.assistant) {
  if (!find_model(config_.default_model)) {
    throw Error(ErrorCode::kUnknownModel, "unknown default model '" + config_.default_model + "'");
  }
  if (config_.persist_dir) {
    std::filesystem::create_directories(*config_.persist_dir);
    load_persisted();
  }
}

std::string Service::create_session(std::optional<Modality> modality, std::optional<std::string> model) {
  if (model && !find_model(*model)) throw Error(ErrorCode::kUnknownModel, "unknown model '" + *model + "'");
  auto entry = std::make_shared<Entry>();
  entry->session.modality = modality.value_or(config_.default_modality);
  entry->session.model_name = model.value_or(config_.default_model);
  {
    std::lock_guard lock(sessions_mutex_);
    std::string id;
    do {
      char buffer[32];
      std::snprintf(buffer, sizeof buffer, "s%06zu", next_id_++);
      id = buffer;
    } while (sessions_.contains(id));
    entry->session.id = id;
    sessions_[id] = entry;
  }
  persist(*entry);
  return entry->session.id;
}

std::shared_ptr<Service::Entry> Service::find(const std::string& id) const {
  std::lock_guard lock(sessions_mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorCode::kUnknownSession, "unknown session '" + id + "'");
  return it->second;
}

std::shared_ptr<Service::Entry> Service::find_or_create(const std::string& id) {
  if (!valid_session_id(id)) throw Error(ErrorCode::kInvalidRequest, "invalid session id '" + id + "'");
  std::lock_guard lock(sessions_mutex_);
  auto& slot = sessions_[id];
  if (!slot) {
    slot = std::make_shared<Entry>();
    slot->session.id = id;
    slot->session.modality = config_.default_modality;
    slot->session.model_name = config_.default_model;
  }
  return slot;
}

bool Service::has_session(const std::string& id) const {
  std::lock_guard lock(sessions_mutex_);
  return sessions_.contains(id);
}

SessionInfo Service::session_info(const std::string& id) const {
  auto entry = find(id);
  std::lock_guard lock(entry->mutex);
  const Session& s = entry->session;
  return {s.id, s.modality, s.model_name, s.has_model(), s.read_only, s.history.size()};
}

Session Service::snapshot(const std::string& id) const {
  auto entry = find(id);
  std::lock_guard lock(entry->mutex);
  return entry->session;
}

ChatTurnResult Service::handle_chat(const std::string& id, const std::string& message, const EventSink& on_event) {
  ChatTurnResult result;
  auto entry = find_or_create(id);
  std::lock_guard lock(entry->mutex);
  Session& session = entry->session;

  auto status = [&](std::string text) {
    entry->events.push_back(text);
    if (on_event) on_event(text);
    result.status_events.push_back(std::move(text));
  };

  try {
    if (trim(message).empty()) throw Error(ErrorCode::kInvalidRequest, "message is empty");
    status("Understanding your request");
    Intent intent = assistant_.classify_intent(session, message);
    if (intent == Intent::kEdit && !session.has_model()) intent = Intent::kCreate;
    result.intent = intent;

    if (intent == Intent::kConversational) {
      status("Writing an answer");
      result.reply_text = assistant_.respond_conversational(session, message);
      session.history.push_back({"user", message});
      session.history.push_back({"assistant", *result.reply_text});
      status("Done");
      persist(*entry);
      return result;
    }

    CurrentModel updated;
    std::string xml;
    std::string reply;
    if (intent == Intent::kCreate) {
      status(session.modality == Modality::kJson ? "Generating the process model"
                                                 : "Generating BPMN XML");
      updated = assistant_.generate_process(session, message, session.modality);
      reply = "Created the process. ";
    } else if (session.modality == Modality::kJson) {
      ProcessModel current;
      if (const auto* model = std::get_if<ProcessModel>(&session.current)) {
        current = *model;
      } else {
        if (session.read_only) {
          throw Error(ErrorCode::kReadOnlyModel,
                      "the uploaded diagram is not block-structured and can only be viewed; switch to the xml "
                      "modality to edit it directly");
        }
        try {
          current = reconstruct_ir(std::get<BpmnDocument>(session.current).xml_text);
        } catch (const Error& e) {
          throw Error(ErrorCode::kReadOnlyModel, std::string("the current diagram cannot be edited: ") + e.what());
        }
      }
      status("Planning edit operations");
      EditOutcome outcome = assistant_.propose_edits(session, current, message);
      status("Applied " + std::to_string(outcome.ops.size()) + " edit operation(s)");
      updated = std::move(outcome.result.model);
      reply = "Updated the process. ";
    } else {
      status("Editing BPMN XML");
      const std::string& source =
          entry->last_xml.empty() ? std::get<BpmnDocument>(session.current).xml_text : entry->last_xml;
      updated = assistant_.edit_xml_direct(session, source, message);
      reply = "Updated the process. ";
    }

    if (const auto* model = std::get_if<ProcessModel>(&updated)) {
      status("Converting to BPMN XML");
      xml = to_bpmn_xml(*model);
      reply += describe(*model);
    } else {
      xml = std::get<BpmnDocument>(updated).xml_text;
      reply += describe(std::get<BpmnDocument>(updated));
    }
    status("Computing the diagram layout");
    const std::string shown = with_layout(xml);

    session.current = std::move(updated);
    session.read_only = false;
    entry->last_xml = shown;
    session.history.push_back({"user", message});
    session.history.push_back({"assistant", reply});
    result.reply_text = reply;
    result.bpmn_xml = shown;
    status("Done");
  } catch (const std::exception& e) {
    result.error = to_payload(e);
    status("Failed: " + result.error->message);
  }
  persist(*entry);
  return result;
}

UploadResult Service::handle_upload(const std::string& id, std::string_view bytes) {
  auto entry = find(id);
  if (bytes.size() > config_.max_upload_bytes) {
    throw Error(ErrorCode::kTooLarge, "upload of " + std::to_string(bytes.size()) + " bytes exceeds the limit of " +
                                          std::to_string(config_.max_upload_bytes));
  }
  parse_xml(bytes);  // raises MalformedXml

  UploadResult result;
  result.report = validate_xml_structure(bytes);
  if (!result.report.ok()) return result;

  const std::string text(bytes);
  BpmnDocument doc = BpmnDocument::parse(text);
  std::string shown;
  try {
    shown = embed_di(text, compute_layout(doc));
  } catch (const Error& e) {
    result.report.issues.push_back({Severity::kError, std::string(to_string(e.code())), std::nullopt, e.what()});
    return result;
  }

  CurrentModel current;
  try {
    current = reconstruct_ir(text);
    result.editable = true;
  } catch (const Error& e) {
    result.report.issues.push_back({Severity::kWarning, std::string(to_string(e.code())), std::nullopt,
                                    std::string(e.what()) + "; the diagram is read-only"});
    current = std::move(doc);
  }

  std::lock_guard lock(entry->mutex);
  entry->session.current = std::move(current);
  entry->session.read_only = !result.editable;
  entry->last_xml = shown;
  entry->events.push_back(result.editable ? "Uploaded diagram" : "Uploaded diagram (read-only)");
  result.stored = true;
  result.bpmn_xml = shown;
  persist(*entry);
  return result;
}

std::string Service::handle_download(const std::string& id) const {
  auto entry = find(id);
  std::lock_guard lock(entry->mutex);
  if (entry->last_xml.empty()) throw Error(ErrorCode::kNothingToDownload, "the session has no diagram yet");
  return entry->last_xml;
}

std::vector<ModelInfo> Service::list_models() const {
  std::vector<ModelInfo> models;
  for (const auto& model : model_catalog()) {
    if (model.vendor == Vendor::kMock && !providers_->has_mock()) continue;
    models.push_back(model);
  }
  return models;
}

void Service::select_model(const std::string& id, const std::string& name) {
  const ModelInfo* model = find_model(name);
  if (!model) throw Error(ErrorCode::kUnknownModel, "unknown model '" + name + "'");
  auto entry = find(id);
  std::lock_guard lock(entry->mutex);
  entry->session.model_name = model->name;
  persist(*entry);
}

void Service::set_modality(const std::string& id, Modality modality) {
  auto entry = find(id);
  std::lock_guard lock(entry->mutex);
  entry->session.modality = modality;
  persist(*entry);
}

std::vector<std::string> Service::events(const std::string& id, std::size_t since) const {
  auto entry = find(id);
  std::lock_guard lock(entry->mutex);
  if (since >= entry->events.size()) return {};
  return {entry->events.begin() + static_cast<std::ptrdiff_t>(since), entry->events.end()};
}

// One JSON document per session. Called with the entry's mutex held (or
// before the entry is shared).
void Service::persist(const Entry& entry) const {
  if (!config_.persist_dir) return;
  const Session& s = entry.session;
  json doc = {{"id", s.id},
              {"modality", to_string(s.modality)},
              {"model", s.model_name},
              {"read_only", s.read_only},
              {"last_xml", entry.last_xml},
              {"events", entry.events}};
  json history = json::array();
  for (const auto& m : s.history) history.push_back({{"role", m.role}, {"content", m.content}});
  doc["history"] = history;
  if (const auto* model = std::get_if<ProcessModel>(&s.current)) {
    doc["current"] = {{"kind", "ir"}, {"value", json::parse(serialize_process(*model))}};
  } else if (const auto* xml = std::get_if<BpmnDocument>(&s.current)) {
    doc["current"] = {{"kind", "xml"}, {"value", xml->xml_text}};
  } else {
    doc["current"] = {{"kind", "none"}};
  }
  const auto path = *config_.persist_dir / (s.id + ".json");
  const auto temp = *config_.persist_dir / (s.id + ".json.tmp");
  {
    std::ofstream out(temp, std::ios::binary);
    out << doc.dump(2);
  }
  std::filesystem::rename(temp, path);
}

void Service::load_persisted() {
  for (const auto& file : std::filesystem::directory_iterator(*config_.persist_dir)) {
    if (file.path().extension() != ".json") continue;
    std::ifstream in(file.path(), std::ios::binary);
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
      const json doc = json::parse(buffer.str());
      auto entry = std::make_shared<Entry>();
      Session& s = entry->session;
      s.id = doc.at("id").get<std::string>();
      if (!valid_session_id(s.id)) continue;
      s.modality = modality_from_string(doc.value("modality", "json")).value_or(config_.default_modality);
      s.model_name = doc.value("model", config_.default_model);
      if (!find_model(s.model_name)) s.model_name = config_.default_model;
      s.read_only = doc.value("read_only", false);
      entry->last_xml = doc.value("last_xml", "");
      entry->events = doc.value("events", std::vector<std::string>{});
      for (const auto& m : doc.value("history", json::array())) {
        s.history.push_back({m.at("role").get<std::string>(), m.at("content").get<std::string>()});
      }
      const json current = doc.value("current", json::object());
      const std::string kind = current.value("kind", "none");
      if (kind == "ir") s.current = process_from_json(current.at("value"));
      if (kind == "xml") s.current = BpmnDocument::parse(current.at("value").get<std::string>());
      sessions_[s.id] = entry;
    } catch (const std::exception&) {
      // Unreadable session files are skipped; the rest still load.
    }
  }
}

}  // namespace bpmn_assistant
