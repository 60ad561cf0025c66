#include "bpmn_assistant/process_ir.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "bpmn_assistant/flow_compiler.hpp"

namespace bpmn_assistant {

using nlohmann::json;

std::string_view to_string(ElementType type) {
  switch (type) {
    case ElementType::kTask: return "task";
    case ElementType::kUserTask: return "userTask";
    case ElementType::kServiceTask: return "serviceTask";
    case ElementType::kStartEvent: return "startEvent";
    case ElementType::kEndEvent: return "endEvent";
    case ElementType::kExclusiveGateway: return "exclusiveGateway";
    case ElementType::kParallelGateway: return "parallelGateway";
  }
  return "task";
}

std::optional<ElementType> element_type_from_string(std::string_view name) {
  static const std::pair<std::string_view, ElementType> kTypes[] = {
      {"task", ElementType::kTask},
      {"userTask", ElementType::kUserTask},
      {"serviceTask", ElementType::kServiceTask},
      {"startEvent", ElementType::kStartEvent},
      {"endEvent", ElementType::kEndEvent},
      {"exclusiveGateway", ElementType::kExclusiveGateway},
      {"parallelGateway", ElementType::kParallelGateway},
  };
  for (const auto& [text, type] : kTypes) {
    if (text == name) return type;
  }
  return std::nullopt;
}

bool is_task_type(ElementType type) {
  return type == ElementType::kTask || type == ElementType::kUserTask ||
         type == ElementType::kServiceTask;
}

bool is_event_type(ElementType type) {
  return type == ElementType::kStartEvent || type == ElementType::kEndEvent;
}

bool is_gateway_type(ElementType type) {
  return type == ElementType::kExclusiveGateway || type == ElementType::kParallelGateway;
}

const std::string& Element::id() const {
  return std::visit([](const auto& e) -> const std::string& { return e.id; }, node);
}

ElementType Element::type() const {
  struct {
    ElementType operator()(const Task& t) const { return t.type; }
    ElementType operator()(const Event& e) const { return e.type; }
    ElementType operator()(const ExclusiveGateway&) const { return ElementType::kExclusiveGateway; }
    ElementType operator()(const ParallelGateway&) const { return ElementType::kParallelGateway; }
  } visitor;
  return std::visit(visitor, node);
}

Element make_task(std::string id, std::string label, ElementType type) {
  return Task{type, std::move(id), std::move(label)};
}

Element make_start(std::string id, std::optional<std::string> label) {
  return Event{ElementType::kStartEvent, std::move(id), std::move(label)};
}

Element make_end(std::string id, std::optional<std::string> label) {
  return Event{ElementType::kEndEvent, std::move(id), std::move(label)};
}

// ---------------------------------------------------------------------------
// Traversal

void for_each_element(const Sequence& sequence, const std::function<void(const Element&)>& visit) {
  for (const auto& element : sequence) {
    visit(element);
    if (const auto* x = std::get_if<ExclusiveGateway>(&element.node)) {
      for (const auto& branch : x->branches) for_each_element(branch.path, visit);
    } else if (const auto* p = std::get_if<ParallelGateway>(&element.node)) {
      for (const auto& branch : p->branches) for_each_element(branch, visit);
    }
  }
}

void for_each_element(const ProcessModel& model, const std::function<void(const Element&)>& visit) {
  for_each_element(model.process, visit);
}

std::vector<std::string> collect_ids(const Element& element) {
  std::vector<std::string> ids;
  for_each_element(Sequence{element}, [&](const Element& e) { ids.push_back(e.id()); });
  return ids;
}

std::vector<std::string> collect_ids(const ProcessModel& model) {
  std::vector<std::string> ids;
  for_each_element(model, [&](const Element& e) { ids.push_back(e.id()); });
  return ids;
}

std::size_t element_count(const ProcessModel& model) {
  std::size_t count = 0;
  for_each_element(model, [&](const Element&) { ++count; });
  return count;
}

namespace {

bool locate_in(const Sequence& sequence, std::string_view id, std::vector<BranchStep>& steps,
               LocatedElement& found) {
  for (std::size_t i = 0; i < sequence.size(); ++i) {
    const Element& element = sequence[i];
    if (element.id() == id) {
      found.element = &element;
      found.location = {steps, i};
      return true;
    }
    if (const auto* x = std::get_if<ExclusiveGateway>(&element.node)) {
      for (std::size_t b = 0; b < x->branches.size(); ++b) {
        steps.push_back({i, b});
        if (locate_in(x->branches[b].path, id, steps, found)) return true;
        steps.pop_back();
      }
    } else if (const auto* p = std::get_if<ParallelGateway>(&element.node)) {
      for (std::size_t b = 0; b < p->branches.size(); ++b) {
        steps.push_back({i, b});
        if (locate_in(p->branches[b], id, steps, found)) return true;
        steps.pop_back();
      }
    }
  }
  return false;
}

template <class Seq>
Seq& step_into(Seq& sequence, const BranchStep& step) {
  auto& element = sequence.at(step.element_index);
  if (auto* x = std::get_if<ExclusiveGateway>(&element.node)) return x->branches.at(step.branch_index).path;
  if (auto* p = std::get_if<ParallelGateway>(&element.node)) return p->branches.at(step.branch_index);
  throw Error(ErrorCode::kNotFound, "element '" + element.id() + "' has no branches");
}

}  // namespace

std::optional<LocatedElement> locate(const ProcessModel& model, std::string_view id) {
  std::vector<BranchStep> steps;
  LocatedElement found;
  if (locate_in(model.process, id, steps, found)) return found;
  return std::nullopt;
}

LocatedElement find_element(const ProcessModel& model, std::string_view id) {
  auto found = locate(model, id);
  if (!found) throw Error(ErrorCode::kNotFound, "element '" + std::string(id) + "' not found");
  return *found;
}

const Sequence& sequence_at(const ProcessModel& model, const std::vector<BranchStep>& steps) {
  const Sequence* sequence = &model.process;
  for (const auto& step : steps) sequence = &step_into(*sequence, step);
  return *sequence;
}

Sequence& sequence_at(ProcessModel& model, const std::vector<BranchStep>& steps) {
  Sequence* sequence = &model.process;
  for (const auto& step : steps) sequence = &step_into(*sequence, step);
  return *sequence;
}

// ---------------------------------------------------------------------------
// Validation

bool ValidationReport::ok() const { return error_count() == 0; }

std::size_t ValidationReport::error_count() const {
  return static_cast<std::size_t>(std::count_if(issues.begin(), issues.end(), [](const Issue& issue) {
    return issue.severity == Severity::kError;
  }));
}

bool ValidationReport::has(std::string_view code) const {
  return std::any_of(issues.begin(), issues.end(), [&](const Issue& i) { return i.code == code; });
}

bool ValidationReport::has(std::string_view code, std::string_view element_id) const {
  return std::any_of(issues.begin(), issues.end(), [&](const Issue& i) {
    return i.code == code && i.element_id && *i.element_id == element_id;
  });
}

std::string ValidationReport::summary(bool include_warnings) const {
  std::ostringstream out;
  for (const auto& issue : issues) {
    if (issue.severity == Severity::kWarning && !include_warnings) continue;
    out << (issue.severity == Severity::kError ? "error " : "warning ") << issue.code;
    if (issue.element_id) out << " [" << *issue.element_id << "]";
    out << ": " << issue.message << "\n";
  }
  return out.str();
}

ordered_json report_to_json(const ValidationReport& report) {
  ordered_json issues = ordered_json::array();
  for (const auto& issue : report.issues) {
    ordered_json entry;
    entry["severity"] = issue.severity == Severity::kError ? "error" : "warning";
    entry["code"] = issue.code;
    if (issue.element_id) entry["element_id"] = *issue.element_id;
    entry["message"] = issue.message;
    issues.push_back(std::move(entry));
  }
  ordered_json out;
  out["ok"] = report.ok();
  out["issues"] = std::move(issues);
  return out;
}

ValidationError::ValidationError(ErrorCode code, ValidationReport report)
    : Error(code, std::string(to_string(code)) + ":\n" + report.summary()), report_(std::move(report)) {}

namespace {

bool blank(std::string_view text) {
  return std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); });
}

class Validator {
 public:
  explicit Validator(const ProcessModel& model) : model_(model) {}

  ValidationReport run() {
    for (const auto& id : collect_ids(model_)) ++id_counts_[id];
    for_each_element(model_, [&](const Element& e) { types_.emplace(e.id(), e.type()); });

    check_top_level();
    check_sequence(model_.process, true);

    std::set<std::string> reported;
    for (const auto& id : collect_ids(model_)) {
      if (id_counts_[id] > 1 && reported.insert(id).second) {
        error("DuplicateId", id, "id '" + id + "' is used by " + std::to_string(id_counts_[id]) + " elements");
      }
    }
    if (!report_.has("DuplicateId")) check_flows();
    return std::move(report_);
  }

 private:
  void error(std::string code, std::optional<std::string> id, std::string message) {
    report_.issues.push_back({Severity::kError, std::move(code), std::move(id), std::move(message)});
  }
  void warning(std::string code, std::optional<std::string> id, std::string message) {
    report_.issues.push_back({Severity::kWarning, std::move(code), std::move(id), std::move(message)});
  }

  void check_top_level() {
    const auto& top = model_.process;
    bool has_start = false;
    bool has_end = false;
    for (const auto& e : top) {
      has_start |= e.type() == ElementType::kStartEvent;
      has_end |= e.type() == ElementType::kEndEvent;
    }
    if (!has_start) error("MissingStart", std::nullopt, "top-level sequence has no startEvent");
    if (!has_end) error("MissingEnd", std::nullopt, "top-level sequence has no endEvent");
    if (top.empty() || top.front().type() != ElementType::kStartEvent) {
      error("NotStartingWithStart", std::nullopt, "top-level sequence must begin with a startEvent");
    }
  }

  void check_id(const std::string& id) {
    if (id.empty()) {
      error("EmptyId", std::nullopt, "element id is empty");
      return;
    }
    if (std::any_of(id.begin(), id.end(), [](unsigned char c) { return std::isspace(c); })) {
      error("InvalidId", id, "id '" + id + "' contains whitespace");
    }
    if (id.find(kJoinSuffix) != std::string::npos) {
      error("ReservedId", id, "id '" + id + "' contains the reserved '-join' suffix");
    }
  }

  void check_sequence(const Sequence& sequence, bool top_level) {
    for (std::size_t i = 0; i < sequence.size(); ++i) {
      const Element& element = sequence[i];
      const std::string& id = element.id();
      check_id(id);
      const ElementType type = element.type();
      if (type == ElementType::kStartEvent && !(top_level && i == 0)) {
        error("MisplacedStart", id, "startEvent '" + id + "' must be the first top-level element");
      }
      if (type == ElementType::kEndEvent && i + 1 != sequence.size()) {
        error("ElementAfterEnd", id, "endEvent '" + id + "' is followed by further elements");
      }
      if (const auto* task = std::get_if<Task>(&element.node)) {
        if (blank(task->label)) error("EmptyLabel", id, "task '" + id + "' has an empty label");
      } else if (const auto* x = std::get_if<ExclusiveGateway>(&element.node)) {
        check_exclusive(*x);
      } else if (const auto* p = std::get_if<ParallelGateway>(&element.node)) {
        if (p->branches.size() < 2) {
          error("TooFewBranches", id, "parallel gateway '" + id + "' needs at least 2 branches");
        }
        for (std::size_t b = 0; b < p->branches.size(); ++b) {
          if (p->branches[b].empty()) {
            error("EmptyParallelBranch", id,
                  "branch " + std::to_string(b + 1) + " of parallel gateway '" + id + "' is empty");
          }
          check_sequence(p->branches[b], false);
        }
      }
    }
  }

  void check_exclusive(const ExclusiveGateway& gateway) {
    const std::string& id = gateway.id;
    if (gateway.branches.size() < 2) {
      error("TooFewBranches", id, "exclusive gateway '" + id + "' needs at least 2 branches");
    }
    if (!gateway.label || blank(*gateway.label)) {
      warning("MissingGatewayLabel", id, "exclusive gateway '" + id + "' has no label");
    }
    for (const auto& branch : gateway.branches) {
      if (blank(branch.condition)) {
        error("EmptyCondition", id, "a branch of gateway '" + id + "' has an empty condition");
      }
      if (branch.next) {
        auto it = types_.find(*branch.next);
        if (it == types_.end()) {
          error("DanglingNext", *branch.next, "branch next '" + *branch.next + "' names no element");
        } else if (it->second == ElementType::kStartEvent) {
          error("NextTargetsStart", *branch.next, "branch next may not target startEvent '" + *branch.next + "'");
        }
      }
      check_sequence(branch.path, false);
    }
  }

  void check_flows() {
    const CompiledProcess compiled = compile_flows(model_);
    std::set<std::string> stranded(compiled.stranded_parallel_joins.begin(),
                                   compiled.stranded_parallel_joins.end());
    std::map<std::string, std::string> origin;
    for (const auto& node : compiled.nodes) origin[node.id] = node.origin;

    for (const auto& join : compiled.stranded_parallel_joins) {
      error("ParallelGatewayAtEnd", origin[join],
            "parallel gateway '" + origin[join] + "' ends a sequence, so its join has no successor");
    }
    for (const auto& source : compiled.open_exits) {
      if (stranded.contains(source)) continue;
      error("OpenEnd", origin[source], "'" + origin[source] + "' has no successor and is not an endEvent");
    }
    for (const auto& gateway : compiled.unterminated_gateways) {
      error("UnterminatedBranch", gateway,
            "gateway '" + gateway + "' has has_join=false but a branch neither ends in an endEvent nor sets next");
    }

    if (model_.process.empty() || model_.process.front().type() != ElementType::kStartEvent) return;
    std::unordered_map<std::string, std::vector<std::string>> successors;
    for (const auto& flow : compiled.flows) successors[flow.source].push_back(flow.target);
    std::set<std::string> seen{model_.process.front().id()};
    std::deque<std::string> queue{model_.process.front().id()};
    while (!queue.empty()) {
      auto current = queue.front();
      queue.pop_front();
      for (const auto& next : successors[current]) {
        if (seen.insert(next).second) queue.push_back(next);
      }
    }
    for (const auto& node : compiled.nodes) {
      if (seen.contains(node.id)) continue;
      if (node.synthesized_join) {
        error("JoinUnreachable", node.origin, "no branch of gateway '" + node.origin + "' reaches its join");
      } else {
        error("Unreachable", node.id, "element '" + node.id + "' cannot be reached from the start event");
      }
    }
  }

  const ProcessModel& model_;
  std::map<std::string, int> id_counts_;
  std::map<std::string, ElementType> types_;
  ValidationReport report_;
};

}  // namespace

ValidationReport validate(const ProcessModel& model) { return Validator(model).run(); }

// ---------------------------------------------------------------------------
// Parsing

namespace {

std::string child_path(const std::string& path, std::size_t index) {
  return path + "[" + std::to_string(index) + "]";
}

std::string required_string(const json& object, const char* field, const std::string& path) {
  auto it = object.find(field);
  if (it == object.end() || it->is_null()) throw MissingFieldError(field, path);
  if (!it->is_string()) {
    throw Error(ErrorCode::kMalformedDocument, "field '" + std::string(field) + "' at " + path + " must be a string");
  }
  return it->get<std::string>();
}

std::optional<std::string> optional_string(const json& object, const char* field, const std::string& path) {
  auto it = object.find(field);
  if (it == object.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) {
    throw Error(ErrorCode::kMalformedDocument, "field '" + std::string(field) + "' at " + path + " must be a string");
  }
  return it->get<std::string>();
}

const json& required_array(const json& object, const char* field, const std::string& path) {
  auto it = object.find(field);
  if (it == object.end() || it->is_null()) throw MissingFieldError(field, path);
  if (!it->is_array()) {
    throw Error(ErrorCode::kMalformedDocument, "field '" + std::string(field) + "' at " + path + " must be an array");
  }
  return *it;
}

Sequence sequence_from_json(const json& array, const std::string& path) {
  Sequence sequence;
  sequence.reserve(array.size());
  for (std::size_t i = 0; i < array.size(); ++i) {
    sequence.push_back(element_from_json(array[i], child_path(path, i)));
  }
  return sequence;
}

}  // namespace

Element element_from_json(const json& value, const std::string& path) {
  if (!value.is_object()) {
    throw Error(ErrorCode::kMalformedDocument, "element at " + path + " must be an object");
  }
  const std::string type_name = required_string(value, "type", path);
  const auto type = element_type_from_string(type_name);
  if (!type) {
    throw Error(ErrorCode::kUnknownElementType, "unsupported element type '" + type_name + "' at " + path);
  }
  std::string id = required_string(value, "id", path);

  switch (*type) {
    case ElementType::kTask:
    case ElementType::kUserTask:
    case ElementType::kServiceTask:
      return Task{*type, std::move(id), required_string(value, "label", path)};
    case ElementType::kStartEvent:
    case ElementType::kEndEvent:
      return Event{*type, std::move(id), optional_string(value, "label", path)};
    case ElementType::kExclusiveGateway: {
      ExclusiveGateway gateway;
      gateway.id = std::move(id);
      gateway.label = optional_string(value, "label", path);
      auto has_join = value.find("has_join");
      if (has_join == value.end() || has_join->is_null()) throw MissingFieldError("has_join", path);
      if (!has_join->is_boolean()) {
        throw Error(ErrorCode::kMalformedDocument, "field 'has_join' at " + path + " must be a boolean");
      }
      gateway.has_join = has_join->get<bool>();
      const json& branches = required_array(value, "branches", path);
      for (std::size_t b = 0; b < branches.size(); ++b) {
        const std::string branch_path = path + ".branches" + "[" + std::to_string(b) + "]";
        const json& branch_json = branches[b];
        if (!branch_json.is_object()) {
          throw Error(ErrorCode::kMalformedDocument, "branch at " + branch_path + " must be an object");
        }
        Branch branch;
        branch.condition = required_string(branch_json, "condition", branch_path);
        auto path_it = branch_json.find("path");
        if (path_it != branch_json.end() && !path_it->is_null()) {
          if (!path_it->is_array()) {
            throw Error(ErrorCode::kMalformedDocument, "field 'path' at " + branch_path + " must be an array");
          }
          branch.path = sequence_from_json(*path_it, branch_path + ".path");
        }
        branch.next = optional_string(branch_json, "next", branch_path);
        gateway.branches.push_back(std::move(branch));
      }
      return gateway;
    }
    case ElementType::kParallelGateway: {
      ParallelGateway gateway;
      gateway.id = std::move(id);
      const json& branches = required_array(value, "branches", path);
      for (std::size_t b = 0; b < branches.size(); ++b) {
        const std::string branch_path = path + ".branches" + "[" + std::to_string(b) + "]";
        if (!branches[b].is_array()) {
          throw Error(ErrorCode::kMalformedDocument, "branch at " + branch_path + " must be an array");
        }
        gateway.branches.push_back(sequence_from_json(branches[b], branch_path));
      }
      return gateway;
    }
  }
  throw Error(ErrorCode::kUnknownElementType, "unsupported element type at " + path);
}

ProcessModel process_from_json(const json& doc, std::vector<std::string>* warnings) {
  if (!doc.is_object()) throw Error(ErrorCode::kMalformedDocument, "process document must be a JSON object");
  const json& process = required_array(doc, "process", "");
  if (warnings) {
    for (const auto& [key, _] : doc.items()) {
      if (key != "process") warnings->push_back("ignored unknown top-level key '" + key + "'");
    }
  }
  ProcessModel model;
  model.process = sequence_from_json(process, "process");
  return model;
}

ProcessModel parse_process(std::string_view text, std::vector<std::string>* warnings) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kMalformedDocument, std::string("not a JSON document: ") + e.what());
  }
  return process_from_json(doc, warnings);
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

ordered_json sequence_to_json(const Sequence& sequence) {
  ordered_json array = ordered_json::array();
  for (const auto& element : sequence) array.push_back(element_to_json(element));
  return array;
}

}  // namespace

ordered_json element_to_json(const Element& element) {
  ordered_json out;
  out["type"] = std::string(to_string(element.type()));
  out["id"] = element.id();
  if (const auto* task = std::get_if<Task>(&element.node)) {
    out["label"] = task->label;
  } else if (const auto* event = std::get_if<Event>(&element.node)) {
    if (event->label) out["label"] = *event->label;
  } else if (const auto* x = std::get_if<ExclusiveGateway>(&element.node)) {
    if (x->label) out["label"] = *x->label;
    out["has_join"] = x->has_join;
    ordered_json branches = ordered_json::array();
    for (const auto& branch : x->branches) {
      ordered_json b;
      b["condition"] = branch.condition;
      b["path"] = sequence_to_json(branch.path);
      if (branch.next) b["next"] = *branch.next;
      branches.push_back(std::move(b));
    }
    out["branches"] = std::move(branches);
  } else {
    const auto& p = element.as<ParallelGateway>();
    ordered_json branches = ordered_json::array();
    for (const auto& branch : p.branches) branches.push_back(sequence_to_json(branch));
    out["branches"] = std::move(branches);
  }
  return out;
}

ordered_json process_to_json(const ProcessModel& model) {
  ordered_json doc;
  doc["process"] = sequence_to_json(model.process);
  return doc;
}

std::string serialize_process(const ProcessModel& model) { return process_to_json(model).dump(4); }

}  // namespace bpmn_assistant
