#pragma once

// Block-structured process representation: an ordered element sequence in
// which gateways own their branches. Adjacency in a sequence is control flow.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "bpmn_assistant/error.hpp"

namespace bpmn_assistant {

using ordered_json = nlohmann::ordered_json;

enum class ElementType {
  kTask,
  kUserTask,
  kServiceTask,
  kStartEvent,
  kEndEvent,
  kExclusiveGateway,
  kParallelGateway,
};

std::string_view to_string(ElementType type);
std::optional<ElementType> element_type_from_string(std::string_view name);
bool is_task_type(ElementType type);
bool is_event_type(ElementType type);
bool is_gateway_type(ElementType type);

struct Element;
using Sequence = std::vector<Element>;

struct Task {
  ElementType type = ElementType::kTask;  // task, userTask or serviceTask
  std::string id;
  std::string label;

  bool operator==(const Task&) const = default;
};

struct Event {
  ElementType type = ElementType::kStartEvent;  // startEvent or endEvent
  std::string id;
  std::optional<std::string> label;

  bool operator==(const Event&) const = default;
};

struct Branch {
  std::string condition;
  Sequence path;
  // When set, the branch exit flows here instead of to the join/successor.
  std::optional<std::string> next;

  bool operator==(const Branch&) const = default;
};

struct ExclusiveGateway {
  std::string id;
  std::optional<std::string> label;
  bool has_join = false;
  std::vector<Branch> branches;

  bool operator==(const ExclusiveGateway&) const = default;
};

struct ParallelGateway {
  std::string id;
  std::vector<Sequence> branches;

  bool operator==(const ParallelGateway&) const = default;
};

struct Element {
  using Variant = std::variant<Task, Event, ExclusiveGateway, ParallelGateway>;

  Element(Task t) : node(std::move(t)) {}
  Element(Event e) : node(std::move(e)) {}
  Element(ExclusiveGateway g) : node(std::move(g)) {}
  Element(ParallelGateway g) : node(std::move(g)) {}

  const std::string& id() const;
  ElementType type() const;

  template <class T>
  bool is() const { return std::holds_alternative<T>(node); }
  template <class T>
  const T& as() const { return std::get<T>(node); }
  template <class T>
  T& as() { return std::get<T>(node); }

  bool operator==(const Element&) const = default;

  Variant node;
};

struct ProcessModel {
  Sequence process;

  bool operator==(const ProcessModel&) const = default;
};

// Convenience constructors, mostly for fixtures.
Element make_task(std::string id, std::string label, ElementType type = ElementType::kTask);
Element make_start(std::string id, std::optional<std::string> label = std::nullopt);
Element make_end(std::string id, std::optional<std::string> label = std::nullopt);

// ---------------------------------------------------------------------------
// Validation

enum class Severity { kError, kWarning };

struct Issue {
  Severity severity = Severity::kError;
  std::string code;
  std::optional<std::string> element_id;
  std::string message;

  bool operator==(const Issue&) const = default;
};

struct ValidationReport {
  std::vector<Issue> issues;

  bool ok() const;
  bool has(std::string_view code) const;
  bool has(std::string_view code, std::string_view element_id) const;
  std::size_t error_count() const;
  // One issue per line, errors only unless `include_warnings`.
  std::string summary(bool include_warnings = false) const;
};

ordered_json report_to_json(const ValidationReport& report);

/// Thrown where an operation requires a validate-passing model.
class ValidationError : public Error {
 public:
  ValidationError(ErrorCode code, ValidationReport report);
  const ValidationReport& report() const noexcept { return report_; }

 private:
  ValidationReport report_;
};

ValidationReport validate(const ProcessModel& model);

// ---------------------------------------------------------------------------
// JSON form

/// Parses the `{"process": [...]}` document. Unknown top-level keys are
/// skipped and reported through `warnings` when provided.
ProcessModel parse_process(std::string_view text, std::vector<std::string>* warnings = nullptr);
ProcessModel process_from_json(const nlohmann::json& doc, std::vector<std::string>* warnings = nullptr);
Element element_from_json(const nlohmann::json& value, const std::string& path = "element");

/// Canonical rendering: type, id, label, then variant fields; absent
/// optionals omitted; four-space indentation.
std::string serialize_process(const ProcessModel& model);
ordered_json process_to_json(const ProcessModel& model);
ordered_json element_to_json(const Element& element);

// ---------------------------------------------------------------------------
// Addressing

/// A step into a gateway: the gateway's index in its owning sequence and the
/// branch taken.
struct BranchStep {
  std::size_t element_index = 0;
  std::size_t branch_index = 0;

  bool operator==(const BranchStep&) const = default;
};

struct ElementLocation {
  std::vector<BranchStep> sequence;  // empty = top-level sequence
  std::size_t index = 0;

  bool operator==(const ElementLocation&) const = default;
};

struct LocatedElement {
  const Element* element = nullptr;
  ElementLocation location;
};

std::optional<LocatedElement> locate(const ProcessModel& model, std::string_view id);
/// Depth-first, document-order search. Throws NotFound.
LocatedElement find_element(const ProcessModel& model, std::string_view id);

const Sequence& sequence_at(const ProcessModel& model, const std::vector<BranchStep>& steps);
Sequence& sequence_at(ProcessModel& model, const std::vector<BranchStep>& steps);

/// Visits every element in document order, nested branches included.
void for_each_element(const Sequence& sequence, const std::function<void(const Element&)>& visit);
void for_each_element(const ProcessModel& model, const std::function<void(const Element&)>& visit);

/// Ids of the element and everything nested inside it.
std::vector<std::string> collect_ids(const Element& element);
std::vector<std::string> collect_ids(const ProcessModel& model);
std::size_t element_count(const ProcessModel& model);

// ---------------------------------------------------------------------------

/// Deterministic generator of validate-passing models with exactly
/// `target_size` elements and gateway nesting up to depth 3.
ProcessModel random_process(std::uint64_t seed, std::size_t target_size);

}  // namespace bpmn_assistant
