#pragma once

// The five atomic editing functions over ProcessModel. Every function is pure:
// it takes a model by const reference and returns a new one, or throws.

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "bpmn_assistant/process_ir.hpp"

namespace bpmn_assistant {

struct DeleteElement {
  std::string element_id;
  bool operator==(const DeleteElement&) const = default;
};

struct RedirectBranch {
  std::string branch_condition;
  std::string next_id;
  bool operator==(const RedirectBranch&) const = default;
};

struct AddElement {
  Element element;
  std::optional<std::string> before_id;
  std::optional<std::string> after_id;
  bool operator==(const AddElement&) const = default;
};

struct MoveElement {
  std::string element_id;
  std::optional<std::string> before_id;
  std::optional<std::string> after_id;
  bool operator==(const MoveElement&) const = default;
};

struct UpdateElement {
  Element new_element;
  bool operator==(const UpdateElement&) const = default;
};

using EditOp = std::variant<DeleteElement, RedirectBranch, AddElement, MoveElement, UpdateElement>;

std::string_view function_name(const EditOp& op);

ProcessModel delete_element(const ProcessModel& model, const std::string& element_id);
ProcessModel add_element(const ProcessModel& model, const Element& element,
                         const std::optional<std::string>& before_id,
                         const std::optional<std::string>& after_id);
ProcessModel move_element(const ProcessModel& model, const std::string& element_id,
                          const std::optional<std::string>& before_id,
                          const std::optional<std::string>& after_id);
/// Wholesale replacement; throws ResultingModelInvalid (ValidationError) when
/// the result fails validation.
ProcessModel update_element(const ProcessModel& model, const Element& new_element);
/// Matches conditions case-insensitively after trimming.
ProcessModel redirect_branch(const ProcessModel& model, const std::string& branch_condition,
                             const std::string& next_id);

ProcessModel apply_edit(const ProcessModel& model, const EditOp& op);

struct EditResult {
  ProcessModel model;
  std::vector<EditOp> applied;
  ValidationReport report;
};

/// Raised by apply_edit_script. `index` is the failing op; a final-model
/// validation failure reports index == ops.size() with ResultingModelInvalid.
class ScriptFailedError : public Error {
 public:
  ScriptFailedError(std::size_t index, ErrorCode cause, const std::string& detail,
                    std::optional<ValidationReport> report = std::nullopt);

  std::size_t index() const noexcept { return index_; }
  ErrorCode cause() const noexcept { return cause_; }
  const std::optional<ValidationReport>& report() const noexcept { return report_; }

 private:
  std::size_t index_;
  ErrorCode cause_;
  std::optional<ValidationReport> report_;
};

/// All-or-nothing: either every op applies and the final model validates, or
/// ScriptFailedError is thrown and the caller's model is untouched.
EditResult apply_edit_script(const ProcessModel& model, const std::vector<EditOp>& ops);

// Wire form: {"function": name, "arguments": {...}} with the parameter
// spellings element_id, branch_condition, next_id, element, before_id,
// after_id, new_element. Parse failures raise UnparseableFunctionCalls.
EditOp edit_op_from_json(const nlohmann::json& call);
std::vector<EditOp> edit_ops_from_json(const nlohmann::json& calls);
ordered_json edit_op_to_json(const EditOp& op);
ordered_json edit_ops_to_json(const std::vector<EditOp>& ops);

}  // namespace bpmn_assistant
