#include "bpmn_assistant/edit_engine.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace bpmn_assistant {

using nlohmann::json;

std::string_view function_name(const EditOp& op) {
  struct {
    std::string_view operator()(const DeleteElement&) const { return "delete_element"; }
    std::string_view operator()(const RedirectBranch&) const { return "redirect_branch"; }
    std::string_view operator()(const AddElement&) const { return "add_element"; }
    std::string_view operator()(const MoveElement&) const { return "move_element"; }
    std::string_view operator()(const UpdateElement&) const { return "update_element"; }
  } visitor;
  return std::visit(visitor, op);
}

namespace {

void check_anchors(const std::optional<std::string>& before_id, const std::optional<std::string>& after_id) {
  if (before_id && after_id) {
    throw Error(ErrorCode::kBothAnchorsGiven, "provide only one of before_id and after_id");
  }
  if (!before_id && !after_id) {
    throw Error(ErrorCode::kNoAnchorGiven, "one of before_id or after_id is required");
  }
}

// Inserts next to the anchor in the anchor's own sequence.
void insert_at_anchor(ProcessModel& model, Element element, const std::optional<std::string>& before_id,
                      const std::optional<std::string>& after_id) {
  const std::string& anchor = before_id ? *before_id : *after_id;
  auto located = locate(model, anchor);
  if (!located) throw Error(ErrorCode::kNotFound, "anchor element '" + anchor + "' not found");
  Sequence& sequence = sequence_at(model, located->location.sequence);
  const std::size_t index = located->location.index + (after_id ? 1 : 0);
  sequence.insert(sequence.begin() + static_cast<std::ptrdiff_t>(index), std::move(element));
}

std::size_t count_top_level(const ProcessModel& model, ElementType type) {
  return static_cast<std::size_t>(std::count_if(model.process.begin(), model.process.end(),
                                                [&](const Element& e) { return e.type() == type; }));
}

std::string normalize_condition(std::string_view text) {
  auto begin = std::find_if_not(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); });
  auto end = std::find_if_not(text.rbegin(), text.rend(), [](unsigned char c) { return std::isspace(c); }).base();
  std::string out;
  if (begin < end) out.assign(begin, end);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

void collect_branches(Sequence& sequence, std::vector<Branch*>& out) {
  for (auto& element : sequence) {
    if (auto* x = std::get_if<ExclusiveGateway>(&element.node)) {
      for (auto& branch : x->branches) {
        out.push_back(&branch);
        collect_branches(branch.path, out);
      }
    } else if (auto* p = std::get_if<ParallelGateway>(&element.node)) {
      for (auto& branch : p->branches) collect_branches(branch, out);
    }
  }
}

std::string join(const std::vector<std::string>& values) {
  std::string out;
  for (const auto& v : values) out += (out.empty() ? "" : ", ") + v;
  return out;
}

}  // namespace

ProcessModel delete_element(const ProcessModel& model, const std::string& element_id) {
  const LocatedElement located = find_element(model, element_id);
  const ElementType type = located.element->type();
  const auto removed_list = collect_ids(*located.element);
  const std::set<std::string> removed(removed_list.begin(), removed_list.end());

  ProcessModel result = model;
  Sequence& sequence = sequence_at(result, located.location.sequence);
  sequence.erase(sequence.begin() + static_cast<std::ptrdiff_t>(located.location.index));

  if ((type == ElementType::kStartEvent && count_top_level(result, ElementType::kStartEvent) == 0) ||
      (type == ElementType::kEndEvent && located.location.sequence.empty() &&
       count_top_level(result, ElementType::kEndEvent) == 0)) {
    throw Error(ErrorCode::kWouldRemoveLastStartOrEnd,
                "deleting '" + element_id + "' would leave the process without a " +
                    std::string(to_string(type)));
  }

  std::vector<std::string> orphaned;
  std::vector<Branch*> branches;
  collect_branches(result.process, branches);
  for (const Branch* branch : branches) {
    if (branch->next && removed.contains(*branch->next)) orphaned.push_back(*branch->next);
  }
  if (!orphaned.empty()) {
    throw Error(ErrorCode::kWouldOrphanReference,
                "deleting '" + element_id + "' would orphan branch references to: " + join(orphaned));
  }
  return result;
}

ProcessModel add_element(const ProcessModel& model, const Element& element,
                         const std::optional<std::string>& before_id,
                         const std::optional<std::string>& after_id) {
  check_anchors(before_id, after_id);
  const auto existing_list = collect_ids(model);
  std::set<std::string> existing(existing_list.begin(), existing_list.end());
  for (const auto& id : collect_ids(element)) {
    if (!existing.insert(id).second) {
      throw Error(ErrorCode::kDuplicateId, "id '" + id + "' is already used");
    }
  }
  ProcessModel result = model;
  insert_at_anchor(result, element, before_id, after_id);
  return result;
}

ProcessModel move_element(const ProcessModel& model, const std::string& element_id,
                          const std::optional<std::string>& before_id,
                          const std::optional<std::string>& after_id) {
  check_anchors(before_id, after_id);
  const std::string& anchor = before_id ? *before_id : *after_id;
  const LocatedElement located = find_element(model, element_id);
  if (anchor == element_id) {
    throw Error(ErrorCode::kSelfAnchor, "cannot move '" + element_id + "' relative to itself");
  }
  if (!locate(model, anchor)) throw Error(ErrorCode::kNotFound, "anchor element '" + anchor + "' not found");
  const auto nested = collect_ids(*located.element);
  if (std::find(nested.begin(), nested.end(), anchor) != nested.end()) {
    throw Error(ErrorCode::kAnchorInsideMoved,
                "anchor '" + anchor + "' lies inside the moved element '" + element_id + "'");
  }

  ProcessModel result = model;
  Sequence& sequence = sequence_at(result, located.location.sequence);
  const auto position = sequence.begin() + static_cast<std::ptrdiff_t>(located.location.index);
  Element moved = std::move(*position);
  sequence.erase(position);
  insert_at_anchor(result, std::move(moved), before_id, after_id);
  return result;
}

ProcessModel update_element(const ProcessModel& model, const Element& new_element) {
  const LocatedElement located = find_element(model, new_element.id());
  ProcessModel result = model;
  sequence_at(result, located.location.sequence)[located.location.index] = new_element;
  ValidationReport report = validate(result);
  if (!report.ok()) throw ValidationError(ErrorCode::kResultingModelInvalid, std::move(report));
  return result;
}

ProcessModel redirect_branch(const ProcessModel& model, const std::string& branch_condition,
                             const std::string& next_id) {
  ProcessModel result = model;
  std::vector<Branch*> branches;
  collect_branches(result.process, branches);
  const std::string wanted = normalize_condition(branch_condition);
  std::vector<Branch*> matches;
  for (Branch* branch : branches) {
    if (normalize_condition(branch->condition) == wanted) matches.push_back(branch);
  }
  if (matches.empty()) {
    throw Error(ErrorCode::kNoMatchingBranch, "no branch has condition '" + branch_condition + "'");
  }
  if (matches.size() > 1) {
    throw Error(ErrorCode::kAmbiguousCondition, "condition '" + branch_condition + "' matches " +
                                                    std::to_string(matches.size()) + " branches");
  }
  if (!locate(result, next_id)) throw Error(ErrorCode::kNotFound, "element '" + next_id + "' not found");
  matches.front()->next = next_id;
  return result;
}

ProcessModel apply_edit(const ProcessModel& model, const EditOp& op) {
  struct {
    const ProcessModel& model;
    ProcessModel operator()(const DeleteElement& op) const { return delete_element(model, op.element_id); }
    ProcessModel operator()(const RedirectBranch& op) const {
      return redirect_branch(model, op.branch_condition, op.next_id);
    }
    ProcessModel operator()(const AddElement& op) const {
      return add_element(model, op.element, op.before_id, op.after_id);
    }
    ProcessModel operator()(const MoveElement& op) const {
      return move_element(model, op.element_id, op.before_id, op.after_id);
    }
    ProcessModel operator()(const UpdateElement& op) const { return update_element(model, op.new_element); }
  } visitor{model};
  return std::visit(visitor, op);
}

ScriptFailedError::ScriptFailedError(std::size_t index, ErrorCode cause, const std::string& detail,
                                     std::optional<ValidationReport> report)
    : Error(ErrorCode::kScriptFailed,
            "edit script failed at operation " + std::to_string(index) + " (" + std::string(to_string(cause)) +
                "): " + detail),
      index_(index),
      cause_(cause),
      report_(std::move(report)) {}

EditResult apply_edit_script(const ProcessModel& model, const std::vector<EditOp>& ops) {
  ProcessModel current = model;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    try {
      current = apply_edit(current, ops[i]);
    } catch (const ValidationError& e) {
      throw ScriptFailedError(i, e.code(), e.what(), e.report());
    } catch (const Error& e) {
      throw ScriptFailedError(i, e.code(), e.what());
    }
  }
  ValidationReport report = validate(current);
  if (!report.ok()) {
    throw ScriptFailedError(ops.size(), ErrorCode::kResultingModelInvalid, report.summary(), report);
  }
  return {std::move(current), ops, std::move(report)};
}

// ---------------------------------------------------------------------------
// Wire form

namespace {

[[noreturn]] void unparseable(const std::string& message) {
  throw Error(ErrorCode::kUnparseableFunctionCalls, message);
}

std::string string_arg(const json& args, const char* name, const std::string& function) {
  auto it = args.find(name);
  if (it == args.end() || !it->is_string()) {
    unparseable(function + ": argument '" + std::string(name) + "' must be a string");
  }
  return it->get<std::string>();
}

std::optional<std::string> optional_arg(const json& args, const char* name, const std::string& function) {
  auto it = args.find(name);
  if (it == args.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) unparseable(function + ": argument '" + std::string(name) + "' must be a string");
  return it->get<std::string>();
}

Element element_arg(const json& args, const char* name, const std::string& function) {
  auto it = args.find(name);
  if (it == args.end() || !it->is_object()) {
    unparseable(function + ": argument '" + std::string(name) + "' must be an element object");
  }
  try {
    return element_from_json(*it, name);
  } catch (const Error& e) {
    unparseable(function + ": " + e.what());
  }
}

}  // namespace

EditOp edit_op_from_json(const json& call) {
  if (!call.is_object()) unparseable("function call must be an object");
  auto name_it = call.find("function");
  if (name_it == call.end()) name_it = call.find("name");
  if (name_it == call.end() || !name_it->is_string()) unparseable("function call lacks a 'function' name");
  const std::string function = name_it->get<std::string>();

  json args = json::object();
  if (auto it = call.find("arguments"); it != call.end()) {
    if (it->is_string()) {
      try {
        args = json::parse(it->get<std::string>());
      } catch (const json::parse_error&) {
        unparseable(function + ": arguments string is not JSON");
      }
    } else {
      args = *it;
    }
  }
  if (!args.is_object()) unparseable(function + ": arguments must be an object");

  if (function == "delete_element") return DeleteElement{string_arg(args, "element_id", function)};
  if (function == "redirect_branch") {
    return RedirectBranch{string_arg(args, "branch_condition", function), string_arg(args, "next_id", function)};
  }
  if (function == "add_element") {
    return AddElement{element_arg(args, "element", function), optional_arg(args, "before_id", function),
                      optional_arg(args, "after_id", function)};
  }
  if (function == "move_element") {
    return MoveElement{string_arg(args, "element_id", function), optional_arg(args, "before_id", function),
                       optional_arg(args, "after_id", function)};
  }
  if (function == "update_element") return UpdateElement{element_arg(args, "new_element", function)};
  unparseable("unknown function '" + function + "'");
}

std::vector<EditOp> edit_ops_from_json(const json& calls) {
  const json* list = &calls;
  if (calls.is_object()) {
    for (const char* key : {"calls", "function_calls", "tool_calls"}) {
      if (auto it = calls.find(key); it != calls.end()) {
        list = &*it;
        break;
      }
    }
    if (list == &calls) return {edit_op_from_json(calls)};
  }
  if (!list->is_array()) unparseable("function calls must be a JSON array");
  std::vector<EditOp> ops;
  for (const auto& call : *list) ops.push_back(edit_op_from_json(call));
  return ops;
}

ordered_json edit_op_to_json(const EditOp& op) {
  ordered_json args = ordered_json::object();
  std::visit(
      [&](const auto& o) {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, DeleteElement>) {
          args["element_id"] = o.element_id;
        } else if constexpr (std::is_same_v<T, RedirectBranch>) {
          args["branch_condition"] = o.branch_condition;
          args["next_id"] = o.next_id;
        } else if constexpr (std::is_same_v<T, AddElement>) {
          args["element"] = element_to_json(o.element);
          if (o.before_id) args["before_id"] = *o.before_id;
          if (o.after_id) args["after_id"] = *o.after_id;
        } else if constexpr (std::is_same_v<T, MoveElement>) {
          args["element_id"] = o.element_id;
          if (o.before_id) args["before_id"] = *o.before_id;
          if (o.after_id) args["after_id"] = *o.after_id;
        } else {
          args["new_element"] = element_to_json(o.new_element);
        }
      },
      op);
  ordered_json out;
  out["function"] = std::string(function_name(op));
  out["arguments"] = std::move(args);
  return out;
}

ordered_json edit_ops_to_json(const std::vector<EditOp>& ops) {
  ordered_json out = ordered_json::array();
  for (const auto& op : ops) out.push_back(edit_op_to_json(op));
  return out;
}

}  // namespace bpmn_assistant
