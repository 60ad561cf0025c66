#include "bpmn_assistant/prompts.hpp"

namespace bpmn_assistant {

std::string classify_system_prompt(bool has_model) {
  std::string prompt =
      "You route messages for a BPMN modeling assistant. Decide what the user wants.\n"
      "- conversational: a question or remark that needs a text answer and no diagram change.\n"
      "- create: a request to model a new process from a description.\n"
      "- edit: a request to change the process that is currently loaded.\n";
  prompt += has_model ? "A process is currently loaded.\n" : "No process is loaded yet, so edit is not possible.\n";
  prompt += "Answer with JSON only, for example {\"intent\": \"create\"}.";
  return prompt;
}

std::string conversational_system_prompt() {
  return "You are an assistant for business process modeling with BPMN 2.0. Answer questions about BPMN "
         "concepts and about the user's process clearly and briefly. Do not output diagrams.";
}

std::string ir_schema_reference() {
  return R"(A process is a JSON object {"process": [ ...elements ]}. Elements run in list order.
Element forms:
  {"type": "task" | "userTask" | "serviceTask", "id": string, "label": string}
  {"type": "startEvent" | "endEvent", "id": string, "label": string (optional)}
  {"type": "exclusiveGateway", "id": string, "label": string, "has_join": boolean,
   "branches": [{"condition": string, "path": [elements] (optional), "next": element id (optional)}]}
  {"type": "parallelGateway", "id": string, "branches": [[elements], [elements]]}
Rules:
  - ids are unique across the whole process and contain no spaces.
  - the first element is the single startEvent; the top level ends with an endEvent.
  - gateways need at least two branches; parallel branches are never empty.
  - has_join=true merges the branches before the next element. With has_join=false every branch must
    end in an endEvent or jump with "next".
  - "next" jumps to any existing element id, which also expresses loops.
  - parallel branches are synchronized automatically; never model the closing gateway yourself.)";
}

std::string edit_functions_reference() {
  return R"(Available functions (call one or more, applied in order):
  delete_element(element_id)
  redirect_branch(branch_condition, next_id)
  add_element(element, before_id | after_id)      exactly one anchor
  move_element(element_id, before_id | after_id)  exactly one anchor
  update_element(new_element)                     replaces the element with the same id
Respond with a JSON array of calls such as
  [{"function": "delete_element", "arguments": {"element_id": "task2"}}])";
}

std::string generate_json_system_prompt() {
  return "You turn process descriptions into BPMN process models in a JSON format.\n" + ir_schema_reference() +
         "\nRespond with the JSON document only.";
}

std::string generate_xml_system_prompt() {
  return "You turn process descriptions into BPMN 2.0 XML. Produce one bpmn:definitions document with a "
         "single bpmn:process using only task, userTask, serviceTask, startEvent, endEvent, "
         "exclusiveGateway, parallelGateway and sequenceFlow elements. Put branch conditions in the "
         "sequenceFlow name attribute. Every flow node needs a unique id and must be reachable from the "
         "start event. Diagram interchange is not needed. Respond with the XML document only.";
}

std::string generate_user_prompt(std::string_view description) {
  return "Model this process:\n" + std::string(description);
}

std::string edit_json_system_prompt() {
  return "You edit BPMN process models by calling functions. Never rewrite the whole model.\n" +
         ir_schema_reference() + "\n" + edit_functions_reference();
}

std::string edit_json_user_prompt(std::string_view serialized_model, std::string_view instruction) {
  return "Current process:\n" + std::string(serialized_model) + "\n\nRequested change:\n" + std::string(instruction);
}

std::string edit_xml_system_prompt() {
  return "You edit BPMN 2.0 XML documents. Apply the requested change and respond with the complete "
         "updated document only. Keep ids of unchanged elements, keep every flow node reachable from "
         "the start event and keep all sequenceFlow references valid.";
}

std::string edit_xml_user_prompt(std::string_view xml, std::string_view instruction) {
  return "Current document:\n" + std::string(xml) + "\n\nRequested change:\n" + std::string(instruction);
}

std::string retry_feedback(std::string_view diagnostic) {
  return "Your previous answer was rejected:\n" + std::string(diagnostic) +
         "\nFix these problems and answer again in the required format only.";
}

}  // namespace bpmn_assistant
