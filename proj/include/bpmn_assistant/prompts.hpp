#pragma once

// Prompt text sent to providers. The wording is documented in docs/prompts.md.

#include <string>
#include <string_view>

namespace bpmn_assistant {

std::string classify_system_prompt(bool has_model);
std::string conversational_system_prompt();

std::string ir_schema_reference();
std::string edit_functions_reference();

std::string generate_json_system_prompt();
std::string generate_xml_system_prompt();
std::string generate_user_prompt(std::string_view description);

std::string edit_json_system_prompt();
std::string edit_json_user_prompt(std::string_view serialized_model, std::string_view instruction);

std::string edit_xml_system_prompt();
std::string edit_xml_user_prompt(std::string_view xml, std::string_view instruction);

/// Appended as a follow-up user message after an invalid response.
std::string retry_feedback(std::string_view diagnostic);

}  // namespace bpmn_assistant
