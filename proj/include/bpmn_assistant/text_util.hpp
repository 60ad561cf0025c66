#pragma once

#include <string>
#include <string_view>

namespace bpmn_assistant {

std::string trim(std::string_view text);
std::string to_lower(std::string_view text);
/// Lowercase, trim, collapse internal whitespace runs to one space.
std::string normalize_label(std::string_view text);

/// 64-bit FNV-1a as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view data);

/// Shortest round-trip decimal form; integral values print without a point.
std::string format_number(double value);

}  // namespace bpmn_assistant
