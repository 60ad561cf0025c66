#pragma once

// Minimal namespace-aware XML tree on top of expat. Elements remember their
// byte range in the source so callers can splice text without re-serializing.

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace bpmn_assistant {

struct XmlElement {
  std::string ns;    // namespace URI, empty when unqualified
  std::string name;  // local name
  std::vector<std::pair<std::string, std::string>> attributes;  // unqualified attributes only
  std::vector<XmlElement> children;
  std::string text;

  std::size_t begin_offset = 0;      // first byte of the start tag
  std::size_t end_offset = 0;        // one past the last byte of the element
  std::size_t close_tag_offset = 0;  // first byte of the end tag; == end_offset if self-closing

  const std::string* attribute(std::string_view key) const;
  std::string attribute_or(std::string_view key, std::string fallback = {}) const;
};

/// Throws Error(kMalformedXml) with expat's line/column on failure.
XmlElement parse_xml(std::string_view text);

/// Escapes for use inside a double-quoted attribute value. Line breaks and
/// tabs become character references so attribute normalization keeps them.
std::string xml_escape(std::string_view text);

}  // namespace bpmn_assistant
