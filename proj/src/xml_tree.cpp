#include "bpmn_assistant/xml_tree.hpp"

#include <expat.h>

#include <memory>

#include "bpmn_assistant/error.hpp"

namespace bpmn_assistant {

const std::string* XmlElement::attribute(std::string_view key) const {
  for (const auto& [k, v] : attributes) {
    if (k == key) return &v;
  }
  return nullptr;
}

std::string XmlElement::attribute_or(std::string_view key, std::string fallback) const {
  const std::string* value = attribute(key);
  return value ? *value : std::move(fallback);
}

namespace {

constexpr char kNamespaceSeparator = ' ';

struct ParserDeleter {
  void operator()(XML_ParserStruct* parser) const { XML_ParserFree(parser); }
};

struct BuildState {
  XML_Parser parser = nullptr;
  XmlElement root;
  std::vector<XmlElement*> stack;
  std::vector<std::size_t> start_tag_ends;
  bool have_root = false;
};

void split_name(const char* raw, std::string& ns, std::string& local) {
  std::string_view name(raw);
  auto sep = name.find(kNamespaceSeparator);
  if (sep == std::string_view::npos) {
    ns.clear();
    local.assign(name);
  } else {
    ns.assign(name.substr(0, sep));
    local.assign(name.substr(sep + 1));
  }
}

void XMLCALL on_start(void* user, const XML_Char* name, const XML_Char** attrs) {
  auto* state = static_cast<BuildState*>(user);
  XmlElement element;
  split_name(name, element.ns, element.name);
  for (const XML_Char** a = attrs; *a; a += 2) {
    std::string_view key(a[0]);
    // Qualified attributes (xsi:type, extension attributes) are not needed.
    if (key.find(kNamespaceSeparator) != std::string_view::npos) continue;
    element.attributes.emplace_back(std::string(key), std::string(a[1]));
  }
  const auto index = static_cast<std::size_t>(XML_GetCurrentByteIndex(state->parser));
  const auto count = static_cast<std::size_t>(XML_GetCurrentByteCount(state->parser));
  element.begin_offset = index;
  state->start_tag_ends.push_back(index + count);

  if (state->stack.empty()) {
    state->root = std::move(element);
    state->have_root = true;
    state->stack.push_back(&state->root);
  } else {
    auto& children = state->stack.back()->children;
    children.push_back(std::move(element));
    state->stack.push_back(&children.back());
  }
}

void XMLCALL on_end(void* user, const XML_Char*) {
  auto* state = static_cast<BuildState*>(user);
  XmlElement* element = state->stack.back();
  const auto index = static_cast<std::size_t>(XML_GetCurrentByteIndex(state->parser));
  const auto count = static_cast<std::size_t>(XML_GetCurrentByteCount(state->parser));
  if (count == 0) {
    element->end_offset = state->start_tag_ends.back();
    element->close_tag_offset = element->end_offset;
  } else {
    element->close_tag_offset = index;
    element->end_offset = index + count;
  }
  state->start_tag_ends.pop_back();
  state->stack.pop_back();
}

void XMLCALL on_text(void* user, const XML_Char* text, int length) {
  auto* state = static_cast<BuildState*>(user);
  if (!state->stack.empty()) state->stack.back()->text.append(text, static_cast<std::size_t>(length));
}

}  // namespace

XmlElement parse_xml(std::string_view text) {
  std::unique_ptr<XML_ParserStruct, ParserDeleter> parser(XML_ParserCreateNS("UTF-8", kNamespaceSeparator));
  if (!parser) throw Error(ErrorCode::kMalformedXml, "could not create XML parser");
  BuildState state;
  state.parser = parser.get();
  XML_SetUserData(parser.get(), &state);
  XML_SetElementHandler(parser.get(), on_start, on_end);
  XML_SetCharacterDataHandler(parser.get(), on_text);

  const auto status = XML_Parse(parser.get(), text.data(), static_cast<int>(text.size()), XML_TRUE);
  if (status != XML_STATUS_OK || !state.have_root) {
    const std::string message =
        status != XML_STATUS_OK ? XML_ErrorString(XML_GetErrorCode(parser.get())) : "no root element";
    throw Error(ErrorCode::kMalformedXml,
                "malformed XML at line " + std::to_string(XML_GetCurrentLineNumber(parser.get())) + ", column " +
                    std::to_string(XML_GetCurrentColumnNumber(parser.get())) + ": " + message);
  }
  return std::move(state.root);
}

std::string xml_escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\n': out += "&#10;"; break;
      case '\r': out += "&#13;"; break;
      case '\t': out += "&#9;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace bpmn_assistant
