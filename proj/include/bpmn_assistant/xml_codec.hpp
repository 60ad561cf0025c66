#pragma once

// BPMN 2.0 XML: emission from the IR, import into a FlowGraph, structural
// checks, and reconstruction of the IR from block-structured documents.

#include <string>
#include <string_view>

#include "bpmn_assistant/flow_graph.hpp"
#include "bpmn_assistant/process_ir.hpp"
#include "bpmn_assistant/xml_tree.hpp"

namespace bpmn_assistant {

inline constexpr std::string_view kBpmnModelNs = "http://www.omg.org/spec/BPMN/20100524/MODEL";
inline constexpr std::string_view kBpmnDiNs = "http://www.omg.org/spec/BPMN/20100524/DI";
inline constexpr std::string_view kDcNs = "http://www.omg.org/spec/DD/20100524/DC";
inline constexpr std::string_view kDiNs = "http://www.omg.org/spec/DD/20100524/DI";
inline constexpr std::string_view kExporterName = "bpmn-assistant";
inline constexpr std::string_view kExporterVersion = "0.1.0";

/// A parsed BPMN file: the original text plus an index of the flow nodes and
/// sequence flows of its (first) process.
struct BpmnDocument {
  std::string xml_text;
  FlowGraph graph;
  std::string process_id;
  std::size_t process_count = 0;
  std::size_t participant_count = 0;
  std::size_t lane_count = 0;

  /// Throws MalformedXml or NoProcessElement.
  static BpmnDocument parse(std::string xml_text);
};

/// Throws ValidationError(kInvalidModel) unless validate(model).ok().
std::string to_bpmn_xml(const ProcessModel& model);

/// Flow nodes become nodes (type = local element name, label = name or "");
/// sequence flows become edges labeled with their name. DI is ignored.
FlowGraph import_flow_graph(std::string_view xml_text);

/// Well-formedness, unique ids, resolvable flow endpoints, at least one start
/// and end event, every node reachable from a start event.
ValidationReport validate_xml_structure(std::string_view xml_text);

/// Rebuilds the IR from a block-structured document over the supported
/// element set. Throws UnsupportedElement or Unstructured.
ProcessModel reconstruct_ir(std::string_view xml_text);

bool is_flow_node_name(std::string_view local_name);

}  // namespace bpmn_assistant
