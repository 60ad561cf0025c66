#include "bpmn_assistant/xml_codec.hpp"

#include <deque>
#include <map>
#include <set>
#include <sstream>

#include "bpmn_assistant/flow_compiler.hpp"
#include "bpmn_assistant/text_util.hpp"

namespace bpmn_assistant {

namespace {

constexpr std::string_view kFlowNodeNames[] = {
    "task", "userTask", "serviceTask", "sendTask", "receiveTask", "manualTask", "businessRuleTask",
    "scriptTask", "callActivity", "subProcess", "transaction", "adHocSubProcess", "startEvent", "endEvent",
    "intermediateCatchEvent", "intermediateThrowEvent", "boundaryEvent", "exclusiveGateway",
    "parallelGateway", "inclusiveGateway", "eventBasedGateway", "complexGateway"};

// LLM-written documents sometimes drop the namespace; accept unqualified names.
bool is_bpmn(const XmlElement& element) { return element.ns == kBpmnModelNs || element.ns.empty(); }

struct ProcessScan {
  const XmlElement* process = nullptr;
  std::size_t process_count = 0;
  std::size_t participant_count = 0;
  std::size_t lane_count = 0;
};

ProcessScan scan(const XmlElement& root) {
  ProcessScan out;
  if (is_bpmn(root) && root.name == "process") {
    out.process = &root;
    out.process_count = 1;
  }
  for (const auto& child : root.children) {
    if (!is_bpmn(child)) continue;
    if (child.name == "process") {
      if (!out.process) out.process = &child;
      ++out.process_count;
    } else if (child.name == "collaboration") {
      for (const auto& c : child.children) {
        if (is_bpmn(c) && c.name == "participant") ++out.participant_count;
      }
    }
  }
  if (out.process) {
    for (const auto& child : out.process->children) {
      if (!is_bpmn(child) || child.name != "laneSet") continue;
      for (const auto& lane : child.children) {
        if (is_bpmn(lane) && lane.name == "lane") ++out.lane_count;
      }
    }
  }
  return out;
}

FlowGraph graph_of(const XmlElement& process) {
  FlowGraph graph;
  for (const auto& child : process.children) {
    if (!is_bpmn(child)) continue;
    if (is_flow_node_name(child.name)) {
      graph.nodes.push_back({child.attribute_or("id"), child.name, child.attribute_or("name")});
    } else if (child.name == "sequenceFlow") {
      FlowEdge edge{child.attribute_or("id"), child.attribute_or("sourceRef"), child.attribute_or("targetRef"),
                    std::nullopt};
      if (const auto* name = child.attribute("name")) edge.label = *name;
      graph.edges.push_back(std::move(edge));
    }
  }
  return graph;
}

void collect_xml_ids(const XmlElement& element, std::map<std::string, int>& counts) {
  if (const auto* id = element.attribute("id")) ++counts[*id];
  for (const auto& child : element.children) collect_xml_ids(child, counts);
}

void write_node(std::ostringstream& out, const CompiledNode& node) {
  out << "    <bpmn:" << to_string(node.type) << " id=\"" << xml_escape(node.id) << "\"";
  if (node.label) out << " name=\"" << xml_escape(*node.label) << "\"";
  out << " />\n";
}

}  // namespace

bool is_flow_node_name(std::string_view local_name) {
  for (auto name : kFlowNodeNames) {
    if (name == local_name) return true;
  }
  return false;
}

BpmnDocument BpmnDocument::parse(std::string xml_text) {
  const XmlElement root = parse_xml(xml_text);
  const ProcessScan found = scan(root);
  if (!found.process) throw Error(ErrorCode::kNoProcessElement, "document contains no BPMN process element");
  BpmnDocument doc;
  doc.graph = graph_of(*found.process);
  doc.process_id = found.process->attribute_or("id");
  doc.process_count = found.process_count;
  doc.participant_count = found.participant_count;
  doc.lane_count = found.lane_count;
  doc.xml_text = std::move(xml_text);
  return doc;
}

std::string to_bpmn_xml(const ProcessModel& model) {
  ValidationReport report = validate(model);
  if (!report.ok()) throw ValidationError(ErrorCode::kInvalidModel, std::move(report));

  const CompiledProcess compiled = compile_flows(model);
  const std::string digest = fnv1a_hex(serialize_process(model));

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<bpmn:definitions xmlns:bpmn=\"" << kBpmnModelNs << "\" xmlns:bpmndi=\"" << kBpmnDiNs
      << "\" xmlns:dc=\"" << kDcNs << "\" xmlns:di=\"" << kDiNs << "\" id=\"Definitions_" << digest.substr(0, 8)
      << "\" targetNamespace=\"urn:bpmn-assistant:" << digest << "\" exporter=\"" << kExporterName
      << "\" exporterVersion=\"" << kExporterVersion << "\">\n";
  out << "  <bpmn:process id=\"Process_" << digest.substr(0, 8) << "\" isExecutable=\"true\">\n";
  for (const auto& node : compiled.nodes) write_node(out, node);
  for (const auto& flow : compiled.flows) {
    out << "    <bpmn:sequenceFlow id=\"" << xml_escape(flow.id) << "\" sourceRef=\"" << xml_escape(flow.source)
        << "\" targetRef=\"" << xml_escape(flow.target) << "\"";
    if (flow.name) out << " name=\"" << xml_escape(*flow.name) << "\"";
    out << " />\n";
  }
  out << "  </bpmn:process>\n</bpmn:definitions>\n";
  return out.str();
}

FlowGraph import_flow_graph(std::string_view xml_text) {
  const XmlElement root = parse_xml(xml_text);
  const ProcessScan found = scan(root);
  if (!found.process) throw Error(ErrorCode::kNoProcessElement, "document contains no BPMN process element");
  return graph_of(*found.process);
}

ValidationReport validate_xml_structure(std::string_view xml_text) {
  ValidationReport report;
  auto error = [&](std::string code, std::optional<std::string> id, std::string message) {
    report.issues.push_back({Severity::kError, std::move(code), std::move(id), std::move(message)});
  };

  XmlElement root;
  try {
    root = parse_xml(xml_text);
  } catch (const Error& e) {
    error("MalformedXml", std::nullopt, e.what());
    return report;
  }
  const ProcessScan found = scan(root);
  if (!found.process) {
    error("NoProcessElement", std::nullopt, "document contains no BPMN process element");
    return report;
  }
  if (found.process_count > 1) {
    error("MultipleProcesses", std::nullopt,
          "document contains " + std::to_string(found.process_count) + " processes; only one is supported");
  }

  std::map<std::string, int> id_counts;
  collect_xml_ids(root, id_counts);
  for (const auto& [id, count] : id_counts) {
    if (count > 1) error("DuplicateId", id, "id '" + id + "' is used " + std::to_string(count) + " times");
  }

  const FlowGraph graph = graph_of(*found.process);
  std::set<std::string> node_ids;
  bool has_start = false;
  bool has_end = false;
  for (const auto& node : graph.nodes) {
    if (node.id.empty()) error("MissingId", std::nullopt, "a " + node.type + " has no id");
    node_ids.insert(node.id);
    has_start |= node.type == "startEvent";
    has_end |= node.type == "endEvent";
    if (!element_type_from_string(node.type)) {
      report.issues.push_back({Severity::kWarning, "UnsupportedElement", node.id,
                               "element type '" + node.type + "' is outside the supported set"});
    }
  }
  if (!has_start) error("MissingStart", std::nullopt, "process has no startEvent");
  if (!has_end) error("MissingEnd", std::nullopt, "process has no endEvent");

  std::map<std::string, std::vector<std::string>> successors;
  for (const auto& edge : graph.edges) {
    bool ok = true;
    if (!node_ids.contains(edge.source)) {
      error("DanglingFlow", edge.id, "flow '" + edge.id + "' has unknown source '" + edge.source + "'");
      ok = false;
    }
    if (!node_ids.contains(edge.target)) {
      error("DanglingFlow", edge.id, "flow '" + edge.id + "' has unknown target '" + edge.target + "'");
      ok = false;
    }
    if (ok) successors[edge.source].push_back(edge.target);
  }

  if (has_start) {
    std::set<std::string> seen;
    std::deque<std::string> queue;
    for (const auto& node : graph.nodes) {
      if (node.type == "startEvent" && seen.insert(node.id).second) queue.push_back(node.id);
    }
    while (!queue.empty()) {
      const std::string current = queue.front();
      queue.pop_front();
      for (const auto& next : successors[current]) {
        if (seen.insert(next).second) queue.push_back(next);
      }
    }
    for (const auto& node : graph.nodes) {
      if (!seen.contains(node.id) && node.type != "boundaryEvent") {
        error("Unreachable", node.id, "'" + node.id + "' cannot be reached from a start event");
      }
    }
  }
  return report;
}

}  // namespace bpmn_assistant
