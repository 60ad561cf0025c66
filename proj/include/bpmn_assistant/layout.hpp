#pragma once

// Layered left-to-right auto-layout producing BPMN Diagram Interchange.

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "bpmn_assistant/xml_codec.hpp"

namespace bpmn_assistant {

struct Bounds {
  double x = 0;
  double y = 0;
  double width = 0;
  double height = 0;

  double center_x() const { return x + width / 2; }
  double center_y() const { return y + height / 2; }
  double right() const { return x + width; }
  double bottom() const { return y + height; }

  bool operator==(const Bounds&) const = default;
};

struct Point {
  double x = 0;
  double y = 0;

  bool operator==(const Point&) const = default;
};

struct DiagramLayout {
  std::map<std::string, Bounds> shapes;             // node id -> bounds
  std::map<std::string, std::vector<Point>> edges;  // flow id -> waypoints

  bool operator==(const DiagramLayout&) const = default;
};

struct LayoutMetrics {
  double task_width = 100;
  double task_height = 80;
  double event_size = 36;
  double gateway_size = 50;
  double column_pitch = 150;
  double row_pitch = 110;
  double origin_x = 100;  // center of layer 0
  double origin_y = 100;  // center of row 0
  double corridor_gap = 30;
};

/// Throws InvalidDocument when the document fails validate_xml_structure or
/// spans several processes, participants or lanes.
DiagramLayout compute_layout(const BpmnDocument& doc, const LayoutMetrics& metrics = {});

/// Inserts a BPMNDiagram (replacing any present) before the root close tag.
/// Throws IncompleteLayout naming every node or flow the layout lacks.
std::string embed_di(std::string_view xml_text, const DiagramLayout& layout);

/// Removes BPMNDiagram elements; the inverse of embed_di on DI-free input.
std::string strip_di(std::string_view xml_text);

/// Node and layer/row placement used by compute_layout, exposed for tests.
struct LayerAssignment {
  std::map<std::string, int> layer;
  std::map<std::string, int> row;
  std::vector<std::string> back_edges;  // flow ids
};
LayerAssignment assign_layers(const FlowGraph& graph);

}  // namespace bpmn_assistant
