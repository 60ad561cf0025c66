#include "bpmn_assistant/layout.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

#include "bpmn_assistant/text_util.hpp"

namespace bpmn_assistant {

namespace {

bool is_event(std::string_view type) { return type.ends_with("Event"); }
bool is_gateway(std::string_view type) { return type.ends_with("Gateway"); }

struct Adjacency {
  std::vector<std::vector<std::size_t>> out_edges;  // edge indices per node, document order
  std::vector<std::size_t> source;
  std::vector<std::size_t> target;
};

Adjacency adjacency(const FlowGraph& graph) {
  Adjacency adj;
  adj.out_edges.resize(graph.nodes.size());
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    auto s = graph.index_of(graph.edges[e].source);
    auto t = graph.index_of(graph.edges[e].target);
    if (!s || !t) throw Error(ErrorCode::kInvalidDocument, "flow '" + graph.edges[e].id + "' has an unknown endpoint");
    adj.source.push_back(*s);
    adj.target.push_back(*t);
    adj.out_edges[*s].push_back(e);
  }
  return adj;
}

std::vector<std::size_t> roots_of(const FlowGraph& graph) {
  std::vector<std::size_t> roots;
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    if (graph.nodes[i].type == "startEvent") roots.push_back(i);
  }
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    if (graph.nodes[i].type != "startEvent") roots.push_back(i);
  }
  return roots;
}

}  // namespace

LayerAssignment assign_layers(const FlowGraph& graph) {
  const std::size_t n = graph.nodes.size();
  const Adjacency adj = adjacency(graph);
  const std::vector<std::size_t> roots = roots_of(graph);

  // Back-edges: edges closing a cycle in a DFS from the start events.
  std::vector<bool> back(graph.edges.size(), false);
  std::vector<int> state(n, 0);
  for (std::size_t root : roots) {
    if (state[root] != 0) continue;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
    state[root] = 1;
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      if (next == adj.out_edges[node].size()) {
        state[node] = 2;
        stack.pop_back();
        continue;
      }
      const std::size_t e = adj.out_edges[node][next++];
      const std::size_t t = adj.target[e];
      if (state[t] == 1) {
        back[e] = true;
      } else if (state[t] == 0) {
        state[t] = 1;
        stack.push_back({t, 0});
      }
    }
  }

  // Longest path over the remaining DAG.
  std::vector<std::size_t> pending(n, 0);
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    if (!back[e]) ++pending[adj.target[e]];
  }
  std::vector<int> layer(n, 0);
  std::vector<std::size_t> ready;
  for (std::size_t i = n; i-- > 0;) {
    if (pending[i] == 0) ready.push_back(i);
  }
  std::vector<std::size_t> waiting = pending;
  while (!ready.empty()) {
    const std::size_t node = ready.back();
    ready.pop_back();
    for (std::size_t e : adj.out_edges[node]) {
      if (back[e]) continue;
      const std::size_t t = adj.target[e];
      layer[t] = std::max(layer[t], layer[node] + 1);
      if (--waiting[t] == 0) ready.push_back(t);
    }
  }

  // Rows: depth-first in branch order. A merge is placed once all of its
  // forward predecessors are, on the highest of their rows; the k-th
  // successor of a split starts below everything placed for the earlier ones.
  std::vector<int> row(n, -1);
  std::set<std::pair<int, int>> occupied;
  waiting = pending;
  int max_row = -1;
  std::function<int(std::size_t, int)> place = [&](std::size_t node, int wanted) {
    int r = wanted;
    while (occupied.contains({layer[node], r})) ++r;
    occupied.insert({layer[node], r});
    row[node] = r;
    max_row = std::max(max_row, r);
    int subtree_max = r;
    bool first = true;
    for (std::size_t e : adj.out_edges[node]) {
      if (back[e]) continue;
      const std::size_t t = adj.target[e];
      if (row[t] >= 0 || --waiting[t] > 0) continue;
      int preferred = first ? r : subtree_max + 1;
      for (std::size_t e2 = 0; e2 < graph.edges.size(); ++e2) {
        if (!back[e2] && adj.target[e2] == t && row[adj.source[e2]] >= 0 && adj.source[e2] != node) {
          preferred = first ? std::min(preferred, row[adj.source[e2]]) : preferred;
        }
      }
      subtree_max = std::max(subtree_max, place(t, preferred));
      first = false;
    }
    return subtree_max;
  };
  for (std::size_t root : roots) {
    if (row[root] < 0 && pending[root] == 0) place(root, max_row + 1);
  }
  // Nodes only reachable through cycles that no root enters.
  for (std::size_t i = 0; i < n; ++i) {
    if (row[i] < 0) place(i, max_row + 1);
  }

  LayerAssignment out;
  for (std::size_t i = 0; i < n; ++i) {
    out.layer[graph.nodes[i].id] = layer[i];
    out.row[graph.nodes[i].id] = row[i];
  }
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    if (back[e]) out.back_edges.push_back(graph.edges[e].id);
  }
  return out;
}

DiagramLayout compute_layout(const BpmnDocument& doc, const LayoutMetrics& m) {
  const ValidationReport report = validate_xml_structure(doc.xml_text);
  if (!report.ok()) throw Error(ErrorCode::kInvalidDocument, "cannot lay out document: " + report.summary());
  if (doc.process_count > 1 || doc.participant_count > 1 || doc.lane_count > 1) {
    throw Error(ErrorCode::kInvalidDocument, "multi-pool and multi-lane diagrams are not supported");
  }

  const FlowGraph& graph = doc.graph;
  const LayerAssignment placement = assign_layers(graph);

  DiagramLayout layout;
  int max_row = 0;
  for (const auto& node : graph.nodes) {
    double w = m.task_width;
    double h = m.task_height;
    if (is_event(node.type)) w = h = m.event_size;
    if (is_gateway(node.type)) w = h = m.gateway_size;
    const int r = placement.row.at(node.id);
    max_row = std::max(max_row, r);
    const double cx = m.origin_x + placement.layer.at(node.id) * m.column_pitch;
    const double cy = m.origin_y + r * m.row_pitch;
    layout.shapes[node.id] = Bounds{cx - w / 2, cy - h / 2, w, h};
  }

  const double corridor = m.origin_y + max_row * m.row_pitch + m.task_height / 2 + m.corridor_gap;
  const std::set<std::string> back(placement.back_edges.begin(), placement.back_edges.end());
  for (const auto& edge : graph.edges) {
    const Bounds& s = layout.shapes.at(edge.source);
    const Bounds& t = layout.shapes.at(edge.target);
    std::vector<Point> points;
    if (back.contains(edge.id)) {
      if (edge.source == edge.target) {
        const double left = s.x - m.corridor_gap / 2;
        points = {{s.center_x(), s.bottom()}, {s.center_x(), corridor}, {left, corridor},
                  {left, s.center_y()}, {s.x, s.center_y()}};
      } else {
        points = {{s.center_x(), s.bottom()}, {s.center_x(), corridor}, {t.center_x(), corridor},
                  {t.center_x(), t.bottom()}};
      }
    } else if (s.center_y() == t.center_y()) {
      points = {{s.right(), s.center_y()}, {t.x, t.center_y()}};
    } else {
      const double jog = t.center_x() - m.column_pitch / 2;
      points = {{s.right(), s.center_y()}, {jog, s.center_y()}, {jog, t.center_y()}, {t.x, t.center_y()}};
    }
    layout.edges[edge.id] = std::move(points);
  }
  return layout;
}

namespace {

struct Range {
  std::size_t begin;
  std::size_t end;
};

// The byte span embed_di inserted for a diagram element, including its
// indentation and trailing newline when it occupies whole lines.
Range diagram_span(std::string_view text, const XmlElement& diagram) {
  std::size_t begin = diagram.begin_offset;
  std::size_t end = diagram.end_offset;
  const bool indented = begin >= 2 && text.substr(begin - 2, 2) == "  " && (begin == 2 || text[begin - 3] == '\n');
  if (indented && end < text.size() && text[end] == '\n') return {begin - 2, end + 1};
  return {begin, end};
}

std::vector<Range> diagram_spans(std::string_view text, const XmlElement& root) {
  std::vector<Range> spans;
  for (const auto& child : root.children) {
    if (child.ns == kBpmnDiNs && child.name == "BPMNDiagram") spans.push_back(diagram_span(text, child));
  }
  return spans;
}

std::string remove_spans(std::string_view text, const std::vector<Range>& spans) {
  std::string out;
  std::size_t at = 0;
  for (const auto& span : spans) {
    out.append(text.substr(at, span.begin - at));
    at = span.end;
  }
  out.append(text.substr(at));
  return out;
}

void write_point(std::ostringstream& out, const char* tag, double x, double y) {
  out << "<" << tag << " x=\"" << format_number(x) << "\" y=\"" << format_number(y) << "\" />";
}

}  // namespace

std::string strip_di(std::string_view xml_text) {
  const XmlElement root = parse_xml(xml_text);
  return remove_spans(xml_text, diagram_spans(xml_text, root));
}

std::string embed_di(std::string_view xml_text, const DiagramLayout& layout) {
  const std::string base = strip_di(xml_text);
  const BpmnDocument doc = BpmnDocument::parse(base);

  std::vector<std::string> missing;
  for (const auto& node : doc.graph.nodes) {
    if (!layout.shapes.contains(node.id)) missing.push_back(node.id);
  }
  for (const auto& edge : doc.graph.edges) {
    auto it = layout.edges.find(edge.id);
    if (it == layout.edges.end() || it->second.size() < 2) missing.push_back(edge.id);
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& id : missing) list += (list.empty() ? "" : ", ") + id;
    throw Error(ErrorCode::kIncompleteLayout, "layout does not cover: " + list);
  }

  std::ostringstream di;
  const std::string& process = doc.process_id;
  di << "<bpmndi:BPMNDiagram xmlns:bpmndi=\"" << kBpmnDiNs << "\" xmlns:dc=\"" << kDcNs << "\" xmlns:di=\"" << kDiNs
     << "\" id=\"BPMNDiagram_" << xml_escape(process) << "\">\n";
  di << "    <bpmndi:BPMNPlane id=\"BPMNPlane_" << xml_escape(process) << "\" bpmnElement=\"" << xml_escape(process)
     << "\">\n";
  for (const auto& node : doc.graph.nodes) {
    const Bounds& b = layout.shapes.at(node.id);
    di << "      <bpmndi:BPMNShape id=\"" << xml_escape(node.id) << "_di\" bpmnElement=\"" << xml_escape(node.id) << "\"";
    if (node.type == "exclusiveGateway") di << " isMarkerVisible=\"true\"";
    di << ">\n        <dc:Bounds x=\"" << format_number(b.x) << "\" y=\"" << format_number(b.y) << "\" width=\""
       << format_number(b.width) << "\" height=\"" << format_number(b.height) << "\" />\n"
       << "      </bpmndi:BPMNShape>\n";
  }
  for (const auto& edge : doc.graph.edges) {
    di << "      <bpmndi:BPMNEdge id=\"" << xml_escape(edge.id) << "_di\" bpmnElement=\"" << xml_escape(edge.id)
       << "\">\n";
    for (const auto& p : layout.edges.at(edge.id)) {
      di << "        ";
      write_point(di, "di:waypoint", p.x, p.y);
      di << "\n";
    }
    di << "      </bpmndi:BPMNEdge>\n";
  }
  di << "    </bpmndi:BPMNPlane>\n  </bpmndi:BPMNDiagram>";

  const XmlElement root = parse_xml(base);
  std::size_t at = root.close_tag_offset;
  std::size_t line_start = at;
  while (line_start > 0 && (base[line_start - 1] == ' ' || base[line_start - 1] == '\t')) --line_start;
  std::string block;
  if (root.close_tag_offset == root.end_offset) {
    throw Error(ErrorCode::kInvalidDocument, "root element is empty");
  }
  if (line_start == 0 || base[line_start - 1] == '\n') {
    at = line_start;
    block = "  " + di.str() + "\n";
  } else {
    block = di.str();
  }
  return base.substr(0, at) + block + base.substr(at);
}

}  // namespace bpmn_assistant
