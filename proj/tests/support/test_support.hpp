#pragma once

// Helpers shared by the unit and acceptance tests. The oracles here are
// written independently of the library code they check.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "bpmn_assistant/flow_graph.hpp"
#include "bpmn_assistant/process_ir.hpp"
#include "bpmn_assistant/xml_tree.hpp"

namespace test_support {

inline std::filesystem::path fixture(const std::string& relative) {
  return std::filesystem::path(BPMN_FIXTURE_DIR) / relative;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline nlohmann::json read_json(const std::filesystem::path& path) { return nlohmann::json::parse(read_text(path)); }

inline bpmn_assistant::ProcessModel supplier_order() {
  return bpmn_assistant::parse_process(read_text(fixture("supplier_order.json")));
}

inline std::vector<std::filesystem::path> json_files(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Sizes cycle through 2..21 so small and nested models both appear.
inline std::size_t seeded_size(std::uint64_t seed) { return 2 + seed % 20; }

// ---------------------------------------------------------------------------
// Graph construction and GED oracle

struct NodeSpec {
  std::string id;
  std::string type;
  std::string label;
};

inline bpmn_assistant::FlowGraph make_graph(const std::vector<NodeSpec>& nodes,
                                            const std::vector<std::pair<std::string, std::string>>& edges) {
  bpmn_assistant::FlowGraph g;
  for (const auto& n : nodes) g.nodes.push_back({n.id, n.type, n.label});
  int k = 0;
  for (const auto& [s, t] : edges) g.edges.push_back({"e" + std::to_string(k++), s, t, std::nullopt});
  return g;
}

inline bpmn_assistant::FlowGraph graph_from_json(const nlohmann::json& doc) {
  bpmn_assistant::FlowGraph g;
  for (const auto& n : doc.at("nodes")) {
    g.nodes.push_back({n.at("id").get<std::string>(), n.at("type").get<std::string>(), n.value("label", "")});
  }
  for (const auto& e : doc.at("edges")) {
    g.edges.push_back({e.at("id").get<std::string>(), e.at("source").get<std::string>(),
                       e.at("target").get<std::string>(), std::nullopt});
  }
  return g;
}

inline std::string oracle_norm(const std::string& label) {
  std::istringstream words(label);
  std::string word, out;
  while (words >> word) {
    std::transform(word.begin(), word.end(), word.begin(), [](unsigned char c) { return std::tolower(c); });
    out += (out.empty() ? "" : " ") + word;
  }
  return out;
}

// Minimum over every injective partial mapping V1 -> V2 of
//   node deletions + node insertions + label/type mismatches
//   + |edge multiset of g1 pushed through the mapping  (symmetric difference)  edge multiset of g2|.
inline long long brute_force_ged(const bpmn_assistant::FlowGraph& g1, const bpmn_assistant::FlowGraph& g2) {
  const std::size_t n1 = g1.nodes.size(), n2 = g2.nodes.size();
  auto index = [](const bpmn_assistant::FlowGraph& g) {
    std::map<std::string, int> out;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) out[g.nodes[i].id] = static_cast<int>(i);
    return out;
  };
  const auto idx1 = index(g1), idx2 = index(g2);
  std::map<std::pair<int, int>, long long> target_edges;
  for (const auto& e : g2.edges) ++target_edges[{idx2.at(e.source), idx2.at(e.target)}];

  std::vector<int> mapping(n1, -1);
  std::vector<bool> used(n2, false);
  long long best = -1;

  std::function<void(std::size_t)> recurse = [&](std::size_t i) {
    if (i == n1) {
      long long cost = 0;
      std::size_t matched = 0;
      for (std::size_t a = 0; a < n1; ++a) {
        if (mapping[a] < 0) {
          ++cost;
          continue;
        }
        ++matched;
        const auto& x = g1.nodes[a];
        const auto& y = g2.nodes[static_cast<std::size_t>(mapping[a])];
        if (x.type != y.type || oracle_norm(x.label) != oracle_norm(y.label)) ++cost;
      }
      cost += static_cast<long long>(n2 - matched);
      std::map<std::pair<int, int>, long long> image;
      for (const auto& e : g1.edges) {
        const int s = mapping[static_cast<std::size_t>(idx1.at(e.source))];
        const int t = mapping[static_cast<std::size_t>(idx1.at(e.target))];
        if (s < 0 || t < 0) {
          ++cost;
        } else {
          ++image[{s, t}];
        }
      }
      std::set<std::pair<int, int>> keys;
      for (const auto& [k, v] : image) keys.insert(k);
      for (const auto& [k, v] : target_edges) keys.insert(k);
      for (const auto& k : keys) {
        const long long a = image.count(k) ? image[k] : 0;
        const long long b = target_edges.count(k) ? target_edges.at(k) : 0;
        cost += a > b ? a - b : b - a;
      }
      if (best < 0 || cost < best) best = cost;
      return;
    }
    mapping[i] = -1;
    recurse(i + 1);
    for (std::size_t j = 0; j < n2; ++j) {
      if (used[j]) continue;
      used[j] = true;
      mapping[i] = static_cast<int>(j);
      recurse(i + 1);
      used[j] = false;
      mapping[i] = -1;
    }
  };
  recurse(0);
  return best;
}

// ---------------------------------------------------------------------------
// Layout checks on DI read back from the XML text

struct Rect {
  double x, y, w, h;
};

struct DiReadback {
  std::map<std::string, Rect> shapes;
  std::map<std::string, std::vector<std::pair<double, double>>> edges;
  std::size_t shape_elements = 0;
  std::size_t edge_elements = 0;
};

inline void collect_di(const bpmn_assistant::XmlElement& element, DiReadback& out) {
  if (element.name == "BPMNShape") {
    ++out.shape_elements;
    for (const auto& child : element.children) {
      if (child.name != "Bounds") continue;
      out.shapes[element.attribute_or("bpmnElement")] = {
          std::stod(child.attribute_or("x")), std::stod(child.attribute_or("y")),
          std::stod(child.attribute_or("width")), std::stod(child.attribute_or("height"))};
    }
  } else if (element.name == "BPMNEdge") {
    ++out.edge_elements;
    auto& points = out.edges[element.attribute_or("bpmnElement")];
    for (const auto& child : element.children) {
      if (child.name == "waypoint") {
        points.emplace_back(std::stod(child.attribute_or("x")), std::stod(child.attribute_or("y")));
      }
    }
  }
  for (const auto& child : element.children) collect_di(child, out);
}

inline DiReadback read_di(const std::string& xml) {
  DiReadback out;
  collect_di(bpmn_assistant::parse_xml(xml), out);
  return out;
}

inline bool rects_overlap(const Rect& a, const Rect& b) {
  return a.x < b.x + b.w && b.x < a.x + a.w && a.y < b.y + b.h && b.y < a.y + a.h;
}

inline bool on_boundary(const Rect& r, double px, double py) {
  constexpr double eps = 1e-6;
  const bool within_x = px >= r.x - eps && px <= r.x + r.w + eps;
  const bool within_y = py >= r.y - eps && py <= r.y + r.h + eps;
  const bool vertical_side = std::abs(px - r.x) < eps || std::abs(px - (r.x + r.w)) < eps;
  const bool horizontal_side = std::abs(py - r.y) < eps || std::abs(py - (r.y + r.h)) < eps;
  return (vertical_side && within_y) || (horizontal_side && within_x);
}

struct LayoutVerdict {
  std::size_t overlaps = 0;
  std::size_t undocked = 0;
  std::size_t missing = 0;  // nodes without a shape or flows without >= 2 waypoints
  std::string first_problem;

  bool ok() const { return overlaps == 0 && undocked == 0 && missing == 0; }
};

inline LayoutVerdict check_layout(const bpmn_assistant::FlowGraph& graph, const std::string& xml_with_di) {
  LayoutVerdict verdict;
  const DiReadback di = read_di(xml_with_di);
  auto note = [&](const std::string& what) {
    if (verdict.first_problem.empty()) verdict.first_problem = what;
  };
  for (const auto& node : graph.nodes) {
    if (!di.shapes.count(node.id)) {
      ++verdict.missing;
      note("no shape for " + node.id);
    }
  }
  std::vector<std::pair<std::string, Rect>> shapes(di.shapes.begin(), di.shapes.end());
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    for (std::size_t j = i + 1; j < shapes.size(); ++j) {
      if (rects_overlap(shapes[i].second, shapes[j].second)) {
        ++verdict.overlaps;
        note("overlap " + shapes[i].first + " / " + shapes[j].first);
      }
    }
  }
  for (const auto& edge : graph.edges) {
    auto it = di.edges.find(edge.id);
    if (it == di.edges.end() || it->second.size() < 2) {
      ++verdict.missing;
      note("no waypoints for " + edge.id);
      continue;
    }
    const auto& first = it->second.front();
    const auto& last = it->second.back();
    if (!di.shapes.count(edge.source) || !di.shapes.count(edge.target)) continue;
    if (!on_boundary(di.shapes.at(edge.source), first.first, first.second) ||
        !on_boundary(di.shapes.at(edge.target), last.first, last.second)) {
      ++verdict.undocked;
      note("undocked " + edge.id);
    }
  }
  return verdict;
}

// Kahn's algorithm: true when some nodes never reach in-degree zero.
inline bool has_cycle(const bpmn_assistant::FlowGraph& graph) {
  std::map<std::string, int> indegree;
  std::multimap<std::string, std::string> out;
  for (const auto& n : graph.nodes) indegree[n.id] = 0;
  for (const auto& e : graph.edges) {
    ++indegree[e.target];
    out.emplace(e.source, e.target);
  }
  std::vector<std::string> ready;
  for (const auto& [id, d] : indegree) {
    if (d == 0) ready.push_back(id);
  }
  std::size_t seen = 0;
  while (!ready.empty()) {
    const std::string id = ready.back();
    ready.pop_back();
    ++seen;
    auto [b, e] = out.equal_range(id);
    for (auto it = b; it != e; ++it) {
      if (--indegree[it->second] == 0) ready.push_back(it->second);
    }
  }
  return seen != indegree.size();
}

}  // namespace test_support
