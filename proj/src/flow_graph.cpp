#include "bpmn_assistant/flow_graph.hpp"

#include <map>
#include <set>

namespace bpmn_assistant {

std::optional<std::size_t> FlowGraph::index_of(std::string_view id) const {
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].id == id) return i;
  }
  return std::nullopt;
}

const FlowNode* FlowGraph::find(std::string_view id) const {
  auto index = index_of(id);
  return index ? &nodes[*index] : nullptr;
}

namespace {

bool is_gateway(const std::string& type) {
  return type == "exclusiveGateway" || type == "parallelGateway" || type == "inclusiveGateway" ||
         type == "eventBasedGateway" || type == "complexGateway";
}

}  // namespace

FlowGraph contract_joins(const FlowGraph& graph) {
  std::map<std::string, int> in_degree;
  std::map<std::string, std::vector<std::string>> successors;
  for (const auto& edge : graph.edges) {
    ++in_degree[edge.target];
    successors[edge.source].push_back(edge.target);
  }
  std::set<std::string> joins;
  for (const auto& node : graph.nodes) {
    if (is_gateway(node.type) && in_degree[node.id] >= 2 && successors[node.id].size() <= 1) {
      joins.insert(node.id);
    }
  }

  // Follows a chain of joins to the first surviving node, if any.
  auto resolve = [&](std::string target) -> std::optional<std::string> {
    std::set<std::string> seen;
    while (joins.contains(target)) {
      if (!seen.insert(target).second) return std::nullopt;
      const auto& next = successors[target];
      if (next.empty()) return std::nullopt;
      target = next.front();
    }
    return target;
  };

  FlowGraph out;
  for (const auto& node : graph.nodes) {
    if (!joins.contains(node.id)) out.nodes.push_back(node);
  }
  for (const auto& edge : graph.edges) {
    if (joins.contains(edge.source)) continue;
    auto target = resolve(edge.target);
    if (!target) continue;
    FlowEdge contracted = edge;
    contracted.target = *target;
    out.edges.push_back(std::move(contracted));
  }
  return out;
}

}  // namespace bpmn_assistant
