#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bpmn_assistant {

struct FlowNode {
  std::string id;
  std::string type;   // BPMN local element name, e.g. "userTask"
  std::string label;  // name attribute, empty when absent

  bool operator==(const FlowNode&) const = default;
};

struct FlowEdge {
  std::string id;
  std::string source;
  std::string target;
  std::optional<std::string> label;  // flow name (branch condition)

  bool operator==(const FlowEdge&) const = default;
};

/// Directed labeled graph of flow nodes and sequence flows. Node and edge
/// vectors keep document order; several edges may join the same node pair.
struct FlowGraph {
  std::vector<FlowNode> nodes;
  std::vector<FlowEdge> edges;

  bool empty() const { return nodes.empty() && edges.empty(); }
  std::optional<std::size_t> index_of(std::string_view id) const;
  const FlowNode* find(std::string_view id) const;

  bool operator==(const FlowGraph&) const = default;
};

/// Removes converging gateways (in-degree >= 2, out-degree <= 1), wiring each
/// predecessor straight to the gateway's successor.
FlowGraph contract_joins(const FlowGraph& graph);

}  // namespace bpmn_assistant
