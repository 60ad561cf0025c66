#pragma once

// Graph edit distance between flow graphs, the relative GED normalized by
// both graphs' distance to the empty graph, and similarity = 1 - RGED.

#include <cstddef>
#include <optional>
#include <vector>

#include "bpmn_assistant/flow_graph.hpp"
#include "bpmn_assistant/process_ir.hpp"

namespace bpmn_assistant {

/// Unit costs. Node substitution is free when type and normalized label
/// agree; edge substitution is always free.
struct CostModel {
  int node_insert = 1;
  int node_delete = 1;
  int node_mismatch = 1;
  int edge_insert = 1;
  int edge_delete = 1;

  int node_substitute(const FlowNode& a, const FlowNode& b) const;
};

struct GedResult {
  long long cost = 0;
  bool exact = true;
  // mapping[i] = index in g2 matched to node i of g1, or nullopt if deleted.
  std::vector<std::optional<std::size_t>> mapping;
};

inline constexpr std::size_t kExactNodeLimit = 12;

/// Exact best-first search when |V1| + |V2| <= kExactNodeLimit, otherwise a
/// greedy assignment (exact = false) whose cost bounds the optimum from above.
GedResult ged(const FlowGraph& g1, const FlowGraph& g2, const CostModel& costs = {});
GedResult ged_exact(const FlowGraph& g1, const FlowGraph& g2, const CostModel& costs = {});
GedResult ged_greedy(const FlowGraph& g1, const FlowGraph& g2, const CostModel& costs = {});

/// Cost of the edit path induced by a node mapping (nullopt = delete).
long long mapping_cost(const FlowGraph& g1, const FlowGraph& g2,
                       const std::vector<std::optional<std::size_t>>& mapping, const CostModel& costs = {});

/// GED(g, empty) = |V| + |E| under unit costs.
long long ged_to_empty(const FlowGraph& g, const CostModel& costs = {});

/// Throws BothEmpty when both graphs are empty.
double rged(const FlowGraph& g1, const FlowGraph& g2, const CostModel& costs = {});
double similarity(const FlowGraph& g1, const FlowGraph& g2, const CostModel& costs = {});

/// Exact fraction behind rged, for callers that need tolerance zero.
struct Ratio {
  long long numerator = 0;
  long long denominator = 1;
};
Ratio rged_ratio(const FlowGraph& g1, const FlowGraph& g2, const CostModel& costs = {});

/// import_flow_graph(to_bpmn_xml(model)) without the XML detour. Throws
/// ValidationError(kInvalidModel).
FlowGraph to_flow_graph(const ProcessModel& model);

}  // namespace bpmn_assistant
