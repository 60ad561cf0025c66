#pragma once

// Lowers the block-structured IR to flow nodes and sequence flows. Shared by
// validation (reachability), the XML emitter and the similarity bridge, so
// all three agree on what a model means.

#include <optional>
#include <string>
#include <vector>

#include "bpmn_assistant/flow_graph.hpp"
#include "bpmn_assistant/process_ir.hpp"

namespace bpmn_assistant {

inline constexpr std::string_view kJoinSuffix = "-join";

struct CompiledNode {
  std::string id;
  ElementType type;
  std::optional<std::string> label;
  std::string origin;  // IR element id; for synthesized joins, the split id
  bool synthesized_join = false;
};

struct CompiledFlow {
  std::string id;
  std::string source;
  std::string target;
  std::optional<std::string> name;
};

struct CompiledProcess {
  std::vector<CompiledNode> nodes;  // IR walk order; joins follow their branches
  std::vector<CompiledFlow> flows;  // creation order; split outflows in branch order
  // Sources whose outflow has no successor at the end of the top level.
  std::vector<std::string> open_exits;
  // Exclusive gateways without join whose branches fall through.
  std::vector<std::string> unterminated_gateways;
  // Node ids of parallel joins left without a successor.
  std::vector<std::string> stranded_parallel_joins;
};

/// Total over any model: dangling `next` targets are skipped rather than
/// emitted, so callers can use this on models that fail validation.
CompiledProcess compile_flows(const ProcessModel& model);

FlowGraph to_graph(const CompiledProcess& compiled);

}  // namespace bpmn_assistant
