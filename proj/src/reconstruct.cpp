// Rebuilds the block-structured IR from a flow graph.
//
// The parser walks the graph from the start event while consuming nodes in a
// fixed order. That order is first the document order (which for emitted
// files is the IR walk order, so `next` jumps are recovered exactly) and, if
// that fails, a depth-first order in which a merge is visited only after all
// of its forward predecessors. A node that continues a branch but is not the
// next node in order becomes a `next` jump. The result is accepted only if it
// validates and compiles back to the input graph.

#include <algorithm>
#include <map>
#include <set>

#include "bpmn_assistant/flow_compiler.hpp"
#include "bpmn_assistant/xml_codec.hpp"

namespace bpmn_assistant {
namespace {

enum class Context { kTopLevel, kExclusiveBranch, kParallelBranch };

struct Unstructured {
  std::string message;
};

struct Tail {
  std::optional<std::size_t> join;
  std::optional<std::string> next;
};

class Rebuilder {
 public:
  Rebuilder(const FlowGraph& graph, std::vector<std::size_t> order)
      : graph_(graph), order_(std::move(order)), placed_(graph.nodes.size(), false) {
    outgoing_.resize(graph.nodes.size());
    in_degree_.resize(graph.nodes.size(), 0);
    for (std::size_t e = 0; e < graph.edges.size(); ++e) {
      auto source = graph.index_of(graph.edges[e].source);
      auto target = graph.index_of(graph.edges[e].target);
      if (!source || !target) fail("flow '" + graph.edges[e].id + "' has an unknown endpoint");
      outgoing_[*source].push_back(e);
      ++in_degree_[*target];
    }
  }

  ProcessModel run() {
    if (order_.empty() || graph_.nodes[order_.front()].type != "startEvent") {
      fail("the process must begin with its start event");
    }
    ProcessModel model;
    Tail tail;
    model.process = parse_sequence(order_.front(), Context::kTopLevel, {}, tail);
    if (cursor_ != order_.size()) {
      fail("'" + graph_.nodes[order_[cursor_]].id + "' does not fit the block structure");
    }
    ValidationReport report = validate(model);
    if (!report.ok()) fail("reconstructed model is invalid: " + report.summary());
    check_round_trip(model);
    return model;
  }

 private:
  [[noreturn]] static void fail(std::string message) { throw Unstructured{std::move(message)}; }

  const std::string& id(std::size_t node) const { return graph_.nodes[node].id; }
  const std::string& type(std::size_t node) const { return graph_.nodes[node].type; }

  std::size_t target(std::size_t edge) const { return *graph_.index_of(graph_.edges[edge].target); }

  bool is_gateway(std::size_t node) const {
    return type(node) == "exclusiveGateway" || type(node) == "parallelGateway";
  }
  bool is_join(std::size_t node) const { return is_gateway(node) && outgoing_[node].size() <= 1; }
  bool at_cursor(std::size_t node) const { return cursor_ < order_.size() && order_[cursor_] == node; }

  void consume(std::size_t node) {
    if (!at_cursor(node)) fail("'" + id(node) + "' appears out of block order");
    placed_[node] = true;
    ++cursor_;
  }

  std::optional<std::size_t> single_successor(std::size_t node) const {
    if (outgoing_[node].size() > 1) fail("'" + id(node) + "' splits the flow without a gateway");
    if (outgoing_[node].empty()) return std::nullopt;
    return target(outgoing_[node].front());
  }

  Sequence parse_sequence(std::size_t entry, Context context, const std::set<std::size_t>& stoppers, Tail& tail) {
    Sequence sequence;
    std::size_t current = entry;
    while (true) {
      consume(current);
      std::optional<std::size_t> continuation;
      sequence.push_back(build(current, stoppers, continuation));
      const Element& element = sequence.back();

      if (!continuation) {
        const auto* gateway = std::get_if<ExclusiveGateway>(&element.node);
        if (gateway && !gateway->has_join && cursor_ < order_.size()) {
          // Elements after a join-less decision are reached only via jumps.
          const std::size_t candidate = order_[cursor_];
          if (!placed_[candidate] && !is_join(candidate) && !stoppers.contains(candidate)) {
            current = candidate;
            continue;
          }
        }
        return sequence;
      }

      const std::size_t next = *continuation;
      if (is_join(next)) {
        if (placed_[next] || context == Context::kTopLevel) fail("'" + id(next) + "' merges flows it did not split");
        tail.join = next;
        return sequence;
      }
      if (!placed_[next] && at_cursor(next) && !stoppers.contains(next)) {
        current = next;
        continue;
      }
      if (context != Context::kExclusiveBranch) {
        fail("flow from '" + id(current) + "' to '" + id(next) + "' leaves its block");
      }
      tail.next = id(next);
      return sequence;
    }
  }

  Element build(std::size_t node, const std::set<std::size_t>& stoppers, std::optional<std::size_t>& continuation) {
    const std::string& node_type = type(node);
    const std::string& label = graph_.nodes[node].label;
    const auto element_type = element_type_from_string(node_type);
    if (!element_type) fail("unsupported element '" + node_type + "'");

    if (is_task_type(*element_type)) {
      continuation = single_successor(node);
      return Task{*element_type, id(node), label};
    }
    if (*element_type == ElementType::kStartEvent || *element_type == ElementType::kEndEvent) {
      continuation = single_successor(node);
      if (*element_type == ElementType::kEndEvent && continuation) fail("end event '" + id(node) + "' has an outgoing flow");
      std::optional<std::string> event_label;
      if (!label.empty()) event_label = label;
      return Event{*element_type, id(node), event_label};
    }
    if (outgoing_[node].size() <= 1) fail("'" + id(node) + "' merges flows it did not split");

    std::vector<std::size_t> targets;
    for (std::size_t edge : outgoing_[node]) targets.push_back(target(edge));

    std::set<std::size_t> joins;
    std::size_t merged = 0;
    auto stoppers_after = [&](std::size_t i) {
      std::set<std::size_t> out = stoppers;
      out.insert(targets.begin() + static_cast<std::ptrdiff_t>(i) + 1, targets.end());
      return out;
    };

    if (*element_type == ElementType::kExclusiveGateway) {
      ExclusiveGateway gateway;
      gateway.id = id(node);
      if (!label.empty()) gateway.label = label;
      for (std::size_t i = 0; i < targets.size(); ++i) {
        const std::size_t x = targets[i];
        const auto branch_stoppers = stoppers_after(i);
        Branch branch;
        branch.condition = graph_.edges[outgoing_[node][i]].label.value_or("");
        if (is_join(x)) {
          if (placed_[x]) fail("'" + id(x) + "' merges flows it did not split");
          joins.insert(x);
          ++merged;
        } else if (placed_[x]) {
          branch.next = id(x);
        } else if (at_cursor(x) && !branch_stoppers.contains(x)) {
          Tail tail;
          branch.path = parse_sequence(x, Context::kExclusiveBranch, branch_stoppers, tail);
          branch.next = tail.next;
          if (tail.join) {
            joins.insert(*tail.join);
            ++merged;
          }
        } else {
          branch.next = id(x);
        }
        gateway.branches.push_back(std::move(branch));
      }
      gateway.has_join = close_block(node, joins, merged, continuation);
      return gateway;
    }

    ParallelGateway gateway;
    gateway.id = id(node);
    for (std::size_t i = 0; i < targets.size(); ++i) {
      const std::size_t x = targets[i];
      if (is_join(x)) fail("parallel gateway '" + id(node) + "' has an empty branch");
      if (placed_[x]) fail("parallel branch of '" + id(node) + "' re-enters '" + id(x) + "'");
      Tail tail;
      gateway.branches.push_back(parse_sequence(x, Context::kParallelBranch, stoppers_after(i), tail));
      if (tail.join) {
        joins.insert(*tail.join);
        ++merged;
      }
    }
    if (!close_block(node, joins, merged, continuation)) {
      fail("parallel gateway '" + id(node) + "' has no join");
    }
    return gateway;
  }

  // Consumes the split's join, if any; returns whether one exists.
  bool close_block(std::size_t split, const std::set<std::size_t>& joins, std::size_t merged,
                   std::optional<std::size_t>& continuation) {
    if (joins.empty()) {
      continuation.reset();
      return false;
    }
    if (joins.size() > 1) fail("branches of '" + id(split) + "' converge on different merges");
    const std::size_t join = *joins.begin();
    if (type(join) != type(split)) fail("'" + id(split) + "' is closed by a merge of another type");
    if (in_degree_[join] != merged) fail("merge '" + id(join) + "' is shared with another split");
    consume(join);
    join_split_[join] = split;
    continuation = single_successor(join);
    return true;
  }

  // The rebuilt IR must compile back to the input graph, with merges renamed
  // to the synthesized join ids. Flow names count only on decision outflows.
  void check_round_trip(const ProcessModel& model) const {
    auto rename = [&](const std::string& node_id) {
      auto index = graph_.index_of(node_id);
      auto it = join_split_.find(*index);
      return it == join_split_.end() ? node_id : id(it->second) + std::string(kJoinSuffix);
    };
    using NodeKey = std::tuple<std::string, std::string, std::string>;
    using EdgeKey = std::tuple<std::string, std::string, std::string>;
    std::multiset<NodeKey> expected_nodes;
    std::multiset<EdgeKey> expected_edges;
    std::set<std::string> splits;
    for (std::size_t n = 0; n < graph_.nodes.size(); ++n) {
      const bool join = join_split_.contains(n);
      expected_nodes.insert({rename(id(n)), type(n), join ? "" : graph_.nodes[n].label});
      if (type(n) == "exclusiveGateway" && !join) splits.insert(id(n));
    }
    for (const auto& edge : graph_.edges) {
      const std::string label = splits.contains(edge.source) ? edge.label.value_or("") : "";
      expected_edges.insert({rename(edge.source), rename(edge.target), label});
    }

    const FlowGraph rebuilt = to_graph(compile_flows(model));
    std::multiset<NodeKey> actual_nodes;
    std::multiset<EdgeKey> actual_edges;
    for (const auto& node : rebuilt.nodes) actual_nodes.insert({node.id, node.type, node.label});
    for (const auto& edge : rebuilt.edges) {
      const std::string label = splits.contains(edge.source) ? edge.label.value_or("") : "";
      actual_edges.insert({edge.source, edge.target, label});
    }
    if (actual_nodes != expected_nodes || actual_edges != expected_edges) {
      fail("the reconstructed process does not reproduce the input flows");
    }
  }

  const FlowGraph& graph_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
  std::vector<bool> placed_;
  std::vector<std::vector<std::size_t>> outgoing_;
  std::vector<std::size_t> in_degree_;
  std::map<std::size_t, std::size_t> join_split_;
};

// Depth-first order over forward edges in which a node is visited once all
// of its forward predecessors have been.
std::vector<std::size_t> structural_order(const FlowGraph& graph) {
  const std::size_t n = graph.nodes.size();
  std::vector<std::vector<std::size_t>> successors(n);
  for (const auto& edge : graph.edges) {
    auto s = graph.index_of(edge.source);
    auto t = graph.index_of(edge.target);
    if (s && t) successors[*s].push_back(*t);
  }

  std::vector<int> state(n, 0);  // 0 new, 1 on stack, 2 done
  std::set<std::pair<std::size_t, std::size_t>> back_edges;
  auto classify = [&](std::size_t root) {
    std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
    state[root] = 1;
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      if (next < successors[node].size()) {
        const std::size_t child = successors[node][next++];
        if (state[child] == 1) {
          back_edges.insert({node, child});
        } else if (state[child] == 0) {
          state[child] = 1;
          stack.push_back({child, 0});
        }
      } else {
        state[node] = 2;
        stack.pop_back();
      }
    }
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (graph.nodes[i].type == "startEvent" && state[i] == 0) classify(i);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (state[i] == 0) classify(i);
  }

  std::vector<std::size_t> waiting(n, 0);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t t : successors[s]) {
      if (!back_edges.contains({s, t})) ++waiting[t];
    }
  }
  std::vector<std::size_t> order;
  std::vector<bool> emitted(n, false);
  std::vector<std::pair<std::size_t, std::size_t>> stack;
  auto visit = [&](std::size_t root) {
    emitted[root] = true;
    order.push_back(root);
    stack.push_back({root, 0});
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      if (next >= successors[node].size()) {
        stack.pop_back();
        continue;
      }
      const std::size_t child = successors[node][next++];
      if (back_edges.contains({node, child}) || emitted[child]) continue;
      if (--waiting[child] == 0) {
        emitted[child] = true;
        order.push_back(child);
        stack.push_back({child, 0});
      }
    }
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (graph.nodes[i].type == "startEvent" && !emitted[i]) visit(i);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!emitted[i]) order.push_back(i);
  }
  return order;
}

}  // namespace

ProcessModel reconstruct_ir(std::string_view xml_text) {
  const FlowGraph graph = import_flow_graph(xml_text);
  for (const auto& node : graph.nodes) {
    if (!element_type_from_string(node.type)) {
      throw Error(ErrorCode::kUnsupportedElement,
                  "element '" + node.id + "' of type '" + node.type + "' is outside the supported set");
    }
  }

  std::vector<std::size_t> document_order(graph.nodes.size());
  for (std::size_t i = 0; i < document_order.size(); ++i) document_order[i] = i;

  std::string diagnostic;
  for (auto order : {document_order, structural_order(graph)}) {
    try {
      return Rebuilder(graph, std::move(order)).run();
    } catch (const Unstructured& e) {
      if (diagnostic.empty()) diagnostic = e.message;
    }
  }
  throw Error(ErrorCode::kUnstructured, "process is not block-structured: " + diagnostic);
}

}  // namespace bpmn_assistant
