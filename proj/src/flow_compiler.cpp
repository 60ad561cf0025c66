#include "bpmn_assistant/flow_compiler.hpp"

#include <set>
#include <unordered_set>

namespace bpmn_assistant {
namespace {

struct Exit {
  std::string source;
  std::optional<std::string> name;
};

class Compiler {
 public:
  explicit Compiler(const ProcessModel& model) : model_(model) {
    for (const auto& id : collect_ids(model)) known_.insert(id);
    reserved_ids_ = known_;
  }

  CompiledProcess run() {
    auto exits = sequence(model_.process, {});
    for (const auto& exit : exits) out_.open_exits.push_back(exit.source);

    std::set<std::string> with_outflow;
    for (const auto& flow : out_.flows) with_outflow.insert(flow.source);
    for (const auto& node : out_.nodes) {
      if (node.synthesized_join && node.type == ElementType::kParallelGateway &&
          !with_outflow.contains(node.id)) {
        out_.stranded_parallel_joins.push_back(node.id);
      }
    }
    return std::move(out_);
  }

 private:
  std::vector<Exit> sequence(const Sequence& seq, std::vector<Exit> incoming) {
    for (const Element& element : seq) incoming = lower(element, std::move(incoming));
    return incoming;
  }

  void connect(const std::vector<Exit>& exits, const std::string& target) {
    for (const auto& exit : exits) {
      out_.flows.push_back({flow_id(exit.source, target), exit.source, target, exit.name});
    }
  }

  std::string flow_id(const std::string& source, const std::string& target) {
    std::string base = "flow_" + source + "_" + target;
    std::string id = base;
    for (int n = 2; reserved_ids_.contains(id); ++n) id = base + "_" + std::to_string(n);
    reserved_ids_.insert(id);
    return id;
  }

  void add_node(const std::string& id, ElementType type, std::optional<std::string> label,
                const std::string& origin, bool join) {
    out_.nodes.push_back({id, type, std::move(label), origin, join});
    reserved_ids_.insert(id);
  }

  std::vector<Exit> lower(const Element& element, std::vector<Exit> incoming) {
    const std::string& id = element.id();
    if (const auto* task = std::get_if<Task>(&element.node)) {
      add_node(id, task->type, task->label, id, false);
      connect(incoming, id);
      return {{id, std::nullopt}};
    }
    if (const auto* event = std::get_if<Event>(&element.node)) {
      add_node(id, event->type, event->label, id, false);
      connect(incoming, id);
      if (event->type == ElementType::kEndEvent) return {};
      return {{id, std::nullopt}};
    }
    if (const auto* gateway = std::get_if<ExclusiveGateway>(&element.node)) {
      add_node(id, ElementType::kExclusiveGateway, gateway->label, id, false);
      connect(incoming, id);
      const std::string join_id = id + std::string(kJoinSuffix);
      std::vector<Exit> fall_through;
      for (const auto& branch : gateway->branches) {
        auto exits = sequence(branch.path, {{id, branch.condition}});
        if (branch.next) {
          if (known_.contains(*branch.next)) connect(exits, *branch.next);
        } else if (gateway->has_join) {
          connect(exits, join_id);
        } else {
          fall_through.insert(fall_through.end(), exits.begin(), exits.end());
        }
      }
      if (gateway->has_join) {
        add_node(join_id, ElementType::kExclusiveGateway, std::nullopt, id, true);
        return {{join_id, std::nullopt}};
      }
      if (!fall_through.empty()) out_.unterminated_gateways.push_back(id);
      return fall_through;
    }
    const auto& gateway = element.as<ParallelGateway>();
    add_node(id, ElementType::kParallelGateway, std::nullopt, id, false);
    connect(incoming, id);
    const std::string join_id = id + std::string(kJoinSuffix);
    for (const auto& branch : gateway.branches) {
      connect(sequence(branch, {{id, std::nullopt}}), join_id);
    }
    add_node(join_id, ElementType::kParallelGateway, std::nullopt, id, true);
    return {{join_id, std::nullopt}};
  }

  const ProcessModel& model_;
  std::unordered_set<std::string> known_;
  std::unordered_set<std::string> reserved_ids_;
  CompiledProcess out_;
};

}  // namespace

CompiledProcess compile_flows(const ProcessModel& model) { return Compiler(model).run(); }

FlowGraph to_graph(const CompiledProcess& compiled) {
  FlowGraph graph;
  graph.nodes.reserve(compiled.nodes.size());
  for (const auto& node : compiled.nodes) {
    graph.nodes.push_back({node.id, std::string(to_string(node.type)), node.label.value_or("")});
  }
  graph.edges.reserve(compiled.flows.size());
  for (const auto& flow : compiled.flows) {
    graph.edges.push_back({flow.id, flow.source, flow.target, flow.name});
  }
  return graph;
}

}  // namespace bpmn_assistant
