#include "bpmn_assistant/similarity.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <queue>
#include <stdexcept>
#include <tuple>

#include "bpmn_assistant/flow_compiler.hpp"
#include "bpmn_assistant/text_util.hpp"

namespace bpmn_assistant {

int CostModel::node_substitute(const FlowNode& a, const FlowNode& b) const {
  return a.type == b.type && normalize_label(a.label) == normalize_label(b.label) ? 0 : node_mismatch;
}

namespace {

using Mapping = std::vector<std::optional<std::size_t>>;

// Edge multiplicities, since a decision may route two branches to one node.
struct EdgeCounts {
  std::size_t n = 0;
  std::vector<int> count;  // n * n

  explicit EdgeCounts(const FlowGraph& g) : n(g.nodes.size()), count(n * n, 0) {
    for (const auto& edge : g.edges) {
      auto s = g.index_of(edge.source);
      auto t = g.index_of(edge.target);
      if (s && t) ++count[*s * n + *t];
    }
  }
  int operator()(std::size_t s, std::size_t t) const { return count[s * n + t]; }
};

long long edge_difference(int in_g1, int in_g2, const CostModel& costs) {
  return in_g1 >= in_g2 ? static_cast<long long>(in_g1 - in_g2) * costs.edge_delete
                        : static_cast<long long>(in_g2 - in_g1) * costs.edge_insert;
}

// Cost contributed when node k of g1 is decided, given the decisions for
// nodes 0..k-1: its own node cost plus every edge between k and 0..k.
long long step_cost(const FlowGraph& g1, const FlowGraph& g2, const EdgeCounts& e1, const EdgeCounts& e2,
                    const Mapping& mapping, std::size_t k, const CostModel& costs) {
  long long cost = mapping[k] ? costs.node_substitute(g1.nodes[k], g2.nodes[*mapping[k]]) : costs.node_delete;
  for (std::size_t i = 0; i <= k; ++i) {
    const bool both = mapping[i] && mapping[k];
    if (both) {
      cost += edge_difference(e1(i, k), e2(*mapping[i], *mapping[k]), costs);
      if (i != k) cost += edge_difference(e1(k, i), e2(*mapping[k], *mapping[i]), costs);
    } else {
      cost += static_cast<long long>(e1(i, k)) * costs.edge_delete;
      if (i != k) cost += static_cast<long long>(e1(k, i)) * costs.edge_delete;
    }
  }
  return cost;
}

// Insertion of g2 nodes outside the image and every g2 edge touching them.
long long completion_cost(const FlowGraph& g2, const EdgeCounts& e2, const std::vector<bool>& used,
                          const CostModel& costs) {
  long long cost = 0;
  for (std::size_t j = 0; j < g2.nodes.size(); ++j) {
    if (!used[j]) cost += costs.node_insert;
  }
  for (std::size_t s = 0; s < g2.nodes.size(); ++s) {
    for (std::size_t t = 0; t < g2.nodes.size(); ++t) {
      if (!used[s] || !used[t]) cost += static_cast<long long>(e2(s, t)) * costs.edge_insert;
    }
  }
  return cost;
}

using LabelKey = std::pair<std::string, std::string>;

LabelKey key_of(const FlowNode& node) { return {node.type, normalize_label(node.label)}; }

}  // namespace

long long mapping_cost(const FlowGraph& g1, const FlowGraph& g2, const Mapping& mapping, const CostModel& costs) {
  const EdgeCounts e1(g1);
  const EdgeCounts e2(g2);
  std::vector<bool> used(g2.nodes.size(), false);
  long long cost = 0;
  for (std::size_t k = 0; k < g1.nodes.size(); ++k) {
    cost += step_cost(g1, g2, e1, e2, mapping, k, costs);
    if (mapping[k]) used[*mapping[k]] = true;
  }
  return cost + completion_cost(g2, e2, used, costs);
}

GedResult ged_exact(const FlowGraph& g1, const FlowGraph& g2, const CostModel& costs) {
  const std::size_t n1 = g1.nodes.size();
  const std::size_t n2 = g2.nodes.size();
  const EdgeCounts e1(g1);
  const EdgeCounts e2(g2);
  const long long unit = std::min({costs.node_insert, costs.node_delete, costs.node_mismatch});
  if (n1 == 0) return GedResult{completion_cost(g2, e2, std::vector<bool>(n2, false), costs), true, {}};

  std::vector<LabelKey> keys1;
  std::vector<LabelKey> keys2;
  for (const auto& node : g1.nodes) keys1.push_back(key_of(node));
  for (const auto& node : g2.nodes) keys2.push_back(key_of(node));

  struct State {
    long long cost;  // g: exact cost of decided nodes and edges among them
    long long bound;  // g + admissible estimate
    Mapping mapping;  // decisions for g1 nodes 0..depth-1
    std::vector<bool> used;
  };
  auto heuristic = [&](const State& s) {
    // Every remaining node on either side costs at least `unit` unless it
    // can be paired with an identically labeled node on the other side.
    const std::size_t depth = s.mapping.size();
    std::map<LabelKey, long long> left;
    for (std::size_t i = depth; i < n1; ++i) ++left[keys1[i]];
    long long remaining2 = 0;
    long long shared = 0;
    for (std::size_t j = 0; j < n2; ++j) {
      if (s.used[j]) continue;
      ++remaining2;
      auto it = left.find(keys2[j]);
      if (it != left.end() && it->second > 0) {
        --it->second;
        ++shared;
      }
    }
    const long long remaining1 = static_cast<long long>(n1 - depth);
    return unit * (std::max(remaining1, remaining2) - shared);
  };
  auto worse = [](const State& a, const State& b) {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.mapping.size() < b.mapping.size();
  };
  std::priority_queue<State, std::vector<State>, decltype(worse)> open(worse);

  State root{0, 0, {}, std::vector<bool>(n2, false)};
  root.bound = heuristic(root);
  open.push(std::move(root));
  while (!open.empty()) {
    State state = open.top();
    open.pop();
    const std::size_t k = state.mapping.size();
    if (k == n1) {
      // Completion cost is folded in when the last decision is made, so the
      // first complete state popped is optimal.
      return GedResult{state.cost, true, std::move(state.mapping)};
    }
    auto expand = [&](std::optional<std::size_t> choice) {
      State child{state.cost, 0, state.mapping, state.used};
      child.mapping.push_back(choice);
      if (choice) child.used[*choice] = true;
      child.cost += step_cost(g1, g2, e1, e2, child.mapping, k, costs);
      if (k + 1 == n1) child.cost += completion_cost(g2, e2, child.used, costs);
      child.bound = child.cost + (k + 1 == n1 ? 0 : heuristic(child));
      open.push(std::move(child));
    };
    for (std::size_t j = 0; j < n2; ++j) {
      if (!state.used[j]) expand(j);
    }
    expand(std::nullopt);
  }
  throw std::logic_error("edit distance search exhausted");
}

GedResult ged_greedy(const FlowGraph& g1, const FlowGraph& g2, const CostModel& costs) {
  const std::size_t n1 = g1.nodes.size();
  const std::size_t n2 = g2.nodes.size();
  std::vector<int> in1(n1, 0), out1(n1, 0), in2(n2, 0), out2(n2, 0);
  for (const auto& e : g1.edges) {
    if (auto s = g1.index_of(e.source)) ++out1[*s];
    if (auto t = g1.index_of(e.target)) ++in1[*t];
  }
  for (const auto& e : g2.edges) {
    if (auto s = g2.index_of(e.source)) ++out2[*s];
    if (auto t = g2.index_of(e.target)) ++in2[*t];
  }

  std::vector<std::tuple<int, int, std::size_t, std::size_t>> candidates;
  for (std::size_t i = 0; i < n1; ++i) {
    for (std::size_t j = 0; j < n2; ++j) {
      const int sub = costs.node_substitute(g1.nodes[i], g2.nodes[j]);
      if (sub >= costs.node_delete + costs.node_insert) continue;
      candidates.emplace_back(sub, std::abs(in1[i] - in2[j]) + std::abs(out1[i] - out2[j]), i, j);
    }
  }
  std::sort(candidates.begin(), candidates.end());

  Mapping mapping(n1);
  std::vector<bool> used(n2, false);
  for (const auto& [sub, degree, i, j] : candidates) {
    if (mapping[i] || used[j]) continue;
    mapping[i] = j;
    used[j] = true;
  }
  const long long cost = mapping_cost(g1, g2, mapping, costs);
  return GedResult{cost, false, std::move(mapping)};
}

GedResult ged(const FlowGraph& g1, const FlowGraph& g2, const CostModel& costs) {
  if (g1.nodes.size() + g2.nodes.size() <= kExactNodeLimit) return ged_exact(g1, g2, costs);
  return ged_greedy(g1, g2, costs);
}

long long ged_to_empty(const FlowGraph& g, const CostModel& costs) {
  return static_cast<long long>(g.nodes.size()) * costs.node_delete +
         static_cast<long long>(g.edges.size()) * costs.edge_delete;
}

Ratio rged_ratio(const FlowGraph& g1, const FlowGraph& g2, const CostModel& costs) {
  const long long denominator = ged_to_empty(g1, costs) + ged_to_empty(g2, costs);
  if (denominator == 0) throw Error(ErrorCode::kBothEmpty, "relative GED is undefined for two empty graphs");
  return Ratio{ged(g1, g2, costs).cost, denominator};
}

double rged(const FlowGraph& g1, const FlowGraph& g2, const CostModel& costs) {
  const Ratio r = rged_ratio(g1, g2, costs);
  return static_cast<double>(r.numerator) / static_cast<double>(r.denominator);
}

double similarity(const FlowGraph& g1, const FlowGraph& g2, const CostModel& costs) {
  const Ratio r = rged_ratio(g1, g2, costs);
  return static_cast<double>(r.denominator - r.numerator) / static_cast<double>(r.denominator);
}

FlowGraph to_flow_graph(const ProcessModel& model) {
  ValidationReport report = validate(model);
  if (!report.ok()) throw ValidationError(ErrorCode::kInvalidModel, std::move(report));
  return to_graph(compile_flows(model));
}

}  // namespace bpmn_assistant
