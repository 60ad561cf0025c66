#include <doctest.h>

#include "bpmn_assistant/similarity.hpp"
#include "bpmn_assistant/xml_codec.hpp"
#include "test_support.hpp"

using namespace bpmn_assistant;
using test_support::fixture;
using test_support::make_graph;

namespace {

std::vector<FlowGraph> small_graphs() {
  std::vector<FlowGraph> out;
  const nlohmann::json doc = test_support::read_json(fixture("ged_small_graphs.json"));
  for (const auto& g : doc.at("graphs")) {
    out.push_back(test_support::graph_from_json(g));
  }
  return out;
}

FlowGraph graph_of(const char* relative) {
  return to_flow_graph(parse_process(test_support::read_text(fixture(relative))));
}

}  // namespace

TEST_CASE("exact GED agrees with brute force on every small pair") {
  const auto graphs = small_graphs();
  REQUIRE(graphs.size() >= 18);
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    for (std::size_t j = i; j < graphs.size(); ++j) {
      const long long oracle = test_support::brute_force_ged(graphs[i], graphs[j]);
      const GedResult result = ged(graphs[i], graphs[j]);
      INFO("pair " << i << "," << j);
      CHECK(result.exact);
      CHECK(result.cost == oracle);
      CHECK(mapping_cost(graphs[i], graphs[j], result.mapping) == result.cost);
      CHECK(ged(graphs[j], graphs[i]).cost == result.cost);
      ++pairs;
    }
  }
  CHECK(pairs >= 153);
}

TEST_CASE("distance to the empty graph counts nodes and edges") {
  const FlowGraph empty;
  for (const auto& g : small_graphs()) {
    const long long expected = static_cast<long long>(g.nodes.size() + g.edges.size());
    CHECK(ged_to_empty(g) == expected);
    CHECK(ged(g, empty).cost == expected);
    CHECK(ged(empty, g).cost == expected);
  }
}

TEST_CASE("identical graphs have distance zero and similarity one") {
  const FlowGraph a = graph_of("supplier_order.json");
  CHECK(rged(a, a) == 0.0);
  CHECK(similarity(a, a) == 1.0);
  for (const auto& g : small_graphs()) {
    if (g.empty()) continue;
    CHECK(ged(g, g).cost == 0);
  }
}

TEST_CASE("relabelled single task: rged 0.1") {
  const FlowGraph a = graph_of("ab/A.json");
  const FlowGraph b = graph_of("ab/B.json");
  REQUIRE(a.nodes.size() == 3);
  REQUIRE(a.edges.size() == 2);
  CHECK(ged(a, b).cost == 1);
  const Ratio r = rged_ratio(a, b);
  CHECK(r.numerator == 1);
  CHECK(r.denominator == 10);
  CHECK(rged(a, b) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(similarity(a, b) == doctest::Approx(0.9).epsilon(1e-12));
}

TEST_CASE("labels compare after case folding and whitespace collapse") {
  const FlowGraph x = make_graph({{"a", "task", "Check   Order "}}, {});
  const FlowGraph y = make_graph({{"b", "task", "check order"}}, {});
  const FlowGraph z = make_graph({{"b", "userTask", "check order"}}, {});
  CHECK(ged(x, y).cost == 0);
  CHECK(ged(x, z).cost == 1);
}

TEST_CASE("edge labels do not count and parallel edges are a multiset") {
  FlowGraph x = make_graph({{"s", "startEvent", ""}, {"e", "endEvent", ""}}, {{"s", "e"}});
  FlowGraph y = x;
  y.edges[0].label = "yes";
  CHECK(ged(x, y).cost == 0);
  FlowGraph doubled = make_graph({{"s", "startEvent", ""}, {"e", "endEvent", ""}}, {{"s", "e"}, {"s", "e"}});
  CHECK(ged(x, doubled).cost == 1);
}

TEST_CASE("two empty graphs have no relative distance") {
  const FlowGraph empty;
  CHECK(ged(empty, empty).cost == 0);
  try {
    rged(empty, empty);
    FAIL("accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kBothEmpty);
  }
  CHECK(rged(empty, graph_of("ab/A.json")) == 1.0);
}

TEST_CASE("greedy upper-bounds the exact search and large inputs fall back to it") {
  const auto graphs = small_graphs();
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    for (std::size_t j = 0; j < graphs.size(); ++j) {
      const GedResult greedy = ged_greedy(graphs[i], graphs[j]);
      CHECK_FALSE(greedy.exact);
      CHECK(greedy.cost >= ged_exact(graphs[i], graphs[j]).cost);
      CHECK(mapping_cost(graphs[i], graphs[j], greedy.mapping) == greedy.cost);
    }
  }

  const FlowGraph a = graph_of("supplier_order.json");
  const GedResult big = ged(a, a);
  CHECK(a.nodes.size() * 2 > kExactNodeLimit);
  CHECK_FALSE(big.exact);
  CHECK(big.cost == 0);

  const FlowGraph six = to_flow_graph(random_process(3, 6));
  if (six.nodes.size() * 2 <= kExactNodeLimit) CHECK(ged(six, six).exact);
}

TEST_CASE("rged stays in the unit interval on random models") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const FlowGraph g1 = to_flow_graph(random_process(seed, 2 + seed % 5));
    const FlowGraph g2 = to_flow_graph(random_process(seed + 1000, 2 + (seed * 7) % 5));
    const double r = rged(g1, g2);
    CHECK(r >= 0.0);
    CHECK(r <= 1.0);
    CHECK(similarity(g1, g2) == doctest::Approx(1.0 - r));
  }
}
