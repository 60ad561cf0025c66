#include <doctest.h>

#include <sstream>

#include "bpmn_assistant/harness.hpp"
#include "test_support.hpp"

using namespace bpmn_assistant;
using test_support::fixture;

namespace {

const TaskOutcome& outcome_for(const BenchmarkReport& report, const std::string& id, Modality modality) {
  for (const auto& o : report.outcomes) {
    if (o.task_id == id && o.modality == modality) return o;
  }
  throw std::runtime_error("no outcome for " + id);
}

// Scripted latency of the first `attempts` replies, repeating the last one.
double scripted_seconds(const nlohmann::json& rules, int attempts) {
  const auto& responses = rules.at(0).at("responses");
  double total = 0;
  for (int i = 0; i < attempts; ++i) {
    const auto& r = responses.at(std::min<std::size_t>(static_cast<std::size_t>(i), responses.size() - 1));
    total += r.value("latency_ms", 0.0);
  }
  return total / 1000.0;
}

}  // namespace

TEST_CASE("CSV quoting") {
  std::ostringstream out;
  write_csv(out, CsvTable{{"a", "b"}, {{"plain", "with, comma"}, {"say \"hi\"", ""}}});
  CHECK(out.str() == "a,b\nplain,\"with, comma\"\n\"say \"\"hi\"\"\",\n");
}

TEST_CASE("graph loading accepts both formats and contracts joins by default") {
  const FlowGraph from_json = load_graph_file(fixture("supplier_order.json"), true);
  const FlowGraph from_xml = graph_from_text(to_bpmn_xml(test_support::supplier_order()), true);
  CHECK(from_json == from_xml);
  CHECK(load_graph_file(fixture("supplier_order.json"), false).nodes.size() == 7);
  CHECK(graphs_equivalent(from_json, from_xml));
  CHECK_FALSE(graphs_equivalent(load_graph_file(fixture("ab/A.json"), false),
                                load_graph_file(fixture("ab/B.json"), false)));
}

TEST_CASE("pair evaluation over the manifest") {
  const auto pairs = read_pairs_manifest(fixture("pairs/manifest.txt"));
  REQUIRE(pairs.size() == 6);
  const EvaluationReport report = evaluate_pairs(pairs, false, 2);
  REQUIRE(report.rows.size() == 6);
  CHECK(report.failures == 1);

  const PairRow& ab = report.rows[0];
  CHECK(ab.ok);
  CHECK(ab.ged == 1);
  CHECK(ab.rged == doctest::Approx(0.1));
  CHECK(ab.similarity == doctest::Approx(0.9));

  CHECK(report.rows[1].ok);
  CHECK(report.rows[1].similarity == 1.0);

  const PairRow& broken = report.rows[5];
  CHECK_FALSE(broken.ok);
  CHECK(broken.error.find("MalformedXml") != std::string::npos);

  const CsvTable table = pairs_table(report);
  CHECK(table.header ==
        std::vector<std::string>{"pair_id", "reference", "candidate", "ged", "rged", "similarity", "exact", "status",
                                 "error"});
  CHECK(table.rows.size() == 6);
  CHECK(evaluation_summary_table(report).rows.at(0).at(3) == "1");

  // threads do not change the result
  const EvaluationReport serial = evaluate_pairs(pairs, false, 1);
  for (std::size_t i = 0; i < serial.rows.size(); ++i) {
    CHECK(serial.rows[i].ged == report.rows[i].ged);
    CHECK(serial.rows[i].ok == report.rows[i].ok);
  }
}

TEST_CASE("mock benchmark in both modalities") {
  const auto tasks = load_benchmark_tasks(fixture("benchmark"));
  REQUIRE(tasks.size() == 12);
  BenchmarkOptions options;
  const BenchmarkReport report = run_benchmark(tasks, options);
  CHECK(report.outcomes.size() == 24);

  for (const auto& task : tasks) {
    for (Modality m : {Modality::kJson, Modality::kXml}) {
      const TaskOutcome& o = outcome_for(report, task.id, m);
      INFO(task.id << " " << to_string(m) << ": " << o.error);
      CHECK(o.success);
      CHECK(o.latency_s == doctest::Approx(scripted_seconds(task.mock_scripts.at(m).at("rules"), o.attempts)));
      CHECK(o.input_tokens > 0);
      CHECK(o.output_tokens > 0);
      if (task.kind == TaskKind::kGenerate) CHECK(o.score.has_value());
    }
  }
  CHECK(outcome_for(report, "gen-06", Modality::kXml).attempts == 2);
  CHECK(outcome_for(report, "gen-06", Modality::kJson).attempts == 1);

  CHECK(generation_by_model_table(report).header ==
        std::vector<std::string>{"Model", "JSON", "XML", "Failures (JSON)", "Failures (XML)"});
  CHECK(generation_by_modality_table(report).header ==
        std::vector<std::string>{"Modality", "Average Score", "Total Failures"});
  CHECK(generation_cost_table(report).rows.at(0).at(0) == "Mean Latency (seconds)");
  CHECK(editing_by_model_table(report).header == std::vector<std::string>{"Model", "JSON", "XML"});
  CHECK(editing_by_model_table(report).rows.at(0) == std::vector<std::string>{"mock", "1.00", "1.00"});
  CHECK(editing_cost_table(report).rows.at(0).at(0) == "Average Latency (s)");

  const auto dir = std::filesystem::temp_directory_path() / "bpmn_harness_test";
  std::filesystem::remove_all(dir);
  CHECK(write_benchmark_reports(report, dir).size() == 6);
  CHECK(std::filesystem::exists(dir / "tasks.csv"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("single-modality runs mark the other column n/a") {
  auto tasks = load_benchmark_tasks(fixture("benchmark"));
  BenchmarkOptions options;
  options.modalities = {Modality::kJson};
  const BenchmarkReport report = run_benchmark(tasks, options);
  CHECK(report.outcomes.size() == 12);
  CHECK(generation_by_modality_table(report).rows.at(1) == std::vector<std::string>{"XML", "n/a", "n/a"});
}

TEST_CASE("an empty task directory yields empty tables") {
  const auto dir = std::filesystem::temp_directory_path() / "bpmn_empty_tasks";
  std::filesystem::create_directories(dir);
  const auto tasks = load_benchmark_tasks(dir);
  CHECK(tasks.empty());
  const BenchmarkReport report = run_benchmark(tasks, BenchmarkOptions{});
  CHECK(report.outcomes.empty());
  CHECK(tasks_table(report).rows.empty());
  CHECK(generation_by_modality_table(report).rows.at(0).at(1) == "n/a");
  std::filesystem::remove_all(dir);
}
