#pragma once

// Evaluation harness: pairwise similarity over model files and the
// generation/editing benchmark in both modalities, with CSV reports.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bpmn_assistant/assistant.hpp"
#include "bpmn_assistant/similarity.hpp"

namespace bpmn_assistant {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

void write_csv(std::ostream& out, const CsvTable& table);
void write_csv_file(const std::filesystem::path& path, const CsvTable& table);

/// BPMN XML (first non-blank byte '<') or IR JSON. Without `include_joins`
/// merging gateways are contracted away.
FlowGraph graph_from_text(std::string_view text, bool include_joins);
FlowGraph load_graph_file(const std::filesystem::path& path, bool include_joins);

/// Same nodes (type and normalized label), same flows and the same flow names.
bool graphs_equivalent(const FlowGraph& a, const FlowGraph& b);

// ---------------------------------------------------------------------------
// Pairwise evaluation

struct PairSpec {
  std::string id;
  std::filesystem::path reference;
  std::filesystem::path candidate;
};

/// One "reference,candidate" pair per line; blank lines and lines starting
/// with '#' are skipped; relative paths resolve against the manifest folder.
std::vector<PairSpec> read_pairs_manifest(const std::filesystem::path& manifest);

struct PairRow {
  std::string id;
  std::string reference;
  std::string candidate;
  bool ok = false;
  long long ged = 0;
  double rged = 0;
  double similarity = 0;
  bool exact = false;
  std::string error;
};

struct EvaluationReport {
  std::vector<PairRow> rows;  // ordered by pair id
  bool include_joins = false;
  std::size_t failures = 0;
  std::optional<double> mean_similarity;  // over successful pairs
};

EvaluationReport evaluate_pairs(const std::vector<PairSpec>& pairs, bool include_joins, unsigned threads = 1);

CsvTable pairs_table(const EvaluationReport& report);
CsvTable evaluation_summary_table(const EvaluationReport& report);

// ---------------------------------------------------------------------------
// Benchmark

enum class TaskKind { kGenerate, kEdit };

struct BenchmarkTask {
  std::string id;
  TaskKind kind = TaskKind::kGenerate;
  std::string prompt;  // description or instruction
  std::optional<ProcessModel> input;
  std::optional<ProcessModel> expected;
  std::map<Modality, nlohmann::json> mock_scripts;
  std::filesystem::path base_dir;
};

/// Every *.json file in `dir`, ordered by task id.
std::vector<BenchmarkTask> load_benchmark_tasks(const std::filesystem::path& dir);
BenchmarkTask benchmark_task_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir);

struct BenchmarkOptions {
  std::vector<std::string> models{std::string(kMockModel)};
  std::vector<Modality> modalities{Modality::kJson, Modality::kXml};
  // Serve every task from its embedded mock script; otherwise `providers`.
  bool use_mock_scripts = true;
  std::shared_ptr<ProviderRegistry> providers;
  AssistantConfig assistant;
  bool include_joins = false;
  unsigned threads = 1;
};

struct TaskOutcome {
  std::string task_id;
  TaskKind kind = TaskKind::kGenerate;
  Modality modality = Modality::kJson;
  std::string model;
  bool success = false;
  std::optional<double> score;  // generation similarity to the expected model
  int attempts = 0;
  double latency_s = 0;
  long long input_tokens = 0;
  long long output_tokens = 0;
  std::string error;
};

struct BenchmarkReport {
  std::vector<TaskOutcome> outcomes;  // ordered by task id, model, modality
  std::vector<std::string> models;
  std::vector<Modality> modalities;
};

TaskOutcome run_task(const BenchmarkTask& task, Modality modality, const std::string& model,
                     const BenchmarkOptions& options);
BenchmarkReport run_benchmark(const std::vector<BenchmarkTask>& tasks, const BenchmarkOptions& options);

CsvTable tasks_table(const BenchmarkReport& report);
CsvTable generation_by_model_table(const BenchmarkReport& report);    // Model, JSON, XML, Failures (JSON), Failures (XML)
CsvTable generation_by_modality_table(const BenchmarkReport& report); // Modality, Average Score, Total Failures
CsvTable generation_cost_table(const BenchmarkReport& report);        // Metric, JSON, XML
CsvTable editing_by_model_table(const BenchmarkReport& report);       // Model, JSON, XML
CsvTable editing_cost_table(const BenchmarkReport& report);           // Metric, JSON, XML

/// Writes tasks.csv and the five summary tables into `dir`; returns the paths.
std::vector<std::filesystem::path> write_benchmark_reports(const BenchmarkReport& report,
                                                           const std::filesystem::path& dir);

}  // namespace bpmn_assistant
