#include "bpmn_assistant/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "bpmn_assistant/layout.hpp"
#include "bpmn_assistant/mock_provider.hpp"
#include "bpmn_assistant/text_util.hpp"

namespace bpmn_assistant {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kInvalidRequest, "cannot read " + path.string());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::string csv_field(const std::string& value) {
  if (value.find_first_of(",\"\n\r") == std::string::npos) return value;
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string fixed(double value, int digits) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.*f", digits, value);
  return buffer;
}

std::string fixed_or_na(const std::optional<double>& value, int digits) {
  return value ? fixed(*value, digits) : "n/a";
}

std::optional<double> mean(const std::vector<double>& values) {
  if (values.empty()) return std::nullopt;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

// Runs job(i) for i in [0, count) on up to `threads` workers.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& job) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  for (unsigned t = 0; t < threads; ++t) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) job(i);
    });
  }
  for (auto& worker : workers) worker.join();
}

}  // namespace

void write_csv(std::ostream& out, const CsvTable& table) {
  auto write_row = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_field(row[i]);
    out << "\n";
  };
  write_row(table.header);
  for (const auto& row : table.rows) write_row(row);
}

void write_csv_file(const std::filesystem::path& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kInvalidRequest, "cannot write " + path.string());
  write_csv(out, table);
}

FlowGraph graph_from_text(std::string_view text, bool include_joins) {
  const std::string trimmed = trim(text);
  FlowGraph graph = trimmed.starts_with('<') ? import_flow_graph(text) : to_flow_graph(parse_process(text));
  return include_joins ? graph : contract_joins(graph);
}

FlowGraph load_graph_file(const std::filesystem::path& path, bool include_joins) {
  return graph_from_text(read_file(path), include_joins);
}

bool graphs_equivalent(const FlowGraph& a, const FlowGraph& b) {
  if (a.nodes.size() != b.nodes.size() || a.edges.size() != b.edges.size()) return false;

  auto labels_agree = [&](const std::vector<std::optional<std::size_t>>& mapping) {
    using Key = std::tuple<std::size_t, std::size_t, std::string>;
    std::multiset<Key> left;
    std::multiset<Key> right;
    for (const auto& e : a.edges) {
      auto s = a.index_of(e.source);
      auto t = a.index_of(e.target);
      if (!s || !t || !mapping[*s] || !mapping[*t]) return false;
      left.insert({*mapping[*s], *mapping[*t], normalize_label(e.label.value_or(""))});
    }
    for (const auto& e : b.edges) {
      auto s = b.index_of(e.source);
      auto t = b.index_of(e.target);
      if (!s || !t) return false;
      right.insert({*s, *t, normalize_label(e.label.value_or(""))});
    }
    return left == right;
  };

  // Ids usually survive an edit, which makes the correspondence immediate.
  std::vector<std::optional<std::size_t>> by_id(a.nodes.size());
  bool complete = true;
  for (std::size_t i = 0; i < a.nodes.size(); ++i) {
    by_id[i] = b.index_of(a.nodes[i].id);
    complete = complete && by_id[i].has_value();
  }
  if (complete && mapping_cost(a, b, by_id) == 0 && labels_agree(by_id)) return true;

  const GedResult result = ged(a, b);
  return result.cost == 0 && labels_agree(result.mapping);
}

// ---------------------------------------------------------------------------
// Pairwise evaluation

std::vector<PairSpec> read_pairs_manifest(const std::filesystem::path& manifest) {
  std::istringstream in(read_file(manifest));
  const std::filesystem::path base = manifest.parent_path();
  std::vector<PairSpec> pairs;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const std::string text = trim(line);
    if (text.empty() || text.starts_with('#')) continue;
    const auto comma = text.find(',');
    if (comma == std::string::npos) {
      throw Error(ErrorCode::kInvalidRequest,
                  manifest.string() + ":" + std::to_string(line_number) + ": expected 'reference,candidate'");
    }
    auto resolve = [&](std::string path) {
      std::filesystem::path p(trim(path));
      return p.is_absolute() ? p : base / p;
    };
    char id[32];
    std::snprintf(id, sizeof id, "pair-%04zu", pairs.size() + 1);
    pairs.push_back({id, resolve(text.substr(0, comma)), resolve(text.substr(comma + 1))});
  }
  return pairs;
}

EvaluationReport evaluate_pairs(const std::vector<PairSpec>& pairs, bool include_joins, unsigned threads) {
  EvaluationReport report;
  report.include_joins = include_joins;
  report.rows.resize(pairs.size());
  parallel_for(pairs.size(), threads, [&](std::size_t i) {
    PairRow& row = report.rows[i];
    row.id = pairs[i].id;
    row.reference = pairs[i].reference.string();
    row.candidate = pairs[i].candidate.string();
    try {
      const FlowGraph reference = load_graph_file(pairs[i].reference, include_joins);
      const FlowGraph candidate = load_graph_file(pairs[i].candidate, include_joins);
      const long long denominator = ged_to_empty(reference) + ged_to_empty(candidate);
      if (denominator == 0) throw Error(ErrorCode::kBothEmpty, "both graphs are empty");
      const GedResult result = ged(reference, candidate);
      const Ratio ratio{result.cost, denominator};
      row.ged = result.cost;
      row.exact = result.exact;
      row.rged = static_cast<double>(ratio.numerator) / static_cast<double>(ratio.denominator);
      row.similarity =
          static_cast<double>(ratio.denominator - ratio.numerator) / static_cast<double>(ratio.denominator);
      row.ok = true;
    } catch (const Error& e) {
      row.error = std::string(to_string(e.code())) + ": " + e.what();
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });
  std::sort(report.rows.begin(), report.rows.end(), [](const PairRow& a, const PairRow& b) { return a.id < b.id; });

  std::vector<double> scores;
  for (const auto& row : report.rows) {
    if (row.ok) {
      scores.push_back(row.similarity);
    } else {
      ++report.failures;
    }
  }
  report.mean_similarity = mean(scores);
  return report;
}

CsvTable pairs_table(const EvaluationReport& report) {
  CsvTable table{{"pair_id", "reference", "candidate", "ged", "rged", "similarity", "exact", "status", "error"}, {}};
  for (const auto& row : report.rows) {
    if (row.ok) {
      table.rows.push_back({row.id, row.reference, row.candidate, std::to_string(row.ged), format_number(row.rged),
                            format_number(row.similarity), row.exact ? "true" : "false", "ok", ""});
    } else {
      table.rows.push_back({row.id, row.reference, row.candidate, "", "", "", "", "failed", row.error});
    }
  }
  return table;
}

CsvTable evaluation_summary_table(const EvaluationReport& report) {
  CsvTable table{{"Joins", "Pairs", "Average Score", "Total Failures"}, {}};
  table.rows.push_back({report.include_joins ? "included" : "contracted", std::to_string(report.rows.size()),
                        fixed_or_na(report.mean_similarity, 2), std::to_string(report.failures)});
  return table;
}

// ---------------------------------------------------------------------------
// Benchmark

namespace {

ProcessModel model_field(const nlohmann::json& doc, const std::string& key, const std::filesystem::path& base) {
  if (doc.contains(key)) return process_from_json(doc.at(key));
  return parse_process(read_file(base / doc.at(key + "_file").get<std::string>()));
}

bool has_model_field(const nlohmann::json& doc, const std::string& key) {
  return doc.contains(key) || doc.contains(key + "_file");
}

}  // namespace

BenchmarkTask benchmark_task_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir) {
  BenchmarkTask task;
  try {
    task.id = doc.at("id").get<std::string>();
    const std::string kind = doc.at("kind").get<std::string>();
    if (kind == "generate") {
      task.kind = TaskKind::kGenerate;
      task.prompt = doc.at("description").get<std::string>();
    } else if (kind == "edit") {
      task.kind = TaskKind::kEdit;
      task.prompt = doc.at("instruction").get<std::string>();
      task.input = model_field(doc, "input", base_dir);
    } else {
      throw Error(ErrorCode::kInvalidRequest, "unknown task kind '" + kind + "'");
    }
    if (has_model_field(doc, "expected")) task.expected = model_field(doc, "expected", base_dir);
    if (task.kind == TaskKind::kEdit && !task.expected) {
      throw Error(ErrorCode::kInvalidRequest, "editing task needs an expected model");
    }
    const nlohmann::json mock = doc.value("mock", nlohmann::json::object());
    for (const auto& [name, script] : mock.items()) {
      auto modality = modality_from_string(name);
      if (!modality) throw Error(ErrorCode::kInvalidRequest, "unknown modality '" + name + "' in mock scripts");
      task.mock_scripts[*modality] = script;
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidRequest, std::string("malformed benchmark task: ") + e.what());
  }
  task.base_dir = base_dir;
  return task;
}

std::vector<BenchmarkTask> load_benchmark_tasks(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw Error(ErrorCode::kInvalidRequest, dir.string() + " is not a directory");
  std::vector<BenchmarkTask> tasks;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(read_file(entry.path()));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kInvalidRequest, entry.path().string() + ": " + e.what());
    }
    tasks.push_back(benchmark_task_from_json(doc, dir));
  }
  std::sort(tasks.begin(), tasks.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return tasks;
}

TaskOutcome run_task(const BenchmarkTask& task, Modality modality, const std::string& model,
                     const BenchmarkOptions& options) {
  TaskOutcome outcome;
  outcome.task_id = task.id;
  outcome.kind = task.kind;
  outcome.modality = modality;
  outcome.model = model;

  std::shared_ptr<ProviderRegistry> providers = options.providers;
  if (options.use_mock_scripts) {
    providers = std::make_shared<ProviderRegistry>();
    auto script = task.mock_scripts.find(modality);
    if (script != task.mock_scripts.end()) {
      providers->set_mock(std::make_shared<MockProvider>(script->second, task.base_dir), true);
    }
  }
  if (!providers) providers = std::make_shared<ProviderRegistry>();

  Assistant assistant(providers, options.assistant);
  Session session;
  session.id = task.id;
  session.model_name = model;
  session.modality = modality;

  try {
    if (task.kind == TaskKind::kGenerate) {
      const CurrentModel produced = assistant.generate_process(session, task.prompt, modality);
      outcome.success = true;
      if (task.expected) {
        const FlowGraph expected = graph_from_text(serialize_process(*task.expected), options.include_joins);
        const FlowGraph actual = modality == Modality::kJson
                                     ? graph_from_text(serialize_process(std::get<ProcessModel>(produced)),
                                                       options.include_joins)
                                     : graph_from_text(std::get<BpmnDocument>(produced).xml_text,
                                                       options.include_joins);
        outcome.score = similarity(expected, actual);
      }
    } else {
      const FlowGraph expected = to_flow_graph(*task.expected);
      FlowGraph actual;
      if (modality == Modality::kJson) {
        const EditOutcome edit = assistant.propose_edits(session, *task.input, task.prompt);
        actual = to_flow_graph(edit.result.model);
      } else {
        const std::string xml = to_bpmn_xml(*task.input);
        const std::string shown = embed_di(xml, compute_layout(BpmnDocument::parse(xml)));
        actual = assistant.edit_xml_direct(session, shown, task.prompt).graph;
      }
      outcome.success = graphs_equivalent(expected, actual);
      if (!outcome.success) outcome.error = "result differs from the expected model";
    }
  } catch (const std::exception& e) {
    outcome.success = false;
    outcome.error = e.what();
  }

  for (const auto& attempt : session.attempts) {
    outcome.latency_s += attempt.latency_ms / 1000.0;
    outcome.input_tokens += attempt.input_tokens;
    outcome.output_tokens += attempt.output_tokens;
  }
  outcome.attempts = static_cast<int>(session.attempts.size());
  return outcome;
}

BenchmarkReport run_benchmark(const std::vector<BenchmarkTask>& tasks, const BenchmarkOptions& options) {
  struct Job {
    std::size_t task;
    std::string model;
    Modality modality;
  };
  std::vector<Job> jobs;
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    for (const auto& model : options.models) {
      for (Modality modality : options.modalities) jobs.push_back({t, model, modality});
    }
  }
  BenchmarkReport report;
  report.models = options.models;
  report.modalities = options.modalities;
  report.outcomes.resize(jobs.size());
  parallel_for(jobs.size(), options.threads, [&](std::size_t i) {
    report.outcomes[i] = run_task(tasks[jobs[i].task], jobs[i].modality, jobs[i].model, options);
  });
  return report;
}

namespace {

struct Aggregate {
  std::size_t total = 0;
  std::size_t failures = 0;
  std::vector<double> scores;
  std::vector<double> latency;
  std::vector<double> input_tokens;
  std::vector<double> output_tokens;
};

Aggregate aggregate(const BenchmarkReport& report, TaskKind kind, Modality modality,
                    const std::optional<std::string>& model = std::nullopt) {
  Aggregate out;
  for (const auto& o : report.outcomes) {
    if (o.kind != kind || o.modality != modality || (model && o.model != *model)) continue;
    ++out.total;
    if (!o.success) {
      ++out.failures;
      continue;
    }
    if (o.score) out.scores.push_back(*o.score);
    out.latency.push_back(o.latency_s);
    out.input_tokens.push_back(static_cast<double>(o.input_tokens));
    out.output_tokens.push_back(static_cast<double>(o.output_tokens));
  }
  return out;
}

bool ran(const BenchmarkReport& report, Modality modality) {
  return std::find(report.modalities.begin(), report.modalities.end(), modality) != report.modalities.end();
}

std::string display(Modality modality) { return modality == Modality::kJson ? "JSON" : "XML"; }

CsvTable cost_table(const BenchmarkReport& report, TaskKind kind, const std::string& latency_label) {
  CsvTable table{{"Metric", "JSON", "XML"}, {}};
  const Aggregate json = aggregate(report, kind, Modality::kJson);
  const Aggregate xml = aggregate(report, kind, Modality::kXml);
  auto cell = [&](const Aggregate& a, Modality m, const std::vector<double> Aggregate::*field) {
    return ran(report, m) ? fixed_or_na(mean(a.*field), 2) : "n/a";
  };
  table.rows.push_back({latency_label, cell(json, Modality::kJson, &Aggregate::latency),
                        cell(xml, Modality::kXml, &Aggregate::latency)});
  table.rows.push_back({"Average Input Tokens", cell(json, Modality::kJson, &Aggregate::input_tokens),
                        cell(xml, Modality::kXml, &Aggregate::input_tokens)});
  table.rows.push_back({"Average Output Tokens", cell(json, Modality::kJson, &Aggregate::output_tokens),
                        cell(xml, Modality::kXml, &Aggregate::output_tokens)});
  return table;
}

}  // namespace

CsvTable tasks_table(const BenchmarkReport& report) {
  CsvTable table{{"task_id", "kind", "modality", "model", "success", "score", "attempts", "latency_s",
                  "input_tokens", "output_tokens", "error"},
                 {}};
  std::vector<const TaskOutcome*> ordered;
  for (const auto& o : report.outcomes) ordered.push_back(&o);
  std::stable_sort(ordered.begin(), ordered.end(), [](const TaskOutcome* a, const TaskOutcome* b) {
    return std::tie(a->task_id, a->model, a->modality) < std::tie(b->task_id, b->model, b->modality);
  });
  for (const TaskOutcome* o : ordered) {
    table.rows.push_back({o->task_id, o->kind == TaskKind::kGenerate ? "generate" : "edit",
                          std::string(to_string(o->modality)), o->model, o->success ? "true" : "false",
                          o->score ? format_number(*o->score) : "", std::to_string(o->attempts),
                          format_number(o->latency_s), std::to_string(o->input_tokens),
                          std::to_string(o->output_tokens), o->error});
  }
  return table;
}

CsvTable generation_by_model_table(const BenchmarkReport& report) {
  CsvTable table{{"Model", "JSON", "XML", "Failures (JSON)", "Failures (XML)"}, {}};
  for (const auto& model : report.models) {
    std::vector<std::string> row{model};
    std::vector<std::string> failures;
    for (Modality m : {Modality::kJson, Modality::kXml}) {
      const Aggregate a = aggregate(report, TaskKind::kGenerate, m, model);
      row.push_back(ran(report, m) ? fixed_or_na(mean(a.scores), 2) : "n/a");
      failures.push_back(ran(report, m) ? std::to_string(a.failures) : "n/a");
    }
    row.insert(row.end(), failures.begin(), failures.end());
    table.rows.push_back(std::move(row));
  }
  return table;
}

CsvTable generation_by_modality_table(const BenchmarkReport& report) {
  CsvTable table{{"Modality", "Average Score", "Total Failures"}, {}};
  for (Modality m : {Modality::kJson, Modality::kXml}) {
    if (!ran(report, m)) {
      table.rows.push_back({display(m), "n/a", "n/a"});
      continue;
    }
    const Aggregate a = aggregate(report, TaskKind::kGenerate, m);
    table.rows.push_back({display(m), fixed_or_na(mean(a.scores), 2), std::to_string(a.failures)});
  }
  return table;
}

CsvTable generation_cost_table(const BenchmarkReport& report) {
  return cost_table(report, TaskKind::kGenerate, "Mean Latency (seconds)");
}

CsvTable editing_by_model_table(const BenchmarkReport& report) {
  CsvTable table{{"Model", "JSON", "XML"}, {}};
  for (const auto& model : report.models) {
    std::vector<std::string> row{model};
    for (Modality m : {Modality::kJson, Modality::kXml}) {
      const Aggregate a = aggregate(report, TaskKind::kEdit, m, model);
      if (!ran(report, m) || a.total == 0) {
        row.push_back("n/a");
      } else {
        row.push_back(fixed(static_cast<double>(a.total - a.failures) / static_cast<double>(a.total), 2));
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

CsvTable editing_cost_table(const BenchmarkReport& report) {
  return cost_table(report, TaskKind::kEdit, "Average Latency (s)");
}

std::vector<std::filesystem::path> write_benchmark_reports(const BenchmarkReport& report,
                                                           const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const std::vector<std::pair<std::string, CsvTable>> files = {
      {"tasks.csv", tasks_table(report)},
      {"generation_by_model.csv", generation_by_model_table(report)},
      {"generation_by_modality.csv", generation_by_modality_table(report)},
      {"generation_cost.csv", generation_cost_table(report)},
      {"editing_by_model.csv", editing_by_model_table(report)},
      {"editing_cost.csv", editing_cost_table(report)},
  };
  std::vector<std::filesystem::path> written;
  for (const auto& [name, table] : files) {
    write_csv_file(dir / name, table);
    written.push_back(dir / name);
  }
  return written;
}

}  // namespace bpmn_assistant
