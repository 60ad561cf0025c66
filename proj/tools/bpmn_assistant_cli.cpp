// Command-line front end: generation and editing, model conversions,
// similarity, the evaluation harness and the HTTP service.

#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include "bpmn_assistant/assistant.hpp"
#include "bpmn_assistant/flow_compiler.hpp"
#include "bpmn_assistant/harness.hpp"
#include "bpmn_assistant/http_server.hpp"
#include "bpmn_assistant/layout.hpp"
#include "bpmn_assistant/mock_provider.hpp"
#include "bpmn_assistant/service.hpp"
#include "bpmn_assistant/similarity.hpp"
#include "bpmn_assistant/text_util.hpp"
#include "bpmn_assistant/xml_codec.hpp"

namespace fs = std::filesystem;
using namespace bpmn_assistant;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitFailure = 2;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kNotFound, "cannot read '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// "-" or empty writes to stdout.
void write_output(const std::string& target, const std::string& text) {
  if (target.empty() || target == "-") {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(target, std::ios::binary);
  if (!out) throw Error(ErrorCode::kNotFound, "cannot write '" + target + "'");
  out << text;
}

bool looks_like_xml(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  return first != std::string_view::npos && text[first] == '<';
}

std::shared_ptr<ProviderRegistry> make_registry(const std::string& mock_script) {
  auto registry = std::make_shared<ProviderRegistry>();
  if (!mock_script.empty()) registry->set_mock(MockProvider::from_file(mock_script), true);
  return registry;
}

Modality modality_or_throw(const std::string& text) {
  auto modality = modality_from_string(text);
  if (!modality) throw Error(ErrorCode::kInvalidRequest, "modality must be json or xml");
  return *modality;
}

std::string model_or_default(const std::string& model, const std::string& mock_script) {
  if (!model.empty()) return model;
  return mock_script.empty() ? "GPT-4o" : std::string(kMockModel);
}

std::string current_to_xml(const CurrentModel& current) {
  if (const auto* model = std::get_if<ProcessModel>(&current)) return to_bpmn_xml(*model);
  return std::get<BpmnDocument>(current).xml_text;
}

void print_report(const ValidationReport& report) {
  for (const auto& issue : report.issues) {
    std::cerr << (issue.severity == Severity::kError ? "error" : "warning") << ": " << issue.code;
    if (issue.element_id) std::cerr << " [" << *issue.element_id << "]";
    std::cerr << " " << issue.message << "\n";
  }
}

json graph_to_json(const FlowGraph& graph) {
  json nodes = json::array();
  for (const auto& n : graph.nodes) nodes.push_back({{"id", n.id}, {"type", n.type}, {"label", n.label}});
  json edges = json::array();
  for (const auto& e : graph.edges) {
    json edge = {{"id", e.id}, {"source", e.source}, {"target", e.target}};
    if (e.label) edge["label"] = *e.label;
    edges.push_back(edge);
  }
  return {{"nodes", nodes}, {"edges", edges}};
}

std::string with_di(const std::string& xml) { return embed_di(xml, compute_layout(BpmnDocument::parse(xml))); }

// IR results go to process.json plus a laid-out process.bpmn; XML results
// only to process.bpmn. Without a directory the XML goes to stdout.
void write_result(const CurrentModel& result, const std::string& out_dir) {
  const std::string xml = with_di(current_to_xml(result));
  if (out_dir.empty()) {
    write_output("", xml);
    return;
  }
  fs::create_directories(out_dir);
  if (const auto* model = std::get_if<ProcessModel>(&result)) {
    write_output((fs::path(out_dir) / "process.json").string(), serialize_process(*model));
  }
  write_output((fs::path(out_dir) / "process.bpmn").string(), xml);
}

void print_usage(const Session& session, const std::string& out_dir) {
  double latency_ms = 0;
  long long input_tokens = 0, output_tokens = 0;
  for (const auto& attempt : session.attempts) {
    latency_ms += attempt.latency_ms;
    input_tokens += attempt.input_tokens;
    output_tokens += attempt.output_tokens;
  }
  std::ostream& out = out_dir.empty() ? std::cerr : std::cout;
  out << "attempts " << session.attempts.size() << "\nlatency_s " << format_number(latency_ms / 1000.0)
      << "\ninput_tokens " << input_tokens << "\noutput_tokens " << output_tokens << "\n";
}

HttpServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BPMN assistant: generate, edit, convert and compare BPMN process models"};
  app.require_subcommand(1);

  std::string mock_script;
  app.add_option("--mock-script", mock_script, "Serve every model from this scripted mock provider")
      ->check(CLI::ExistingFile);

  // generate
  auto* generate = app.add_subcommand("generate", "Generate a process from a description");
  std::string description_path, description, modality_name = "json", model_name, out_dir;
  bool with_layout = false;
  auto* description_file = generate->add_option("description", description_path, "File holding the description")
                                ->check(CLI::ExistingFile);
  generate->add_option("-t,--text", description, "The description itself")->excludes(description_file);
  generate->add_option("--modality", modality_name, "json or xml")->check(CLI::IsMember({"json", "xml"}));
  generate->add_option("--provider,--model", model_name, "Model display name or API id, or mock");
  generate->add_option("-o,--out", out_dir, "Directory for process.json / process.bpmn (default: XML on stdout)");

  // edit
  auto* edit = app.add_subcommand("edit", "Edit a process with a natural-language instruction");
  std::string input_path, instruction, out_path;
  edit->add_option("input", input_path, "IR JSON or BPMN XML file")->required()->check(CLI::ExistingFile);
  edit->add_option("instruction", instruction, "What to change")->required();
  edit->add_option("--modality", modality_name, "json or xml")->check(CLI::IsMember({"json", "xml"}));
  edit->add_option("--provider,--model", model_name, "Model display name or API id, or mock");
  edit->add_option("-o,--out", out_dir, "Directory for process.json / process.bpmn (default: XML on stdout)");

  // validate
  auto* validate_cmd = app.add_subcommand("validate", "Validate an IR JSON or BPMN XML file");
  validate_cmd->add_option("input", input_path)->required()->check(CLI::ExistingFile);

  // compile
  auto* compile = app.add_subcommand("compile", "Convert IR JSON to BPMN XML");
  compile->add_option("input", input_path)->required()->check(CLI::ExistingFile);
  compile->add_flag("--layout", with_layout, "Embed diagram interchange");
  compile->add_option("-o,--out", out_path);

  // import
  auto* import = app.add_subcommand("import", "Print the flow graph of a BPMN XML file as JSON");
  bool include_joins = false;
  import->add_option("input", input_path)->required()->check(CLI::ExistingFile);
  import->add_flag("--include-joins", include_joins, "Keep merging gateways");
  import->add_option("-o,--out", out_path);

  // reconstruct
  auto* reconstruct = app.add_subcommand("reconstruct", "Rebuild IR JSON from block-structured BPMN XML");
  reconstruct->add_option("input", input_path)->required()->check(CLI::ExistingFile);
  reconstruct->add_option("-o,--out", out_path);

  // layout
  auto* layout = app.add_subcommand("layout", "Replace the diagram interchange of a BPMN XML file");
  layout->add_option("input", input_path)->required()->check(CLI::ExistingFile);
  layout->add_option("-o,--out", out_path);

  // ged
  auto* ged_cmd = app.add_subcommand("ged", "Graph edit distance and similarity of two models");
  std::string other_path;
  ged_cmd->add_option("reference", input_path)->required()->check(CLI::ExistingFile);
  ged_cmd->add_option("candidate", other_path)->required()->check(CLI::ExistingFile);
  ged_cmd->add_flag("--include-joins", include_joins, "Keep merging gateways");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Pairwise similarity over a manifest of model pairs");
  std::string pairs_path;
  unsigned threads = 1;
  evaluate->add_option("--pairs", pairs_path, "Manifest of reference,candidate lines")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate->add_flag("--include-joins", include_joins, "Keep merging gateways");
  evaluate->add_option("--out", out_path, "Per-pair CSV; the summary goes to <name>_summary.csv")->required();
  evaluate->add_option("--threads", threads)->check(CLI::PositiveNumber);

  // benchmark
  auto* benchmark = app.add_subcommand("benchmark", "Run the generation and editing benchmark");
  std::string tasks_dir, provider = "mock", bench_modality = "both";
  std::vector<std::string> models;
  benchmark->add_option("--tasks", tasks_dir, "Directory of task files")->required()->check(CLI::ExistingDirectory);
  benchmark->add_option("--provider", provider, "mock (per-task scripts) or live")
      ->check(CLI::IsMember({"mock", "live"}));
  benchmark->add_option("--modality", bench_modality)->check(CLI::IsMember({"json", "xml", "both"}));
  benchmark->add_option("--models", models, "Model names (default: mock, or every catalog model when live)");
  benchmark->add_flag("--include-joins", include_joins, "Keep merging gateways when scoring");
  benchmark->add_option("--out", out_dir, "Directory for the CSV reports")->required();
  benchmark->add_option("--threads", threads)->check(CLI::PositiveNumber);

  // serve
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  std::string host = "127.0.0.1", static_dir, persist_dir;
  int port = 8000;
  serve->add_option("--host", host);
  serve->add_option("--port", port)->check(CLI::Range(0, 65535));
  serve->add_option("--static", static_dir, "Serve a built web UI from this directory")
      ->check(CLI::ExistingDirectory);
  serve->add_option("--persist", persist_dir, "Keep sessions as JSON files in this directory");
  serve->add_option("--model", model_name, "Default model for new sessions");
  serve->add_option("--modality", modality_name, "Default modality")->check(CLI::IsMember({"json", "xml"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (generate->parsed()) {
      if (description_path.empty() && description.empty()) {
        std::cerr << "generate needs a description file or --text\n";
        return kExitUsage;
      }
      if (!description_path.empty()) description = read_file(description_path);
      auto registry = make_registry(mock_script);
      Assistant assistant(registry);
      Session session;
      session.model_name = model_or_default(model_name, mock_script);
      const CurrentModel result = assistant.generate_process(session, description, modality_or_throw(modality_name));
      write_result(result, out_dir);
      print_usage(session, out_dir);
      return kExitOk;
    }

    if (edit->parsed()) {
      auto registry = make_registry(mock_script);
      Assistant assistant(registry);
      Session session;
      session.model_name = model_or_default(model_name, mock_script);
      const std::string text = read_file(input_path);
      const Modality modality = modality_or_throw(modality_name);
      CurrentModel result;
      if (modality == Modality::kJson) {
        const ProcessModel model = looks_like_xml(text) ? reconstruct_ir(text) : parse_process(text);
        session.current = model;
        result = assistant.propose_edits(session, model, instruction).result.model;
      } else {
        const std::string xml = looks_like_xml(text) ? text : with_di(to_bpmn_xml(parse_process(text)));
        session.current = BpmnDocument::parse(xml);
        result = assistant.edit_xml_direct(session, xml, instruction);
      }
      write_result(result, out_dir);
      print_usage(session, out_dir);
      return kExitOk;
    }

    if (validate_cmd->parsed()) {
      const std::string text = read_file(input_path);
      ValidationReport report;
      if (looks_like_xml(text)) {
        report = validate_xml_structure(text);
      } else {
        try {
          report = validate(parse_process(text));
        } catch (const MissingFieldError& e) {
          report.issues.push_back({Severity::kError, "MissingField", std::nullopt, e.what()});
        } catch (const Error& e) {
          report.issues.push_back({Severity::kError, std::string(to_string(e.code())), std::nullopt, e.what()});
        }
      }
      print_report(report);
      std::cout << (report.ok() ? "valid" : "invalid") << "\n";
      return report.ok() ? kExitOk : kExitFailure;
    }

    if (compile->parsed()) {
      std::string xml = to_bpmn_xml(parse_process(read_file(input_path)));
      if (with_layout) xml = embed_di(xml, compute_layout(BpmnDocument::parse(xml)));
      write_output(out_path, xml);
      return kExitOk;
    }

    if (import->parsed()) {
      write_output(out_path, graph_to_json(graph_from_text(read_file(input_path), include_joins)).dump(2));
      return kExitOk;
    }

    if (reconstruct->parsed()) {
      write_output(out_path, serialize_process(reconstruct_ir(read_file(input_path))));
      return kExitOk;
    }

    if (layout->parsed()) {
      const std::string xml = read_file(input_path);
      write_output(out_path, embed_di(xml, compute_layout(BpmnDocument::parse(xml))));
      return kExitOk;
    }

    if (ged_cmd->parsed()) {
      const FlowGraph a = load_graph_file(input_path, include_joins);
      const FlowGraph b = load_graph_file(other_path, include_joins);
      const long long denominator = ged_to_empty(a) + ged_to_empty(b);
      if (denominator == 0) throw Error(ErrorCode::kBothEmpty, "both models are empty");
      const GedResult result = ged(a, b);
      const double r = static_cast<double>(result.cost) / static_cast<double>(denominator);
      std::cout << "ged " << result.cost << "\nrged " << format_number(r) << "\nsimilarity "
                << format_number((static_cast<double>(denominator - result.cost)) / static_cast<double>(denominator))
                << "\nexact " << (result.exact ? "true" : "false") << "\n";
      return kExitOk;
    }

    if (evaluate->parsed()) {
      const EvaluationReport report = evaluate_pairs(read_pairs_manifest(pairs_path), include_joins, threads);
      const fs::path pairs_csv(out_path);
      if (pairs_csv.has_parent_path()) fs::create_directories(pairs_csv.parent_path());
      fs::path summary_csv = pairs_csv;
      summary_csv.replace_filename(pairs_csv.stem().string() + "_summary.csv");
      write_csv_file(pairs_csv, pairs_table(report));
      write_csv_file(summary_csv, evaluation_summary_table(report));
      write_csv(std::cout, evaluation_summary_table(report));
      return kExitOk;
    }

    if (benchmark->parsed()) {
      BenchmarkOptions options;
      options.use_mock_scripts = provider == "mock";
      options.include_joins = include_joins;
      options.threads = threads;
      if (bench_modality != "both") options.modalities = {modality_or_throw(bench_modality)};
      if (!models.empty()) {
        options.models = models;
      } else if (!options.use_mock_scripts) {
        options.models.clear();
        for (const auto& m : model_catalog()) {
          if (m.vendor != Vendor::kMock) options.models.push_back(m.name);
        }
      }
      options.providers = make_registry(mock_script);
      const BenchmarkReport report = run_benchmark(load_benchmark_tasks(tasks_dir), options);
      for (const auto& path : write_benchmark_reports(report, out_dir)) std::cout << path.string() << "\n";
      return kExitOk;
    }

    if (serve->parsed()) {
      ServiceConfig config;
      config.default_modality = modality_or_throw(modality_name);
      config.default_model = model_or_default(model_name, mock_script);
      if (!persist_dir.empty()) config.persist_dir = persist_dir;
      Service service(config, make_registry(mock_script));
      HttpServer server(service, static_dir.empty() ? std::nullopt : std::optional<fs::path>(static_dir));
      const int bound = server.bind(host, port);
      if (bound < 0) {
        std::cerr << "cannot bind " << host << ":" << port << "\n";
        return kExitFailure;
      }
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cout << "listening on http://" << host << ":" << bound << std::endl;
      server.serve();
      g_server = nullptr;
      return kExitOk;
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    print_report(e.report());
    return kExitFailure;
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}
