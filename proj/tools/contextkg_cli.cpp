#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>

#include "contextkg/context_ops.hpp"
#include "contextkg/engine.hpp"
#include "contextkg/error.hpp"
#include "contextkg/service.hpp"

using nlohmann::json;

namespace {

std::shared_ptr<ckg::LanguageModelClient> make_client(bool online) {
  if (!online) return nullptr;
  auto cfg = ckg::HttpClientConfig::from_env();
  if (cfg.endpoint.empty()) throw ckg::Error("CONTEXTKG_LLM_ENDPOINT is not set");
  return std::make_shared<ckg::HttpLanguageModelClient>(cfg);
}

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw ckg::Error("cannot read config " + path);
  return json::parse(in);
}

void emit(const json& j, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream f(out);
  f << j.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Preference-driven, ontology-aware knowledge graph layouts"};
  app.require_subcommand(1);

  std::string graph_path, config_path, question, out;
  std::vector<std::string> contexts;
  double diversity = -1;
  int budget = 0;
  std::uint64_t seed = 42;
  bool online = false, with_insights = false;

  auto* query = app.add_subcommand("query", "Answer a question with a layout");
  query->add_option("graph", graph_path, "Graph document")->required()->check(CLI::ExistingFile);
  query->add_option("-q,--question", question, "Question")->required();
  query->add_option("-d,--diversity", diversity, "Diversity in [0, 1]")->check(CLI::Range(0.0, 1.0));
  query->add_option("-b,--budget", budget, "Interest node budget")->check(CLI::PositiveNumber);
  query->add_option("-s,--seed", seed, "Layout seed");
  query->add_option("-c,--context", contexts, "Context description, applied in order");
  query->add_option("-o,--out", out, "Write the result here instead of stdout");
  query->add_option("--config", config_path, "Engine configuration JSON")->check(CLI::ExistingFile);
  query->add_flag("--insights", with_insights, "Include the insight report");
  query->add_flag("--online", online, "Use the language model configured in the environment");

  auto* onto = app.add_subcommand("ontology", "Print the ontology arrangement");
  onto->add_option("graph", graph_path, "Graph document")->required()->check(CLI::ExistingFile);
  onto->add_option("--config", config_path, "Engine configuration JSON")->check(CLI::ExistingFile);

  auto* validate = app.add_subcommand("validate", "Check a graph document");
  validate->add_option("graph", graph_path, "Graph document")->required()->check(CLI::ExistingFile);

  std::string host = "127.0.0.1";
  int port = 0;
  std::string data_dir, graphs_dir;
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port (default CONTEXTKG_PORT or 8080)");
  serve->add_option("--data-dir", data_dir, "Session snapshot directory");
  serve->add_option("--graphs-dir", graphs_dir, "Directory of named graphs");
  serve->add_option("--config", config_path, "Engine configuration JSON")->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate) {
      const auto kg = ckg::load_graph_file(graph_path);
      const auto onto_v = ckg::derive_ontology(kg);
      std::cout << json{{"valid", true},
                        {"nodes", kg.nodes().size()},
                        {"edges", kg.edges().size()},
                        {"types", onto_v.types},
                        {"connected", onto_v.connected}}
                       .dump(2)
                << "\n";
      return 0;
    }
    if (*serve) {
      auto cfg = ckg::ServiceConfig::from_env();
      cfg.engine = ckg::EngineConfig::from_json(load_config(config_path));
      if (!data_dir.empty()) cfg.data_dir = data_dir;
      if (!graphs_dir.empty()) cfg.graphs_dir = graphs_dir;
      if (port == 0) {
        const char* p = std::getenv("CONTEXTKG_PORT");
        port = p ? std::atoi(p) : 8080;
      }
      ckg::Service service(cfg);
      std::cout << json{{"event", "listening"}, {"host", host}, {"port", port}, {"offline", cfg.offline}}.dump()
                << std::endl;
      return service.listen(host, port) ? 0 : 1;
    }

    auto cfg = ckg::EngineConfig::from_json(load_config(config_path));
    cfg.offline = !online;
    auto kg = std::make_shared<const ckg::KnowledgeGraph>(ckg::load_graph_file(graph_path));
    ckg::Engine engine(kg, cfg, make_client(online));

    if (*onto) {
      std::cout << engine.ontology_view().dump(2) << "\n";
      return 0;
    }

    auto outcome = engine.query(question, diversity < 0 ? std::nullopt : std::optional<double>(diversity),
                                budget > 0 ? std::optional<int>(budget) : std::nullopt, seed);
    json directives = json::array();
    for (const auto& description : contexts) {
      const auto d = engine.classify(description, outcome.preference);
      ckg::apply_directive(outcome.layout, d, *kg);
      directives.push_back(d.to_json());
    }
    json result = {{"preference", outcome.preference.to_json()},
                   {"warnings", outcome.warnings()},
                   {"directives", directives},
                   {"layout", outcome.layout.to_json()}};
    if (with_insights) result["insights"] = engine.insights(outcome).to_json();
    emit(result, out);
    return 0;
  } catch (const ckg::ExtractionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    for (const auto& line : e.repair_log()) std::cerr << "  " << line << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
