#include <doctest.h>

#include <future>
#include <memory>

#include "contextkg/engine.hpp"
#include "contextkg/error.hpp"
#include "support.hpp"

using namespace ckg;
using nlohmann::json;

namespace {

std::shared_ptr<const KnowledgeGraph> academic() {
  static const auto kg = std::make_shared<const KnowledgeGraph>(testing::load_fixture("academic"));
  return kg;
}

const std::string kQuestion = "Show papers published in 2018 and their authors";

}  // namespace

TEST_CASE("config accepts dotted and nested keys") {
  const auto dotted = EngineConfig::from_json(json::parse(
      R"({"clustering.eps": 2.5, "clustering.min_pts": 3, "sampling.budget": 42, "layout.spacing": 120, "offline": false})"));
  CHECK(dotted.dbscan.eps == 2.5);
  CHECK(dotted.dbscan.min_pts == 3);
  CHECK(dotted.budget == 42);
  CHECK(dotted.layout.spacing == 120);
  CHECK_FALSE(dotted.offline);
  const auto nested = EngineConfig::from_json(
      json::parse(R"({"clustering": {"kmax": 5, "seed": 9}, "sampling": {"sigma_default": 0.2}, "layout": {"node_radius": 7, "auto_spacing": false}})"));
  CHECK(nested.text.k_max == 5);
  CHECK(nested.text.kmeans.seed == 9);
  CHECK(nested.sigma_default == 0.2);
  CHECK(nested.layout.node_radius == 7);
  CHECK_FALSE(nested.layout.auto_spacing);
  CHECK(EngineConfig::from_json(json::array()).budget == EngineConfig{}.budget);
}

TEST_CASE("a question runs end to end and is deterministic per seed") {
  Engine engine(academic());
  CHECK_FALSE(engine.uses_model());
  const auto a = engine.query(kQuestion, 0.3, 25, 11);
  CHECK(a.preference.interest_type == "Paper");
  CHECK(a.preference.attribute == "year");
  CHECK(a.preference.attribute_value == "2018");
  CHECK(a.preference.connected_types == std::vector<std::string>{"Author"});
  CHECK(a.preference.diversity == 0.3);
  CHECK(a.sample.ids.size() == 25);
  CHECK_FALSE(a.layout.answers.empty());
  CHECK(a.warnings().empty());

  const auto b = engine.query(kQuestion, 0.3, 25, 11);
  CHECK(a.layout.dump() == b.layout.dump());
  CHECK(a.sample.to_json() == b.sample.to_json());

  // The engine is shared across threads without locking.
  std::vector<std::future<std::string>> jobs;
  for (int i = 0; i < 4; ++i) {
    jobs.push_back(std::async(std::launch::async, [&] { return engine.query(kQuestion, 0.3, 25, 11).layout.dump(); }));
  }
  for (auto& j : jobs) CHECK(j.get() == a.layout.dump());
}

TEST_CASE("answer subgraph holds the answers and their displayed edges") {
  Engine engine(academic());
  const auto out = engine.query(kQuestion, std::nullopt, 40, 2);
  const auto sub = out.answer_subgraph(engine.graph());
  std::set<std::string> ids, answers;
  for (const auto& n : sub["nodes"]) {
    ids.insert(n["id"]);
    if (n["answer"]) answers.insert(n["id"]);
  }
  CHECK(answers == out.layout.answers);
  for (const auto& e : sub["edges"]) {
    CHECK((out.layout.answers.count(e["source"]) || out.layout.answers.count(e["target"])));
    CHECK(ids.count(e["source"]) == 1);
    CHECK(ids.count(e["target"]) == 1);
  }
  std::size_t touching = 0;
  for (const auto& e : out.layout.edges) touching += out.layout.answers.count(e.source) || out.layout.answers.count(e.target);
  CHECK(sub["edges"].size() == touching);
}

TEST_CASE("warnings for truncation and empty matches") {
  Engine engine(academic());
  const auto out = engine.query(kQuestion, std::nullopt, 2, 1);
  REQUIRE(out.subgraph.answers.size() > 2);
  CHECK(out.sample.truncated);
  REQUIRE(out.warnings().size() == 1);
  CHECK(out.warnings()[0].find("budget 2") == 0);

  const auto none = engine.run({"Paper", "year", "1850", {"Author"}}, 20, 1);
  CHECK(none.subgraph.answers.empty());
  CHECK(none.warnings() == std::vector<std::string>{"no node matches the preferred attribute value"});
  CHECK_THROWS_AS(engine.run({"Venue", "year", "2018", {}}, 20, 1), ExtractionError);
}

TEST_CASE("ontology view carries positions, distances and stress") {
  Engine engine(academic());
  const auto view = engine.ontology_view();
  CHECK(view["order"].size() == 3);
  CHECK(view["layout"].size() == 3);
  CHECK(view["distances"].size() == 3);
  CHECK(view["stress"].get<double>() >= 0);
  CHECK(view["stress"].get<double>() < 0.05);
  std::size_t total = 0;
  for (const auto& t : view["layout"]) total += t["count"].get<std::size_t>();
  CHECK(total == engine.graph().nodes().size());
  CHECK(view.dump() == engine.ontology_view().dump());
}

TEST_CASE("offline insights are the validated fallback") {
  Engine engine(academic());
  const auto out = engine.query(kQuestion, std::nullopt, 30, 3);
  const auto report = engine.insights(out);
  CHECK(report.fallback_used);
  CHECK(report.bullets.size() == 5);
  CHECK(report.validation_log.empty());
}

TEST_CASE("online engine routes extraction through the client") {
  auto mock = std::make_shared<MockLanguageModelClient>();
  mock->set_responder([](const Prompt& p) -> std::optional<std::string> {
    if (p.task == "extract_preferences") {
      return R"({"interest_type": "Paper", "attribute": "year", "attribute_value": "2016", "connected_types": ["Concept"]})";
    }
    return std::nullopt;
  });
  EngineConfig cfg;
  cfg.offline = false;
  Engine engine(academic(), cfg, mock);
  CHECK(engine.uses_model());
  const auto pref = engine.extract("anything at all");
  CHECK(pref.attribute_value == "2016");
  CHECK(pref.connected_types == std::vector<std::string>{"Concept"});
  CHECK(mock->calls() >= 1);

  cfg.offline = true;
  CHECK_FALSE(Engine(academic(), cfg, mock).uses_model());
  CHECK_THROWS_AS(Engine(nullptr), Error);
}
