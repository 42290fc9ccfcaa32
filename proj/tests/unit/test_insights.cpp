#include <doctest.h>

#include <memory>

#include "contextkg/engine.hpp"
#include "contextkg/insights.hpp"
#include "support.hpp"

using namespace ckg;
using nlohmann::json;

namespace {

std::vector<std::string> quoted_names(const std::string& text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto open = text.find('"', pos);
    if (open == std::string::npos) break;
    const auto close = text.find('"', open + 1);
    if (close == std::string::npos) break;
    out.push_back(text.substr(open + 1, close - open - 1));
    pos = close + 1;
  }
  return out;
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

/// Hand-built layout: two clusters of papers, one author linked to both.
struct Tiny {
  KnowledgeGraph kg;
  ContextLayout layout;
};

Tiny tiny() {
  const auto doc = json::parse(R"({"nodes": [
      {"id": "p1", "type": "Paper", "label": "Alpha", "attributes": {}},
      {"id": "p2", "type": "Paper", "label": "Beta", "attributes": {}},
      {"id": "p3", "type": "Paper", "label": "Gamma", "attributes": {}},
      {"id": "p4", "type": "Paper", "label": "Delta", "attributes": {}},
      {"id": "p5", "type": "Paper", "label": "Epsilon", "attributes": {}},
      {"id": "p6", "type": "Paper", "label": "Zeta", "attributes": {}},
      {"id": "p7", "type": "Paper", "label": "Eta", "attributes": {}},
      {"id": "p8", "type": "Paper", "label": "Theta", "attributes": {}},
      {"id": "p9", "type": "Paper", "label": "Iota", "attributes": {}},
      {"id": "a1", "type": "Author", "label": "Ann Lee", "attributes": {}},
      {"id": "a2", "type": "Author", "label": "Bo Chen", "attributes": {}}],
    "edges": [
      {"id": "e1", "source": "p1", "target": "a1", "relation": "writtenBy", "attributes": {}},
      {"id": "e2", "source": "p2", "target": "a1", "relation": "writtenBy", "attributes": {}},
      {"id": "e3", "source": "p5", "target": "a1", "relation": "writtenBy", "attributes": {}},
      {"id": "e4", "source": "p3", "target": "a2", "relation": "writtenBy", "attributes": {}}]})");
  Tiny t{KnowledgeGraph::from_json(doc), {}};
  auto& L = t.layout;
  L.interest_type = "Paper";
  const std::map<std::string, int> clusters{{"p1", 0}, {"p2", 0}, {"p3", 0}, {"p4", 0}, {"p5", 1},
                                            {"p6", 1}, {"p7", 1}, {"p8", 1}, {"p9", 2}};
  for (const auto& [id, c] : clusters) {
    L.cluster_of[id] = c;
    L.positions[id] = {};
    L.node_type[id] = "Paper";
  }
  for (const char* a : {"a1", "a2"}) {
    L.positions[a] = {};
    L.node_type[a] = "Author";
  }
  L.cluster_labels = {{0, "early"}, {1, "late"}, {2, "odd"}};
  L.edges = {{"e1", "p1", "a1", "writtenBy"}, {"e2", "p2", "a1", "writtenBy"},
             {"e3", "p5", "a1", "writtenBy"}, {"e4", "p3", "a2", "writtenBy"}};
  return t;
}

}  // namespace

TEST_CASE("feature encoding on a hand-checked layout") {
  const auto t = tiny();
  const auto f = encode_features(t.layout, t.kg);
  CHECK(f.cluster_sizes == std::map<int, std::size_t>{{0, 4}, {1, 4}, {2, 1}});
  REQUIRE_FALSE(f.hubs.empty());
  CHECK(f.hubs[0].id == "a1");
  CHECK(f.hubs[0].degree == 3);
  REQUIRE(f.bridges.size() == 1);
  CHECK(f.bridges[0].id == "a1");
  CHECK(f.bridges[0].clusters == std::vector<int>{0, 1});
  CHECK(f.outlier_clusters == std::vector<int>{2});
  CHECK(f.degree_stats.at("Author").max == 3);
  CHECK(f.degree_stats.at("Author").min == 1);
  CHECK(f.degree_stats.at("Paper").median == 0);
}

TEST_CASE("fallback renders five bullets whose names and refs all validate") {
  const auto t = tiny();
  const auto report = fallback_insights(encode_features(t.layout, t.kg));
  CHECK(report.fallback_used);
  REQUIRE(report.bullets.size() == 5);
  CHECK(report.bullets[1].text.find("\"Ann Lee\"") != std::string::npos);
  CHECK(report.bullets[2].text.find("spans 2 clusters (early, late)") != std::string::npos);
  const auto checked = validate_insights(report, t.kg, &t.layout);
  CHECK(checked.bullets == report.bullets);
  CHECK(checked.validation_log.empty());
}

TEST_CASE("validation strips invented names and unknown refs and is idempotent") {
  const auto t = tiny();
  InsightReport r;
  r.bullets = {{"\"Ann Lee\" and \"Dr. Nobody\" co-wrote \"alpha\".", {"a1", "x9", "cluster:1", "cluster:7"}},
               {"\"Fake Paper\"", {"p1"}},
               {"Plain text survives.", {}}};
  const auto v = validate_insights(r, t.kg, &t.layout);
  REQUIRE(v.bullets.size() == 2);
  CHECK(v.bullets[0].text == "\"Ann Lee\" and co-wrote \"alpha\".");
  CHECK(v.bullets[0].refs == std::vector<std::string>{"a1", "cluster:1"});
  CHECK(v.bullets[1].text == "Plain text survives.");
  CHECK(v.validation_log == std::vector<std::string>{"Dr. Nobody", "x9", "cluster:7", "Fake Paper"});
  const auto again = validate_insights(v, t.kg, &t.layout);
  CHECK(again.bullets == v.bullets);
  CHECK(again.validation_log == v.validation_log);

  // Without a layout, any graph node is a valid ref.
  const auto loose = validate_insights(InsightReport{{{"x", {"p9", "zz"}}}, false, {}}, t.kg);
  CHECK(loose.bullets[0].refs == std::vector<std::string>{"p9"});
}

TEST_CASE("generation uses the model answer and falls back on garbage or errors") {
  const auto t = tiny();
  const auto f = encode_features(t.layout, t.kg);
  const auto onto = derive_ontology(t.kg);
  const UserPreference pref{"Paper", "year", "2018", {"Author"}};
  MockLanguageModelClient mock;
  mock.record("generate_insights", "q1", R"({"bullets": [{"text": "\"Ann Lee\" bridges.", "refs": ["a1"]}, "raw"]})");
  mock.record("generate_insights", "q2", "no json");
  const auto r1 = generate_insights(f, pref, onto, &mock, "q1");
  CHECK_FALSE(r1.fallback_used);
  CHECK(r1.bullets == std::vector<InsightBullet>{{"\"Ann Lee\" bridges.", {"a1"}}, {"raw", {}}});
  CHECK(generate_insights(f, pref, onto, &mock, "q2").fallback_used);
  CHECK(generate_insights(f, pref, onto, &mock, "unrecorded").fallback_used);
  CHECK(generate_insights(f, pref, onto, nullptr, "q1").fallback_used);
}

TEST_CASE("recorded insight suite: nothing invented survives validation") {
  const auto suite = testing::fixture("insight_suite.json");
  const auto invented = suite["invented"].get<std::vector<std::string>>();
  std::map<std::string, std::shared_ptr<const KnowledgeGraph>> graphs;
  std::size_t fallbacks = 0, stripped = 0;
  for (const auto& item : suite["items"]) {
    const std::string name = item["graph"];
    if (!graphs.count(name)) graphs[name] = std::make_shared<const KnowledgeGraph>(testing::load_fixture(name));
    const auto& kg = *graphs[name];
    std::set<std::string> labels;
    for (const auto& n : kg.nodes()) labels.insert(lower(n.label));
    for (const auto& x : invented) REQUIRE_FALSE(labels.count(lower(x)));

    Engine engine(graphs[name]);
    const std::string question = item["question"];
    const auto outcome = engine.query(question, std::nullopt, 60, 1);
    MockLanguageModelClient mock;
    mock.record("generate_insights", question, item["completion"].get<std::string>());
    const auto features = encode_features(outcome.layout, kg);
    const auto report = validate_insights(generate_insights(features, outcome.preference, engine.ontology(), &mock, question),
                                          kg, &outcome.layout);
    fallbacks += report.fallback_used;
    stripped += report.validation_log.size();
    CHECK_FALSE(report.bullets.empty());
    for (const auto& b : report.bullets) {
      for (const auto& x : invented) CHECK(b.text.find(x) == std::string::npos);
      for (const auto& q : quoted_names(b.text)) CHECK(labels.count(lower(q)) == 1);
      for (const auto& ref : b.refs) {
        if (ref.starts_with("cluster:")) {
          CHECK(outcome.layout.cluster_labels.count(std::stoi(ref.substr(8))) == 1);
        } else {
          CHECK(outcome.layout.displays(ref));
        }
      }
    }
  }
  CHECK(fallbacks >= 2);
  CHECK(stripped > 0);
}
