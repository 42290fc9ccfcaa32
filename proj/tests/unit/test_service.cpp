#include <doctest.h>

#include <httplib.h>

#include <atomic>
#include <thread>

#include "contextkg/service.hpp"
#include "support.hpp"

using namespace ckg;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static std::atomic<int> counter{0};
    path = fs::temp_directory_path() /
           ("contextkg-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

ServiceConfig config_for(const fs::path& data) {
  ServiceConfig c;
  c.data_dir = data;
  c.graphs_dir = testing::fixture_dir();
  c.log_requests = false;
  return c;
}

Response post(Service& s, const std::string& path, const json& body) { return s.handle("POST", path, body.dump()); }

std::string new_session(Service& s, std::uint64_t seed = 42, const json& graph = "academic") {
  const auto r = post(s, "/sessions", {{"graph", graph}, {"seed", seed}});
  REQUIRE(r.status == 201);
  return r.body["id"];
}

const json kQuery = {{"question", "Find papers published in 2018 and their authors"}, {"budget", 30}};

/// Labels of two displayed interest nodes.
std::pair<std::string, std::string> two_papers(const json& layout) {
  std::vector<std::string> labels;
  for (const auto& n : layout["nodes"]) {
    if (n["type"] == "Paper") labels.push_back(n["label"]);
  }
  REQUIRE(labels.size() >= 2);
  return {labels.front(), labels.back()};
}

}  // namespace

TEST_CASE("health, routing and unknown sessions") {
  TempDir dir;
  Service s(config_for(dir.path));
  const auto h = s.handle("GET", "/health");
  CHECK(h.status == 200);
  CHECK(h.body["status"] == "ok");
  CHECK(s.handle("GET", "/nope").status == 404);
  CHECK(s.handle("GET", "/sessions/abc").status == 404);
  CHECK(s.handle("GET", "/jobs/abc").status == 404);
  CHECK(s.handle("DELETE", "/sessions").status == 405);
  CHECK(s.handle("GET", "/sessions").body["sessions"].empty());
}

TEST_CASE("session creation status codes") {
  TempDir dir;
  auto cfg = config_for(dir.path);
  cfg.max_nodes = 3;
  Service s(cfg);

  const auto named = post(s, "/sessions", {{"graph", "academic"}, {"seed", 7}});
  CHECK(named.status == 201);
  CHECK(named.body["seed"] == 7);
  CHECK(named.body["graph"]["name"] == "academic");
  CHECK(post(s, "/sessions", {{"graph", "does-not-exist"}}).status == 404);
  CHECK(post(s, "/sessions", {{"graph", "../academic"}}).status == 404);

  const json doc = json::parse(R"({"nodes": [
      {"id": "p1", "type": "Paper", "label": "One", "attributes": {"year": 2018}},
      {"id": "a1", "type": "Author", "label": "Ann", "attributes": {}}],
    "edges": [{"id": "e1", "source": "p1", "target": "a1", "relation": "writtenBy", "attributes": {}}]})");
  const auto inline_doc = post(s, "/sessions", {{"graph", doc}});
  REQUIRE(inline_doc.status == 201);
  CHECK(fs::exists(dir.path / "graphs" / inline_doc.body["graph"]["document"].get<std::string>()));
  CHECK(fs::exists(dir.path / "sessions" / (inline_doc.body["id"].get<std::string>() + ".json")));

  auto dangling = doc;
  dangling["edges"][0]["target"] = "ghost";
  const auto bad = post(s, "/sessions", {{"graph", dangling}});
  CHECK(bad.status == 400);
  CHECK(bad.body["error"].get<std::string>().find("ghost") != std::string::npos);

  auto big = doc;
  for (int i = 0; i < 3; ++i) big["nodes"].push_back({{"id", "x" + std::to_string(i)}, {"type", "X"}, {"label", "x"}});
  CHECK(post(s, "/sessions", {{"graph", big}}).status == 413);

  CHECK(s.handle("POST", "/sessions", "not json").status == 400);
  CHECK(s.handle("POST", "/sessions", "[1]").status == 400);
  CHECK(post(s, "/sessions", json::object()).status == 400);
  CHECK(post(s, "/sessions", {{"graph", 5}}).status == 400);
  CHECK(post(s, "/sessions", {{"graph", "academic"}, {"seed", -1}}).status == 400);
  CHECK(s.session_count() == 2);

  auto tiny = config_for(dir.path);
  tiny.max_body_bytes = 16;
  Service small(tiny);
  CHECK(post(small, "/sessions", {{"graph", "academic"}, {"seed", 1}}).status == 413);
}

TEST_CASE("query, layout and describe") {
  TempDir dir;
  Service s(config_for(dir.path));
  const std::string id = new_session(s);
  const std::string base = "/sessions/" + id;

  CHECK(s.handle("GET", base + "/layout").status == 409);
  CHECK(post(s, base + "/context", {{"description", "Show me the most connected authors"}}).status == 409);
  CHECK(s.handle("GET", base + "/insights").status == 409);

  const auto empty = post(s, base + "/query", {{"question", "  "}});
  CHECK(empty.status == 422);
  CHECK(empty.body.contains("repair_log"));
  const auto nonsense = post(s, base + "/query", {{"question", "bananas are yellow"}});
  CHECK(nonsense.status == 422);
  CHECK(nonsense.body["repair_log"].is_array());
  CHECK(post(s, base + "/query", {{"question", "Find papers published in 2018"}, {"diversity", 1.5}}).status == 400);
  CHECK(post(s, base + "/query", {{"question", "Find papers published in 2018"}, {"diversity", "x"}}).status == 400);
  CHECK(post(s, base + "/query", {{"question", "Find papers published in 2018"}, {"budget", 0}}).status == 400);

  const auto q = post(s, base + "/query", kQuery);
  REQUIRE(q.status == 200);
  for (const char* key : {"preference", "layout", "answers", "sample", "warnings"}) CHECK(q.body.contains(key));
  CHECK(q.body["preference"]["attribute_value"] == "2018");
  CHECK(q.body["sample"]["sampled"] == 30);

  const auto layout = s.handle("GET", base + "/layout");
  CHECK(layout.status == 200);
  CHECK(layout.body == q.body["layout"]);

  const auto d = s.handle("GET", base);
  CHECK(d.body["question"] == kQuery["question"]);
  CHECK(d.body["budget"] == 30);
  CHECK(d.body["has_layout"] == true);

  const auto onto = s.handle("GET", base + "/ontology");
  CHECK(onto.status == 200);
  CHECK(onto.body["layout"].size() == 3);

  // The same seed reproduces the layout in a fresh session.
  const std::string other = new_session(s);
  CHECK(post(s, "/sessions/" + other + "/query", kQuery).body["layout"] == q.body["layout"]);
}

TEST_CASE("context operations, bundles and insights") {
  TempDir dir;
  Service s(config_for(dir.path));
  const std::string base = "/sessions/" + new_session(s);
  const auto q = post(s, base + "/query", kQuery);
  REQUIRE(q.status == 200);

  const auto neighbor = post(s, base + "/context", {{"description", "Show me which of these authors are the most prolific."}});
  REQUIRE(neighbor.status == 200);
  CHECK(neighbor.body["directive"]["kind"] == "neighbor");
  CHECK_FALSE(neighbor.body["layout"]["emphasis"]["nodes"].empty());

  const auto insight = s.handle("GET", base + "/insights");
  REQUIRE(insight.status == 200);
  CHECK(insight.body["fallback_used"] == true);
  CHECK(insight.body["bullets"].size() == 5);
  CHECK(s.handle("GET", base + "/insights").body == insight.body);

  const auto edge = post(s, base + "/context", {{"description", "Highlight edges for writtenBy"}});
  REQUIRE(edge.status == 200);
  CHECK(edge.body["directive"]["kind"] == "edge");
  CHECK_FALSE(edge.body["layout"]["emphasis"]["edges"].empty());
  // Node emphasis from the earlier operation survives.
  CHECK(edge.body["layout"]["emphasis"]["nodes"] == neighbor.body["layout"]["emphasis"]["nodes"]);
  const auto& bundles = edge.body["layout"]["emphasis"]["bundles"];
  REQUIRE_FALSE(bundles.empty());
  const std::string bundle = bundles[0]["id"];
  const auto expanded = s.handle("POST", base + "/bundles/" + httplib::detail::encode_url(bundle) + "/expand");
  REQUIRE(expanded.status == 200);
  CHECK(expanded.body["emphasis"]["bundles"][0]["expanded"] == true);
  CHECK(s.handle("POST", base + "/bundles/c99:none/expand").status == 404);

  const auto [a, b] = two_papers(q.body["layout"]);
  const auto path = post(s, base + "/context", {{"description", "Show the shortest path from " + a + " to " + b}});
  REQUIRE(path.status == 200);
  CHECK(path.body["directive"]["kind"] == "path");
  CHECK(path.body.contains("paths"));
  CHECK(path.body["layout"]["emphasis"]["paths"].size() == path.body["paths"]["paths"].size());

  CHECK(post(s, base + "/context", {{"description", "Show the shortest path from Nobody Here to " + b}}).status == 422);
  CHECK(post(s, base + "/context", {{"description", "bananas are yellow"}}).status == 422);
  CHECK(post(s, base + "/context", {{"description", ""}}).status == 422);

  const auto d = s.handle("GET", base);
  CHECK(d.body["ops"].size() == 4);
}

TEST_CASE("node search over the whole graph") {
  TempDir dir;
  Service s(config_for(dir.path));
  const std::string base = "/sessions/" + new_session(s);
  const auto kg = testing::load_fixture("academic");
  const std::string label = kg.nodes()[0].label;

  const auto none = s.handle("GET", base + "/nodes", "", {{"name", ""}});
  CHECK(none.body["ids"].empty());

  std::string upper = label;
  for (auto& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  const auto hit = s.handle("GET", base + "/nodes", "", {{"name", upper}});
  REQUIRE(hit.status == 200);
  REQUIRE_FALSE(hit.body["ids"].empty());
  CHECK(hit.body["nodes"][0]["label"] == label);
  CHECK(hit.body["nodes"][0]["displayed"] == false);

  const auto broad = s.handle("GET", base + "/nodes", "", {{"name", "a"}});
  std::size_t oracle = 0;
  for (const auto& n : kg.nodes()) {
    std::string l = n.label;
    for (auto& c : l) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    oracle += l.find('a') != std::string::npos;
  }
  CHECK(broad.body["ids"].size() == std::min<std::size_t>(oracle, 50));

  post(s, base + "/query", kQuery);
  const auto layout = s.handle("GET", base + "/layout").body;
  const std::string shown = layout["nodes"][0]["label"];
  const auto after = s.handle("GET", base + "/nodes", "", {{"name", shown}});
  CHECK(after.body["nodes"][0]["displayed"] == true);
}

TEST_CASE("operations never leak into the shared graph") {
  TempDir dir;
  Service s(config_for(dir.path));
  const std::string a = "/sessions/" + new_session(s, 5);
  const auto first = post(s, a + "/query", kQuery).body["layout"];
  const auto [x, y] = two_papers(first);
  post(s, a + "/context", {{"description", "Show homogeneous paths from " + x + " to " + y}});
  post(s, a + "/context", {{"description", "Show me the most connected authors"}});

  const std::string b = "/sessions/" + new_session(s, 5);
  CHECK(post(s, b + "/query", kQuery).body["layout"] == first);
  CHECK(s.handle("GET", b + "/ontology").body == s.handle("GET", a + "/ontology").body);
}

TEST_CASE("sessions replay byte-identically after a restart") {
  TempDir dir;
  std::string id, before, described;
  {
    Service s(config_for(dir.path));
    id = new_session(s, 99);
    const std::string base = "/sessions/" + id;
    const auto q = post(s, base + "/query", {{"question", kQuery["question"]}, {"budget", 25}, {"diversity", 0.8}});
    REQUIRE(q.status == 200);
    const auto [x, y] = two_papers(q.body["layout"]);
    REQUIRE(post(s, base + "/context", {{"description", "Find disjoint paths between " + x + " and " + y}}).status == 200);
    const auto edge = post(s, base + "/context", {{"description", "Highlight edges for writtenBy"}});
    REQUIRE(edge.status == 200);
    REQUIRE_FALSE(edge.body["layout"]["emphasis"]["bundles"].empty());
    const std::string b = edge.body["layout"]["emphasis"]["bundles"][0]["id"];
    REQUIRE(s.handle("POST", base + "/bundles/" + httplib::detail::encode_url(b) + "/expand").status == 200);
    before = s.handle("GET", base + "/layout").body.dump();
    described = s.handle("GET", base).body.dump();
  }
  Service restarted(config_for(dir.path));
  CHECK(restarted.session_count() == 1);
  CHECK(restarted.handle("GET", "/sessions/" + id + "/layout").body.dump() == before);
  CHECK(restarted.handle("GET", "/sessions/" + id).body.dump() == described);

  // A corrupt snapshot is skipped, not fatal.
  std::ofstream(dir.path / "sessions" / "broken.json") << "{";
  Service again(config_for(dir.path));
  CHECK(again.session_count() == 1);
}

TEST_CASE("concurrent writers are serialized; readers keep answering") {
  TempDir dir;
  Service s(config_for(dir.path));
  const std::string base = "/sessions/" + new_session(s);
  REQUIRE(post(s, base + "/query", kQuery).status == 200);

  const std::vector<std::string> descriptions = {"Show me the most connected authors", "Highlight edges for writtenBy"};
  std::atomic<int> ok{0}, reads{0}, bad_reads{0};
  std::atomic<bool> done{false};
  std::vector<std::thread> writers;
  for (int w = 0; w < 2; ++w) {
    writers.emplace_back([&, w] {
      for (int i = 0; i < 5; ++i) ok += post(s, base + "/context", {{"description", descriptions[w]}}).status == 200;
    });
  }
  std::thread reader([&] {
    while (!done) {
      const auto r = s.handle("GET", base + "/layout");
      ++reads;
      bad_reads += r.status != 200;
    }
  });
  for (auto& t : writers) t.join();
  done = true;
  reader.join();
  CHECK(ok == 10);
  CHECK(reads > 0);
  CHECK(bad_reads == 0);
  CHECK(s.handle("GET", base).body["ops"].size() == 10);
}

TEST_CASE("slow requests become pollable jobs") {
  TempDir dir;
  auto cfg = config_for(dir.path);
  cfg.job_timeout = std::chrono::milliseconds(0);
  Service s(cfg);
  const std::string base = "/sessions/" + new_session(s);
  auto r = post(s, base + "/query", kQuery);
  if (r.status == 202) {
    const std::string poll = r.body["poll"];
    CHECK(poll == "/jobs/" + r.body["job"].get<std::string>());
    for (int i = 0; i < 600 && r.status == 202; ++i) {
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
      r = s.handle("GET", poll);
    }
  }
  REQUIRE(r.status == 200);
  CHECK(r.body.contains("layout"));
}

TEST_CASE("the HTTP listener serves the same API") {
  TempDir dir;
  Service s(config_for(dir.path));
  const int port = s.bind_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread server([&] { s.listen_after_bind(); });
  struct Join {
    Service& s;
    std::thread& t;
    ~Join() {
      s.stop();
      t.join();
    }
  } join{s, server};

  httplib::Client client("127.0.0.1", port);
  client.set_read_timeout(120, 0);
  const auto created = client.Post("/sessions", json{{"graph", "academic"}, {"seed", 3}}.dump(), "application/json");
  REQUIRE(created);
  CHECK(created->status == 201);
  CHECK(created->get_header_value("Content-Type") == "application/json");
  const std::string id = json::parse(created->body)["id"];

  const auto q = client.Post("/sessions/" + id + "/query", kQuery.dump(), "application/json");
  REQUIRE(q);
  CHECK(q->status == 200);
  const auto layout = client.Get("/sessions/" + id + "/layout");
  REQUIRE(layout);
  CHECK(json::parse(layout->body) == json::parse(q->body)["layout"]);
  const auto search = client.Get("/sessions/" + id + "/nodes?name=" + httplib::detail::encode_url("a"));
  REQUIRE(search);
  CHECK_FALSE(json::parse(search->body)["ids"].empty());
  const auto bad = client.Post("/sessions", "{oops", "application/json");
  REQUIRE(bad);
  CHECK(bad->status == 400);
  const auto unrouted = client.Delete("/sessions");
  REQUIRE(unrouted);
  CHECK(unrouted->status == 405);
}
