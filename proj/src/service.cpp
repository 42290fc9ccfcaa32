#include "contextkg/service.hpp"

#include <httplib.h>

#include <algorithm>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <random>
#include <regex>
#include <sstream>

#include "contextkg/error.hpp"
#include "strings.hpp"

namespace ckg {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

Response error(int status, const std::string& message, json extra = json::object()) {
  extra["error"] = message;
  return {status, std::move(extra)};
}

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

std::string now_iso() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string random_hex(std::size_t chars) {
  static std::mutex mu;
  static std::random_device rd;
  std::lock_guard lock(mu);
  static const char* digits = "0123456789abcdef";
  std::string out;
  for (std::size_t i = 0; i < chars; ++i) out += digits[rd() % 16];
  return out;
}

std::uint64_t random_seed() {
  std::random_device rd;
  return rd();
}

std::vector<std::string> path_parts(const std::string& path) {
  std::vector<std::string> parts;
  for (auto& p : text::split(path.substr(0, path.find('?')), '/')) {
    if (!p.empty()) parts.push_back(httplib::detail::decode_url(p, false));
  }
  return parts;
}

std::optional<json> parse_body(const std::string& body) {
  if (text::trim(body).empty()) return json::object();
  try {
    json j = json::parse(body);
    if (!j.is_object()) return std::nullopt;
    return j;
  } catch (const json::exception&) {
    return std::nullopt;
  }
}

void write_atomic(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw Error("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool valid_name(const std::string& s) {
  static const std::regex re("^[A-Za-z0-9_.-]{1,128}$");
  return std::regex_match(s, re) && s.find("..") == std::string::npos;
}

json layout_json(const ContextLayout& layout) { return layout.to_json(); }

}  // namespace

ServiceConfig ServiceConfig::from_env() {
  ServiceConfig c;
  const std::string offline = text::to_lower(env_or("CONTEXTKG_OFFLINE", "1"));
  c.offline = !(offline == "0" || offline == "false" || offline == "no" || offline == "off");
  c.engine.offline = c.offline;
  c.data_dir = env_or("CONTEXTKG_DATA_DIR", "");
  c.graphs_dir = env_or("CONTEXTKG_GRAPHS_DIR", "");
  if (auto v = text::parse_number(env_or("CONTEXTKG_JOB_TIMEOUT_MS", ""))) {
    c.job_timeout = std::chrono::milliseconds(static_cast<long long>(*v));
  }
  if (auto v = text::parse_number(env_or("CONTEXTKG_MAX_BODY_BYTES", ""))) c.max_body_bytes = std::size_t(*v);
  if (auto v = text::parse_number(env_or("CONTEXTKG_MAX_NODES", ""))) c.max_nodes = std::size_t(*v);
  return c;
}

std::shared_ptr<const Service::State> Service::Session::snapshot() const {
  std::lock_guard lock(state_mu);
  return state;
}

void Service::Session::publish(std::shared_ptr<const State> next) {
  std::lock_guard lock(state_mu);
  state = std::move(next);
}

Service::Service(ServiceConfig config, std::shared_ptr<LanguageModelClient> client)
    : config_(std::move(config)), client_(std::move(client)) {
  config_.engine.offline = config_.offline;
  if (!config_.offline && !client_) {
    auto http = HttpClientConfig::from_env();
    if (!http.endpoint.empty()) client_ = std::make_shared<HttpLanguageModelClient>(http);
  }
  restore();
}

Service::~Service() {
  stop();
  std::lock_guard lock(jobs_mu_);
  for (auto& [id, f] : jobs_) f.wait();
}

std::size_t Service::session_count() const {
  std::shared_lock lock(sessions_mu_);
  return sessions_.size();
}

void Service::log_request(const std::string& method, const std::string& path, int status, double ms) const {
  if (!config_.log_requests) return;
  json line = {{"ts", now_iso()}, {"method", method}, {"path", path}, {"status", status},
               {"ms", std::round(ms * 1000) / 1000}};
  std::lock_guard lock(log_mu_);
  std::cout << line.dump() << std::endl;
}

Response Service::handle(const std::string& method, const std::string& path, const std::string& body,
                         const Params& query) {
  const auto start = std::chrono::steady_clock::now();
  Response r;
  try {
    if (body.size() > config_.max_body_bytes) {
      r = error(413, "request body exceeds " + std::to_string(config_.max_body_bytes) + " bytes");
    } else {
      r = dispatch(method, path_parts(path), body, query);
    }
  } catch (const std::exception& e) {
    r = error(500, e.what());
  }
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  log_request(method, path, r.status, ms);
  return r;
}

Response Service::dispatch(const std::string& method, const std::vector<std::string>& parts, const std::string& body,
                           const Params& query) {
  const auto n = parts.size();
  if (n == 1 && parts[0] == "health" && method == "GET") {
    return {200, {{"status", "ok"}, {"sessions", session_count()}, {"offline", config_.offline}}};
  }
  if (n == 2 && parts[0] == "jobs" && method == "GET") return poll_job(parts[1]);
  if (n == 0 || parts[0] != "sessions") return error(404, "no such route");
  if (n == 1) {
    if (method == "POST") return create_session(body);
    if (method == "GET") {
      std::shared_lock lock(sessions_mu_);
      json ids = json::array();
      for (const auto& [id, s] : sessions_) ids.push_back(id);
      return {200, {{"sessions", ids}}};
    }
    return error(405, "method not allowed");
  }

  auto session = find_session(parts[1]);
  if (!session) return error(404, "unknown session '" + parts[1] + "'");

  if (n == 2 && method == "GET") return describe(*session);
  if (n == 3) {
    const std::string& what = parts[2];
    if (what == "query" && method == "POST") return run_job([=, this] { return run_query(session, body); });
    if (what == "context" && method == "POST") return run_job([=, this] { return run_context(session, body); });
    if (what == "insights" && method == "GET") return run_job([=, this] { return insights(session); });
    if (what == "ontology" && method == "GET") return {200, session->engine->ontology_view()};
    if (what == "nodes" && method == "GET") return search(session, query);
    if (what == "layout" && method == "GET") {
      auto st = session->snapshot();
      if (!st->layout) return error(409, "no query has run in this session");
      return {200, layout_json(*st->layout)};
    }
  }
  if (n == 5 && parts[2] == "bundles" && parts[4] == "expand" && method == "POST") {
    const std::string bundle = parts[3];
    return run_job([=, this] { return expand(session, bundle); });
  }
  return error(404, "no such route");
}

std::shared_ptr<Service::Session> Service::find_session(const std::string& id) const {
  std::shared_lock lock(sessions_mu_);
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

std::shared_ptr<const KnowledgeGraph> Service::load_named_graph(const std::string& name) {
  if (!valid_name(name)) throw NotFoundError("invalid graph name '" + name + "'");
  const fs::path path = config_.graphs_dir / (name + ".json");
  if (config_.graphs_dir.empty() || !fs::exists(path)) throw NotFoundError("unknown graph '" + name + "'");
  return std::make_shared<const KnowledgeGraph>(load_graph_file(path));
}

std::shared_ptr<const Engine> Service::engine_for(const json& graph_ref) {
  if (graph_ref.contains("name")) {
    const std::string name = graph_ref.at("name").get<std::string>();
    std::lock_guard lock(engines_mu_);
    if (auto it = named_engines_.find(name); it != named_engines_.end()) return it->second;
    auto engine = std::make_shared<const Engine>(load_named_graph(name), config_.engine, client_);
    named_engines_.emplace(name, engine);
    return engine;
  }
  const fs::path path = config_.data_dir / "graphs" / graph_ref.at("document").get<std::string>();
  auto kg = std::make_shared<const KnowledgeGraph>(load_graph_file(path));
  return std::make_shared<const Engine>(kg, config_.engine, client_);
}

Response Service::create_session(const std::string& body) {
  const auto req = parse_body(body);
  if (!req) return error(400, "request body must be a JSON object");
  if (!req->contains("graph")) return error(400, "missing 'graph'");
  const json& graph = req->at("graph");

  std::uint64_t seed = random_seed();
  if (req->contains("seed")) {
    const json& s = req->at("seed");
    if (!s.is_number_integer() || (s.is_number_integer() && !s.is_number_unsigned() && s.get<long long>() < 0)) {
      return error(400, "'seed' must be a non-negative integer");
    }
    seed = s.get<std::uint64_t>();
  }

  auto session = std::make_shared<Session>();
  session->id = random_hex(16);
  session->seed = seed;
  session->created = now_iso();

  if (graph.is_string()) {
    try {
      session->graph_ref = {{"name", graph.get<std::string>()}};
      session->engine = engine_for(session->graph_ref);
    } catch (const NotFoundError& e) {
      return error(404, e.what());
    } catch (const GraphError& e) {
      return error(400, e.what());
    }
  } else if (graph.is_object()) {
    if (graph.contains("nodes") && graph.at("nodes").is_array() && graph.at("nodes").size() > config_.max_nodes) {
      return error(413, "graph has " + std::to_string(graph.at("nodes").size()) + " nodes; limit is " +
                            std::to_string(config_.max_nodes));
    }
    std::shared_ptr<const KnowledgeGraph> kg;
    try {
      kg = std::make_shared<const KnowledgeGraph>(KnowledgeGraph::from_json(graph));
    } catch (const GraphError& e) {
      return error(400, e.what());
    } catch (const json::exception& e) {
      return error(400, std::string("malformed graph: ") + e.what());
    }
    const std::string file = session->id + ".graph.json";
    session->graph_ref = {{"document", file}};
    if (!config_.data_dir.empty()) write_atomic(config_.data_dir / "graphs" / file, serialize_graph(*kg));
    session->engine = std::make_shared<const Engine>(kg, config_.engine, client_);
  } else {
    return error(400, "'graph' must be a graph name or a graph document");
  }

  persist(*session, *session->snapshot());
  {
    std::unique_lock lock(sessions_mu_);
    sessions_.emplace(session->id, session);
  }
  return {201, {{"id", session->id}, {"seed", session->seed}, {"graph", session->graph_ref}}};
}

Response Service::describe(const Session& s) const {
  auto st = s.snapshot();
  json out = {{"id", s.id}, {"seed", s.seed}, {"graph", s.graph_ref}, {"created", s.created},
              {"updated", st->updated.empty() ? s.created : st->updated}, {"ops", st->ops}};
  if (st->outcome) {
    out["question"] = st->outcome->question;
    out["preference"] = st->outcome->preference.to_json();
    out["budget"] = st->budget;
  }
  out["has_layout"] = st->layout.has_value();
  return {200, out};
}

Response Service::run_query(const std::shared_ptr<Session>& s, const std::string& body) {
  const auto req = parse_body(body);
  if (!req) return error(400, "request body must be a JSON object");
  const std::string question = req->value("question", std::string());
  if (text::trim(question).empty()) return error(422, "question is empty", {{"repair_log", json::array()}});

  const Engine& engine = *s->engine;
  double diversity = engine.config().sigma_default;
  int budget = engine.config().budget;
  if (req->contains("diversity") && !req->at("diversity").is_null()) {
    if (!req->at("diversity").is_number()) return error(400, "'diversity' must be a number");
    diversity = req->at("diversity").get<double>();
    if (!(diversity >= 0.0 && diversity <= 1.0)) return error(400, "'diversity' must lie in [0, 1]");
  }
  if (req->contains("budget") && !req->at("budget").is_null()) {
    if (!req->at("budget").is_number_integer() || req->at("budget").get<long long>() < 1) {
      return error(400, "'budget' must be a positive integer");
    }
    budget = req->at("budget").get<int>();
  }

  std::lock_guard lock(s->write_mu);
  UserPreference pref;
  try {
    pref = engine.extract(question);
  } catch (const ExtractionError& e) {
    return error(422, e.what(), {{"repair_log", e.repair_log()}});
  }
  pref.diversity = diversity;

  auto next = std::make_shared<State>();
  try {
    next->outcome = engine.run(pref, budget, s->seed, question);
  } catch (const ExtractionError& e) {
    return error(422, e.what(), {{"repair_log", e.repair_log()}});
  } catch (const QueryError& e) {
    return error(422, e.what());
  }
  next->layout = next->outcome->layout;
  next->budget = budget;
  next->updated = now_iso();
  persist(*s, *next);
  s->publish(next);

  const QueryOutcome& o = *next->outcome;
  return {200,
          {{"preference", o.preference.to_json()},
           {"layout", layout_json(*next->layout)},
           {"answers", o.answer_subgraph(engine.graph())},
           {"sample", o.sample.to_json()},
           {"warnings", o.warnings()}}};
}

void Service::apply_op(const Engine& engine, ContextLayout& layout, const json& op, json* detail) {
  const std::string kind = op.at("op").get<std::string>();
  if (kind == "context") {
    const ContextDirective d = ContextDirective::from_json(op.at("directive"));
    if (d.kind == ContextKind::Path) {
      const PathResult paths = apply_path_context(layout, d, engine.graph());
      if (detail) *detail = paths.to_json();
    } else {
      apply_directive(layout, d, engine.graph());
    }
  } else if (kind == "expand") {
    expand_bundle(layout, op.at("bundle").get<std::string>());
  } else {
    throw Error("unknown operation '" + kind + "'");
  }
}

Response Service::run_context(const std::shared_ptr<Session>& s, const std::string& body) {
  const auto req = parse_body(body);
  if (!req) return error(400, "request body must be a JSON object");
  const std::string description = req->value("description", std::string());
  if (text::trim(description).empty()) return error(422, "description is empty");

  std::lock_guard lock(s->write_mu);
  auto cur = s->snapshot();
  if (!cur->layout) return error(409, "no query has run in this session");

  const Engine& engine = *s->engine;
  ContextDirective directive;
  try {
    directive = engine.classify(description, cur->outcome->preference);
  } catch (const ClassificationError& e) {
    return error(422, e.what());
  }

  auto next = std::make_shared<State>(*cur);
  next->insight.reset();
  const json op = {{"op", "context"}, {"directive", directive.to_json()}};
  json detail;
  try {
    apply_op(engine, *next->layout, op, &detail);
  } catch (const NotFoundError& e) {
    return error(422, e.what(), {{"directive", directive.to_json()}});
  } catch (const QueryError& e) {
    return error(422, e.what(), {{"directive", directive.to_json()}});
  }
  next->ops.push_back(op);
  next->updated = now_iso();
  persist(*s, *next);
  s->publish(next);

  json out = {{"directive", directive.to_json()}, {"layout", layout_json(*next->layout)}};
  if (!detail.is_null()) out["paths"] = detail;
  return {200, out};
}

Response Service::expand(const std::shared_ptr<Session>& s, const std::string& bundle) {
  std::lock_guard lock(s->write_mu);
  auto cur = s->snapshot();
  if (!cur->layout) return error(409, "no query has run in this session");
  auto next = std::make_shared<State>(*cur);
  const json op = {{"op", "expand"}, {"bundle", bundle}};
  try {
    apply_op(*s->engine, *next->layout, op, nullptr);
  } catch (const NotFoundError& e) {
    return error(404, e.what());
  }
  next->ops.push_back(op);
  next->updated = now_iso();
  persist(*s, *next);
  s->publish(next);
  return {200, layout_json(*next->layout)};
}

Response Service::insights(const std::shared_ptr<Session>& s) {
  auto cur = s->snapshot();
  if (!cur->layout) return error(409, "no query has run in this session");
  if (cur->insight) return {200, cur->insight->to_json()};

  std::lock_guard lock(s->write_mu);
  cur = s->snapshot();
  if (cur->insight) return {200, cur->insight->to_json()};
  QueryOutcome view = *cur->outcome;
  view.layout = *cur->layout;
  auto next = std::make_shared<State>(*cur);
  next->insight = s->engine->insights(view);
  s->publish(next);
  return {200, next->insight->to_json()};
}

Response Service::search(const std::shared_ptr<Session>& s, const Params& query) const {
  std::string name;
  if (auto it = query.find("name"); it != query.end()) name = it->second;
  const std::string needle{text::trim(name)};
  json nodes = json::array();
  json ids = json::array();
  if (needle.empty()) return {200, {{"query", name}, {"ids", ids}, {"nodes", nodes}}};

  auto st = s->snapshot();
  struct Hit {
    bool exact;
    std::string label;
    const Node* node;
  };
  std::vector<Hit> hits;
  for (const Node& n : s->engine->graph().nodes()) {
    if (text::ifind(n.label, needle) == std::string::npos) continue;
    hits.push_back({text::iequals(n.label, needle), text::to_lower(n.label), &n});
  }
  std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
    if (a.exact != b.exact) return a.exact;
    if (a.label != b.label) return a.label < b.label;
    return a.node->id < b.node->id;
  });
  if (hits.size() > 50) hits.resize(50);
  for (const auto& h : hits) {
    const bool shown = st->layout && st->layout->displays(h.node->id);
    ids.push_back(h.node->id);
    nodes.push_back({{"id", h.node->id}, {"label", h.node->label}, {"type", h.node->type}, {"displayed", shown}});
  }
  return {200, {{"query", name}, {"ids", ids}, {"nodes", nodes}}};
}

Response Service::run_job(std::function<Response()> job) {
  auto future = std::async(std::launch::async, std::move(job)).share();
  if (future.wait_for(config_.job_timeout) == std::future_status::ready) return future.get();
  const std::string id = random_hex(16);
  {
    std::lock_guard lock(jobs_mu_);
    jobs_.emplace(id, future);
  }
  return {202, {{"job", id}, {"status", "running"}, {"poll", "/jobs/" + id}}};
}

Response Service::poll_job(const std::string& id) {
  std::shared_future<Response> f;
  {
    std::lock_guard lock(jobs_mu_);
    auto it = jobs_.find(id);
    if (it == jobs_.end()) return error(404, "unknown job '" + id + "'");
    f = it->second;
  }
  if (f.wait_for(std::chrono::seconds(0)) != std::future_status::ready) {
    return {202, {{"job", id}, {"status", "running"}, {"poll", "/jobs/" + id}}};
  }
  return f.get();
}

void Service::persist(const Session& s, const State& state) const {
  if (config_.data_dir.empty()) return;
  json snap = {{"id", s.id},           {"graph", s.graph_ref}, {"seed", s.seed},
               {"created", s.created}, {"updated", state.updated}, {"ops", state.ops}};
  if (state.outcome) {
    snap["query"] = {{"question", state.outcome->question},
                     {"preference", state.outcome->preference.to_json()},
                     {"budget", state.budget}};
  } else {
    snap["query"] = nullptr;
  }
  write_atomic(config_.data_dir / "sessions" / (s.id + ".json"), snap.dump(2));
}

std::shared_ptr<const Service::State> Service::replay(const Engine& engine, std::uint64_t seed, const json& snap) {
  auto st = std::make_shared<State>();
  st->updated = snap.value("updated", std::string());
  const json& q = snap.at("query");
  if (q.is_null()) return st;
  const UserPreference pref = UserPreference::from_json(q.at("preference"));
  st->budget = q.at("budget").get<int>();
  st->outcome = engine.run(pref, st->budget, seed, q.value("question", std::string()));
  st->layout = st->outcome->layout;
  for (const auto& op : snap.at("ops")) {
    apply_op(engine, *st->layout, op, nullptr);
    st->ops.push_back(op);
  }
  return st;
}

void Service::restore() {
  if (config_.data_dir.empty()) return;
  const fs::path dir = config_.data_dir / "sessions";
  if (!fs::exists(dir)) return;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& path : files) {
    try {
      const json snap = json::parse(read_file(path));
      auto s = std::make_shared<Session>();
      s->id = snap.at("id").get<std::string>();
      s->graph_ref = snap.at("graph");
      s->seed = snap.at("seed").get<std::uint64_t>();
      s->created = snap.value("created", std::string());
      s->engine = engine_for(s->graph_ref);
      s->publish(replay(*s->engine, s->seed, snap));
      std::unique_lock lock(sessions_mu_);
      sessions_.emplace(s->id, s);
    } catch (const std::exception& e) {
      std::lock_guard lock(log_mu_);
      std::cout << json{{"ts", now_iso()}, {"event", "restore_failed"}, {"file", path.string()}, {"error", e.what()}}
                       .dump()
                << std::endl;
    }
  }
}

namespace {

void install(httplib::Server& server, Service& service, std::size_t max_body) {
  server.set_payload_max_length(max_body);
  // Catch-all routes rather than a pre-routing hook: the body is read only after routing.
  const auto forward = [&service](const httplib::Request& req, httplib::Response& res) {
    Response r = service.handle(req.method, req.path, req.body, {req.params.begin(), req.params.end()});
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  server.Get(".*", forward);
  server.Post(".*", forward);
  server.Put(".*", forward);
  server.Delete(".*", forward);
  server.Patch(".*", forward);
}

}  // namespace

bool Service::listen(const std::string& host, int port) {
  if (!server_) {
    server_ = std::make_unique<httplib::Server>();
    install(*server_, *this, config_.max_body_bytes);
  }
  return server_->listen(host, port);
}

int Service::bind_any_port(const std::string& host) {
  if (!server_) {
    server_ = std::make_unique<httplib::Server>();
    install(*server_, *this, config_.max_body_bytes);
  }
  return server_->bind_to_any_port(host);
}

bool Service::listen_after_bind() { return server_ && server_->listen_after_bind(); }

void Service::stop() {
  if (server_) server_->stop();
}

}  // namespace ckg
