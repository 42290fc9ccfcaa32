#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "contextkg/engine.hpp"

namespace httplib {
class Server;
}

namespace ckg {

struct ServiceConfig {
  std::filesystem::path data_dir;    // session snapshots; empty keeps sessions in memory only
  std::filesystem::path graphs_dir;  // named graphs: <graphs_dir>/<name>.json
  bool offline = true;
  std::chrono::milliseconds job_timeout{60000};
  std::size_t max_body_bytes = 64u << 20;
  std::size_t max_nodes = 200000;
  EngineConfig engine;
  bool log_requests = true;

  /// CONTEXTKG_OFFLINE (default 1), CONTEXTKG_DATA_DIR, CONTEXTKG_GRAPHS_DIR,
  /// CONTEXTKG_JOB_TIMEOUT_MS, CONTEXTKG_MAX_BODY_BYTES, CONTEXTKG_MAX_NODES.
  static ServiceConfig from_env();
};

struct Response {
  int status = 200;
  nlohmann::json body;
};

/// Session-based HTTP facade over the engine. `handle` is the whole API and
/// is usable without sockets; `listen` serves it over HTTP.
class Service {
 public:
  explicit Service(ServiceConfig config, std::shared_ptr<LanguageModelClient> client = nullptr);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  Response handle(const std::string& method, const std::string& path, const std::string& body = {},
                  const std::multimap<std::string, std::string>& query = {});

  /// Blocks until stop().
  bool listen(const std::string& host, int port);
  /// Binds an ephemeral port and returns it; serve with listen_after_bind().
  int bind_any_port(const std::string& host);
  bool listen_after_bind();
  void stop();

  const ServiceConfig& config() const noexcept { return config_; }
  std::size_t session_count() const;

 private:
  struct State {
    std::optional<QueryOutcome> outcome;
    std::optional<ContextLayout> layout;  // outcome layout plus applied operations
    std::optional<InsightReport> insight;
    int budget = 0;
    std::string updated;
    nlohmann::json ops = nlohmann::json::array();
  };

  struct Session {
    std::string id;
    nlohmann::json graph_ref;
    std::uint64_t seed = 0;
    std::string created;
    std::shared_ptr<const Engine> engine;

    std::mutex write_mu;  // serializes mutations
    mutable std::mutex state_mu;  // guards the pointer swap only
    std::shared_ptr<const State> state = std::make_shared<State>();

    std::shared_ptr<const State> snapshot() const;
    void publish(std::shared_ptr<const State> next);
  };

  using Params = std::multimap<std::string, std::string>;

  Response dispatch(const std::string& method, const std::vector<std::string>& parts, const std::string& body,
                    const Params& query);
  Response create_session(const std::string& body);
  Response run_query(const std::shared_ptr<Session>& s, const std::string& body);
  Response run_context(const std::shared_ptr<Session>& s, const std::string& body);
  Response expand(const std::shared_ptr<Session>& s, const std::string& bundle);
  Response insights(const std::shared_ptr<Session>& s);
  Response search(const std::shared_ptr<Session>& s, const Params& query) const;
  Response describe(const Session& s) const;
  Response poll_job(const std::string& id);

  /// Runs the job; if it outlives the timeout, parks it and answers 202.
  Response run_job(std::function<Response()> job);

  std::shared_ptr<Session> find_session(const std::string& id) const;
  std::shared_ptr<const Engine> engine_for(const nlohmann::json& graph_ref);
  std::shared_ptr<const KnowledgeGraph> load_named_graph(const std::string& name);

  void persist(const Session& s, const State& state) const;
  void restore();
  /// Rebuilds state from a stored query and operation history.
  static std::shared_ptr<const State> replay(const Engine& engine, std::uint64_t seed, const nlohmann::json& snapshot);
  static void apply_op(const Engine& engine, ContextLayout& layout, const nlohmann::json& op, nlohmann::json* detail);

  void log_request(const std::string& method, const std::string& path, int status, double ms) const;

  ServiceConfig config_;
  std::shared_ptr<LanguageModelClient> client_;

  mutable std::shared_mutex sessions_mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;

  std::mutex engines_mu_;
  std::map<std::string, std::shared_ptr<const Engine>> named_engines_;

  std::mutex jobs_mu_;
  std::map<std::string, std::shared_future<Response>> jobs_;

  mutable std::mutex log_mu_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace ckg
