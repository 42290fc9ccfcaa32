#pragma once

#include <chrono>
#include <cstddef>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace ckg {

struct ChatMessage {
  std::string role;  // "system" | "user" | "assistant"
  std::string content;
};

/// A fully rendered request. `task` and `key` identify the request for
/// recorded-completion playback; they are not sent over the wire.
struct Prompt {
  std::string task;
  std::string key;
  std::vector<ChatMessage> messages;
};

/// Anything that can turn a chat prompt into completion text. Implementations
/// must tolerate concurrent calls.
class LanguageModelClient {
 public:
  virtual ~LanguageModelClient() = default;
  virtual std::string complete(const Prompt& prompt) = 0;
};

/// Deterministic client backed by recorded completions and an optional
/// responder callback. Recordings for the same (task, key) are replayed in
/// order; the last one repeats.
class MockLanguageModelClient final : public LanguageModelClient {
 public:
  using Responder = std::function<std::optional<std::string>(const Prompt&)>;

  void record(std::string task, std::string key, std::string completion);
  /// Accepts an array of {task, key, completion} objects.
  void load_recordings(const nlohmann::json& recordings);
  void set_responder(Responder responder);

  std::string complete(const Prompt& prompt) override;

  std::size_t calls() const;
  std::vector<Prompt> history() const;

 private:
  mutable std::mutex mu_;
  std::map<std::pair<std::string, std::string>, std::deque<std::string>> recordings_;
  Responder responder_;
  std::vector<Prompt> history_;
};

struct HttpClientConfig {
  std::string endpoint;  // e.g. http://localhost:8000/v1/chat/completions
  std::string api_key;
  std::string model = "gpt-4-turbo";
  std::chrono::milliseconds timeout{30000};
  int max_retries = 2;

  /// CONTEXTKG_LLM_ENDPOINT, CONTEXTKG_LLM_API_KEY, CONTEXTKG_LLM_MODEL,
  /// CONTEXTKG_LLM_TIMEOUT_MS, CONTEXTKG_LLM_MAX_RETRIES. Empty endpoint when unset.
  static HttpClientConfig from_env();
};

/// Chat-completion over HTTP: POST {model, messages, temperature: 0}.
class HttpLanguageModelClient final : public LanguageModelClient {
 public:
  explicit HttpLanguageModelClient(HttpClientConfig config);
  std::string complete(const Prompt& prompt) override;

  const HttpClientConfig& config() const noexcept { return config_; }

  /// Request body sent for a prompt.
  nlohmann::json request_body(const Prompt& prompt) const;
  /// Pulls completion text out of common provider response shapes.
  static std::optional<std::string> completion_text(const nlohmann::json& response);

 private:
  HttpClientConfig config_;
  std::string scheme_host_port_;
  std::string path_;
};

/// Extracts the first balanced JSON object from completion text, tolerating
/// code fences and surrounding prose.
std::optional<nlohmann::json> parse_completion_object(std::string_view completion);

}  // namespace ckg
