#include "contextkg/llm_client.hpp"

#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "contextkg/error.hpp"
#include "strings.hpp"

namespace ckg {

using nlohmann::json;

void MockLanguageModelClient::record(std::string task, std::string key, std::string completion) {
  std::lock_guard lock(mu_);
  recordings_[{std::move(task), std::move(key)}].push_back(std::move(completion));
}

void MockLanguageModelClient::load_recordings(const json& recordings) {
  for (const auto& r : recordings) {
    record(r.at("task").get<std::string>(), r.at("key").get<std::string>(),
           r.at("completion").get<std::string>());
  }
}

void MockLanguageModelClient::set_responder(Responder responder) {
  std::lock_guard lock(mu_);
  responder_ = std::move(responder);
}

std::string MockLanguageModelClient::complete(const Prompt& prompt) {
  Responder responder;
  {
    std::lock_guard lock(mu_);
    history_.push_back(prompt);
    if (auto it = recordings_.find({prompt.task, prompt.key}); it != recordings_.end() && !it->second.empty()) {
      std::string out = it->second.front();
      if (it->second.size() > 1) it->second.pop_front();
      return out;
    }
    responder = responder_;
  }
  if (responder) {
    if (auto out = responder(prompt)) return *out;
  }
  throw LlmError(LlmError::Kind::NoRecording,
                 "no recorded completion for task '" + prompt.task + "' key '" + prompt.key + "'");
}

std::size_t MockLanguageModelClient::calls() const {
  std::lock_guard lock(mu_);
  return history_.size();
}

std::vector<Prompt> MockLanguageModelClient::history() const {
  std::lock_guard lock(mu_);
  return history_;
}

HttpClientConfig HttpClientConfig::from_env() {
  HttpClientConfig c;
  auto env = [](const char* name) -> std::optional<std::string> {
    if (const char* v = std::getenv(name); v && *v) return std::string(v);
    return std::nullopt;
  };
  if (auto v = env("CONTEXTKG_LLM_ENDPOINT")) c.endpoint = *v;
  if (auto v = env("CONTEXTKG_LLM_API_KEY")) c.api_key = *v;
  if (auto v = env("CONTEXTKG_LLM_MODEL")) c.model = *v;
  if (auto v = env("CONTEXTKG_LLM_TIMEOUT_MS")) c.timeout = std::chrono::milliseconds(std::stol(*v));
  if (auto v = env("CONTEXTKG_LLM_MAX_RETRIES")) c.max_retries = std::stoi(*v);
  return c;
}

HttpLanguageModelClient::HttpLanguageModelClient(HttpClientConfig config) : config_(std::move(config)) {
  const auto scheme_end = config_.endpoint.find("://");
  if (scheme_end == std::string::npos) {
    throw LlmError(LlmError::Kind::Transport, "endpoint must include a scheme: '" + config_.endpoint + "'");
  }
  const auto path_start = config_.endpoint.find('/', scheme_end + 3);
  scheme_host_port_ = config_.endpoint.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : config_.endpoint.substr(path_start);
}

json HttpLanguageModelClient::request_body(const Prompt& prompt) const {
  json messages = json::array();
  for (const auto& m : prompt.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
  return {{"model", config_.model}, {"messages", messages}, {"temperature", 0}};
}

std::optional<std::string> HttpLanguageModelClient::completion_text(const json& r) {
  if (!r.is_object()) return std::nullopt;
  if (auto c = r.find("choices"); c != r.end() && c->is_array() && !c->empty()) {
    const auto& first = (*c)[0];
    if (first.contains("message") && first["message"].contains("content") &&
        first["message"]["content"].is_string()) {
      return first["message"]["content"].get<std::string>();
    }
    if (first.contains("text") && first["text"].is_string()) return first["text"].get<std::string>();
  }
  if (auto m = r.find("message"); m != r.end() && m->is_object() && m->contains("content") &&
                                  (*m)["content"].is_string()) {
    return (*m)["content"].get<std::string>();
  }
  if (auto c = r.find("content"); c != r.end() && c->is_array() && !c->empty() &&
                                  (*c)[0].contains("text") && (*c)[0]["text"].is_string()) {
    return (*c)[0]["text"].get<std::string>();
  }
  return std::nullopt;
}

std::string HttpLanguageModelClient::complete(const Prompt& prompt) {
  const std::string body = request_body(prompt).dump();
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  std::string last_error = "no attempt made";
  bool timed_out = false;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    httplib::Client client(scheme_host_port_);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    auto res = client.Post(path_, headers, body, "application/json");
    if (!res) {
      timed_out = res.error() == httplib::Error::Read || res.error() == httplib::Error::ConnectionTimeout;
      last_error = "request failed: " + httplib::to_string(res.error());
    } else if (res->status == 429 || res->status >= 500) {
      timed_out = false;
      last_error = "provider returned HTTP " + std::to_string(res->status);
    } else if (res->status != 200) {
      throw LlmError(LlmError::Kind::BadResponse,
                     "provider returned HTTP " + std::to_string(res->status) + ": " + res->body);
    } else {
      json parsed = json::parse(res->body, nullptr, /*allow_exceptions=*/false);
      if (auto text = completion_text(parsed)) return *text;
      throw LlmError(LlmError::Kind::BadResponse, "response carries no completion text");
    }
    if (attempt < config_.max_retries) {
      std::this_thread::sleep_for(std::chrono::milliseconds(100 * (attempt + 1)));
    }
  }
  throw LlmError(timed_out ? LlmError::Kind::Timeout : LlmError::Kind::Transport, last_error);
}

std::optional<json> parse_completion_object(std::string_view completion) {
  // Scan for the first '{' that opens a balanced object, honoring strings.
  for (std::size_t start = completion.find('{'); start != std::string_view::npos;
       start = completion.find('{', start + 1)) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = start; i < completion.size(); ++i) {
      const char c = completion[i];
      if (in_string) {
        if (escaped) escaped = false;
        else if (c == '\\') escaped = true;
        else if (c == '"') in_string = false;
        continue;
      }
      if (c == '"') in_string = true;
      else if (c == '{') ++depth;
      else if (c == '}' && --depth == 0) {
        json j = json::parse(completion.substr(start, i - start + 1), nullptr, false);
        if (!j.is_discarded() && j.is_object()) return j;
        break;
      }
    }
  }
  return std::nullopt;
}

}  // namespace ckg
