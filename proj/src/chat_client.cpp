#include "smartsnap/chat_client.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#include "httplib.h"

namespace smartsnap {

nlohmann::json request_to_json(const ChatRequest& req) {
  nlohmann::json j;
  j["model"] = req.model;
  j["messages"] = nlohmann::json::array();
  for (const auto& m : req.messages) j["messages"].push_back({{"role", m.role}, {"content", m.content}});
  j["temperature"] = req.temperature;
  j["max_tokens"] = req.max_tokens;
  if (!req.tools.is_null()) j["tools"] = req.tools;
  return j;
}

ChatResponse response_from_json(const nlohmann::json& body) {
  if (!body.is_object() || !body.contains("choices") || !body["choices"].is_array() || body["choices"].empty()) {
    throw TransportError("response has no choices");
  }
  const auto& choice = body["choices"][0];
  ChatResponse r;
  if (choice.contains("message")) {
    const auto& msg = choice["message"];
    if (msg.contains("content") && msg["content"].is_string()) r.content = msg["content"].get<std::string>();
    if (msg.contains("tool_calls") && msg["tool_calls"].is_array()) r.tool_calls = msg["tool_calls"];
  } else if (choice.contains("text") && choice["text"].is_string()) {
    r.content = choice["text"].get<std::string>();
  } else {
    throw TransportError("choice has neither message nor text");
  }
  return r;
}

void InFlightLimiter::acquire() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return available_ > 0; });
  --available_;
}

void InFlightLimiter::release() {
  {
    std::lock_guard lock(mu_);
    ++available_;
  }
  cv_.notify_one();
}

HttpChatClient::HttpChatClient(EndpointConfig cfg) : cfg_(std::move(cfg)), limiter_(cfg_.max_in_flight) {
  auto scheme_end = cfg_.url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("endpoint url must include a scheme: " + cfg_.url);
  auto path_start = cfg_.url.find('/', scheme_end + 3);
  origin_ = cfg_.url.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : cfg_.url.substr(path_start);
#ifndef SMARTSNAP_HAVE_OPENSSL
  if (cfg_.url.rfind("https://", 0) == 0) throw ConfigError("https endpoints need OpenSSL support");
#endif
}

ChatResponse HttpChatClient::complete(const ChatRequest& req) {
  struct Slot {
    InFlightLimiter& l;
    explicit Slot(InFlightLimiter& x) : l(x) { l.acquire(); }
    ~Slot() { l.release(); }
  } slot(limiter_);

  httplib::Headers headers;
  if (!cfg_.api_key_env.empty()) {
    if (const char* key = std::getenv(cfg_.api_key_env.c_str()); key != nullptr && *key != '\0') {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
  }
  const std::string body = request_to_json(req).dump();
  std::string last_error;
  for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(200 << (attempt - 1)));
    httplib::Client cli(origin_);
    auto timeout = std::chrono::duration<double>(cfg_.timeout_seconds);
    cli.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    cli.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    auto res = cli.Post(path_, headers, body, "application/json");
    if (!res) {
      last_error = "request failed: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = "server returned HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      // Client errors will not improve on retry.
      throw TransportError("server returned HTTP " + std::to_string(res->status));
    }
    auto j = nlohmann::json::parse(res->body, nullptr, false);
    if (j.is_discarded()) {
      last_error = "response body is not JSON";
      continue;
    }
    return response_from_json(j);
  }
  throw TransportError(last_error);
}

}  // namespace smartsnap
